#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "selfheal/rng.hpp"

namespace selfheal {

class ConfigRegistry;

/// Scalar self-healing environment parameters. Defaults are the calibrated
/// constants used by every experiment; change them only deliberately.
struct ScalarEnvConfig {
  double initial_integrity = 0.91;
  std::int64_t horizon = 120;
  double wear_low = 0.002;
  double wear_high = 0.012;
  double severe_prob = 0.08;
  double severe_low = 0.05;
  double severe_high = 0.12;
  double chem_heal = 0.15;
  double chem_cost = 1.0;
  double thermal_heal = 0.08;
  double thermal_cost = 0.05;
  double continuous_heal_max = 0.30;
  double continuous_cost_max = 0.1;
  double supply_budget = 20.0;
  double noaction_penalty_weight = 10.0;   // mu
  double integrity_penalty_weight = 10.0;  // lambda

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Realized heal = B * X * intended, B ~ Bernoulli(success_prob),
/// X ~ Beta(beta_alpha, beta_beta). Pass-through when disabled.
struct StochasticHealParams {
  double success_prob = 0.9;
  double beta_alpha = 5.0;
  double beta_beta = 2.0;
  bool enabled = false;

  void validate() const;
  double mean_efficacy() const { return success_prob * beta_alpha / (beta_alpha + beta_beta); }
};

void bind_config(ConfigRegistry& registry, ScalarEnvConfig& config, const std::string& prefix = "env");
void bind_config(ConfigRegistry& registry, StochasticHealParams& params,
                 const std::string& prefix = "heal");

inline constexpr std::size_t kObsDim = 3;
/// A run fails once integrity drops below this level at any step.
inline constexpr double kFailureThreshold = 0.6;

struct Observation {
  double integrity = 0.0;
  double supply_frac = 0.0;
  double last_damage = 0.0;

  std::array<double, kObsDim> to_array() const { return {integrity, supply_frac, last_damage}; }
  static Observation from_array(const std::array<double, kObsDim>& a) { return {a[0], a[1], a[2]}; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

enum class Intervention : int { ChemicalRelease = 0, ThermalActivation = 1, NoAction = 2 };
inline constexpr std::size_t kNumInterventions = 3;

const char* intervention_name(Intervention kind);

enum class ActionSpace { Discrete, Continuous };

/// Either a discrete intervention or a continuous dosage in [0, 1].
class Action {
 public:
  static Action discrete(Intervention kind) { return Action(kind, 0.0, true); }
  /// Clamps the dosage into [0, 1].
  static Action dosage(double amount);

  bool is_discrete() const { return discrete_; }
  Intervention kind() const { return kind_; }
  double amount() const { return amount_; }
  /// Index for discrete actions, dosage for continuous ones.
  double encoded() const { return discrete_ ? static_cast<double>(kind_) : amount_; }

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Action(Intervention kind, double amount, bool discrete)
      : kind_(kind), amount_(amount), discrete_(discrete) {}
  Intervention kind_ = Intervention::NoAction;
  double amount_ = 0.0;
  bool discrete_ = true;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  double supply_spent = 0.0;
  double damage = 0.0;
  double realized_heal = 0.0;
  bool terminal = false;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Damage for one step: uniform wear plus, with probability severe_prob, a
/// uniform severe event.
double sample_damage(const ScalarEnvConfig& config, Rng& rng);

double apply_stochastic_healing(double intended, const StochasticHealParams& params, Rng& rng);

/// floor(integrity * bins), with integrity == 1 folded into the top bin.
std::size_t discretize(double integrity, std::size_t bins);

/// Single-owner scalar damage/heal MDP.
///
/// Each step: draw damage, compute the intended heal, pass it through the
/// stochastic wrapper, zero heal and cost if supply cannot cover the action,
/// update integrity, charge supply, then score
///   r = dh - cost - lambda * (1 - h') - [mu * d if NoAction].
class ScalarEnv {
 public:
  ScalarEnv(ScalarEnvConfig config, ActionSpace space, StochasticHealParams heal = {});

  Observation reset(std::uint64_t seed);
  StepOutcome step(const Action& action);
  /// Same as step() with the damage draw replaced by `damage`.
  StepOutcome step_with_damage(const Action& action, double damage);

  Observation observation() const;
  const ScalarEnvConfig& config() const { return config_; }
  const StochasticHealParams& heal_params() const { return heal_; }
  ActionSpace action_space() const { return space_; }
  double integrity() const { return integrity_; }
  double supply_remaining() const { return supply_; }
  std::int64_t steps_taken() const { return step_; }
  bool done() const { return done_; }

  /// Overrides the current integrity (test and prefill scaffolding).
  void set_integrity(double integrity);

 private:
  void require_active() const;

  ScalarEnvConfig config_;
  StochasticHealParams heal_;
  ActionSpace space_;
  Rng damage_rng_;
  Rng heal_rng_;
  double integrity_ = 0.0;
  double supply_ = 0.0;
  double last_damage_ = 0.0;
  std::int64_t step_ = 0;
  bool done_ = true;
};

/// Anything that maps observations to actions. Implementations may keep
/// per-episode state, cleared by reset().
class Controller {
 public:
  virtual ~Controller() = default;
  virtual ActionSpace action_space() const = 0;
  virtual void reset(std::uint64_t seed) { (void)seed; }
  virtual Action act(const Observation& obs) = 0;
};

}  // namespace selfheal
