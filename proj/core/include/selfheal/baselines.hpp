#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "selfheal/env_grid.hpp"
#include "selfheal/env_scalar.hpp"
#include "selfheal/rng.hpp"

namespace selfheal {

class ConfigRegistry;

/// Uniform over the three interventions, or dosage ~ U(0, 1).
Action random_policy(ActionSpace space, Rng& rng);

inline constexpr double kHeuristicThreshold = 0.8;

/// ChemicalRelease when integrity < 0.8, otherwise NoAction.
Action heuristic_policy(const Observation& obs);

struct PiControllerConfig {
  double kp = 2.0;
  double ki = 0.1;
  double setpoint = 1.0;
  double integral_clamp = 1.0;
  double chem_threshold = 0.6;     // u above this -> ChemicalRelease
  double thermal_threshold = 0.2;  // u above this -> ThermalActivation

  void validate() const;
};

void bind_config(ConfigRegistry& registry, PiControllerConfig& config, const std::string& prefix = "pi");

struct PiControllerState {
  double integral = 0.0;
  /// Last control signal u, kept for inspection.
  double control = 0.0;
};

/// e = setpoint - integrity; integral += e (clamped); u = clamp(kp e + ki I, 0, 1).
std::pair<Action, PiControllerState> pi_policy(const PiControllerConfig& config, PiControllerState state,
                                               const Observation& obs, ActionSpace space);

class RandomController final : public Controller {
 public:
  explicit RandomController(ActionSpace space) : space_(space), rng_(0) {}
  ActionSpace action_space() const override { return space_; }
  void reset(std::uint64_t seed) override { rng_ = make_rng(seed, Stream::Policy); }
  Action act(const Observation&) override { return random_policy(space_, rng_); }

 private:
  ActionSpace space_;
  Rng rng_;
};

class HeuristicController final : public Controller {
 public:
  ActionSpace action_space() const override { return ActionSpace::Discrete; }
  Action act(const Observation& obs) override { return heuristic_policy(obs); }
};

class PiController final : public Controller {
 public:
  PiController(PiControllerConfig config, ActionSpace space) : config_(config), space_(space) {
    config_.validate();
  }
  ActionSpace action_space() const override { return space_; }
  void reset(std::uint64_t) override { state_ = {}; }
  Action act(const Observation& obs) override;
  const PiControllerState& state() const { return state_; }

 private:
  PiControllerConfig config_;
  ActionSpace space_;
  PiControllerState state_;
};

inline constexpr double kGreedyGridTrigger = 0.99;

/// Acts at the most damaged observed cell (row-major first on ties) with
/// dosage 1 whenever integrity is below 0.99.
std::optional<GridAction> greedy_grid_policy(const DamageField& observed, double integrity);
/// Same rule applied to the hidden true field.
std::optional<GridAction> oracle_grid_policy(const DamageField& true_field, double integrity);

enum class GridController { None, Greedy, Oracle };
const char* grid_controller_name(GridController c);
GridController parse_grid_controller(const std::string& name);

}  // namespace selfheal
