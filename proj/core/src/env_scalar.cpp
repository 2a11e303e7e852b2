#include "selfheal/env_scalar.hpp"

#include <algorithm>
#include <cmath>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {
namespace {

void require_fraction(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string("env.") + name + " must lie in [0, 1], got " + format_exact(v));
  }
}

void require_nonnegative(const char* name, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("env.") + name + " must be >= 0, got " + format_exact(v));
  }
}

}  // namespace

void ScalarEnvConfig::validate() const {
  require_fraction("initial_integrity", initial_integrity);
  if (horizon < 1) throw ConfigError("env.horizon must be >= 1, got " + std::to_string(horizon));
  require_fraction("wear_low", wear_low);
  require_fraction("wear_high", wear_high);
  if (wear_low > wear_high) throw ConfigError("env.wear_low must not exceed env.wear_high");
  require_fraction("severe_prob", severe_prob);
  require_fraction("severe_low", severe_low);
  require_fraction("severe_high", severe_high);
  if (severe_low > severe_high) throw ConfigError("env.severe_low must not exceed env.severe_high");
  require_fraction("chem_heal", chem_heal);
  require_nonnegative("chem_cost", chem_cost);
  require_fraction("thermal_heal", thermal_heal);
  require_nonnegative("thermal_cost", thermal_cost);
  require_fraction("continuous_heal_max", continuous_heal_max);
  require_nonnegative("continuous_cost_max", continuous_cost_max);
  require_nonnegative("supply_budget", supply_budget);
  if (supply_budget <= 0.0) throw ConfigError("env.supply_budget must be > 0");
  require_nonnegative("noaction_penalty_weight", noaction_penalty_weight);
  require_nonnegative("integrity_penalty_weight", integrity_penalty_weight);
}

void StochasticHealParams::validate() const {
  if (!(success_prob >= 0.0 && success_prob <= 1.0)) {
    throw ConfigError("heal.success_prob must lie in [0, 1], got " + format_exact(success_prob));
  }
  if (!(beta_alpha > 0.0)) throw ConfigError("heal.beta_alpha must be > 0");
  if (!(beta_beta > 0.0)) throw ConfigError("heal.beta_beta must be > 0");
}

void bind_config(ConfigRegistry& r, ScalarEnvConfig& c, const std::string& p) {
  r.bind(p + ".initial_integrity", c.initial_integrity, "starting integrity");
  r.bind(p + ".horizon", c.horizon, "steps per episode");
  r.bind(p + ".wear_low", c.wear_low, "per-step wear lower bound");
  r.bind(p + ".wear_high", c.wear_high, "per-step wear upper bound");
  r.bind(p + ".severe_prob", c.severe_prob, "probability of a severe damage event per step");
  r.bind(p + ".severe_low", c.severe_low, "severe event lower bound");
  r.bind(p + ".severe_high", c.severe_high, "severe event upper bound");
  r.bind(p + ".chem_heal", c.chem_heal, "chemical release heal amount");
  r.bind(p + ".chem_cost", c.chem_cost, "chemical release supply cost");
  r.bind(p + ".thermal_heal", c.thermal_heal, "thermal activation heal amount");
  r.bind(p + ".thermal_cost", c.thermal_cost, "thermal activation supply cost");
  r.bind(p + ".continuous_heal_max", c.continuous_heal_max, "heal at dosage 1");
  r.bind(p + ".continuous_cost_max", c.continuous_cost_max, "supply cost at dosage 1");
  r.bind(p + ".supply_budget", c.supply_budget, "healing supply per episode");
  r.bind(p + ".noaction_penalty_weight", c.noaction_penalty_weight, "mu: NoAction damage penalty");
  r.bind(p + ".integrity_penalty_weight", c.integrity_penalty_weight, "lambda: deficit penalty");
}

void bind_config(ConfigRegistry& r, StochasticHealParams& h, const std::string& p) {
  r.bind(p + ".success_prob", h.success_prob, "Bernoulli heal success probability");
  r.bind(p + ".beta_alpha", h.beta_alpha, "Beta efficacy shape alpha");
  r.bind(p + ".beta_beta", h.beta_beta, "Beta efficacy shape beta");
  r.bind(p + ".enabled", h.enabled, "enable stochastic healing");
}

const char* intervention_name(Intervention kind) {
  switch (kind) {
    case Intervention::ChemicalRelease: return "ChemicalRelease";
    case Intervention::ThermalActivation: return "ThermalActivation";
    case Intervention::NoAction: return "NoAction";
  }
  return "?";
}

Action Action::dosage(double amount) {
  if (std::isnan(amount)) amount = 0.0;
  return Action(Intervention::NoAction, std::clamp(amount, 0.0, 1.0), false);
}

double sample_damage(const ScalarEnvConfig& config, Rng& rng) {
  double d = uniform(rng, config.wear_low, config.wear_high);
  if (bernoulli(rng, config.severe_prob)) d += uniform(rng, config.severe_low, config.severe_high);
  return std::max(d, 0.0);
}

double apply_stochastic_healing(double intended, const StochasticHealParams& params, Rng& rng) {
  if (!params.enabled) return intended;
  if (!bernoulli(rng, params.success_prob)) return 0.0;
  return beta_sample(rng, params.beta_alpha, params.beta_beta) * intended;
}

std::size_t discretize(double integrity, std::size_t bins) {
  if (bins == 0) return 0;
  const double x = std::clamp(integrity, 0.0, 1.0);
  const auto idx = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
  return std::min(idx, bins - 1);
}

ScalarEnv::ScalarEnv(ScalarEnvConfig config, ActionSpace space, StochasticHealParams heal)
    : config_(config), heal_(heal), space_(space) {
  config_.validate();
  heal_.validate();
}

Observation ScalarEnv::reset(std::uint64_t seed) {
  config_.validate();
  damage_rng_ = make_rng(seed, Stream::Damage);
  heal_rng_ = make_rng(seed, Stream::Healing);
  integrity_ = config_.initial_integrity;
  supply_ = config_.supply_budget;
  last_damage_ = 0.0;
  step_ = 0;
  done_ = false;
  return observation();
}

Observation ScalarEnv::observation() const {
  return {integrity_, std::clamp(supply_ / config_.supply_budget, 0.0, 1.0),
          std::clamp(last_damage_, 0.0, 1.0)};
}

void ScalarEnv::set_integrity(double integrity) { integrity_ = std::clamp(integrity, 0.0, 1.0); }

void ScalarEnv::require_active() const {
  if (done_) throw ProtocolError("step() called on a finished episode; call reset() first");
}

StepOutcome ScalarEnv::step(const Action& action) {
  require_active();
  return step_with_damage(action, sample_damage(config_, damage_rng_));
}

StepOutcome ScalarEnv::step_with_damage(const Action& action, double damage) {
  require_active();
  if (action.is_discrete() != (space_ == ActionSpace::Discrete)) {
    throw std::invalid_argument(action.is_discrete()
                                    ? "discrete action given to a continuous environment"
                                    : "dosage action given to a discrete environment");
  }

  double intended = 0.0;
  double cost = 0.0;
  if (action.is_discrete()) {
    switch (action.kind()) {
      case Intervention::ChemicalRelease:
        intended = config_.chem_heal;
        cost = config_.chem_cost;
        break;
      case Intervention::ThermalActivation:
        intended = config_.thermal_heal;
        cost = config_.thermal_cost;
        break;
      case Intervention::NoAction:
        break;
    }
  } else {
    intended = action.amount() * config_.continuous_heal_max;
    cost = action.amount() * config_.continuous_cost_max;
  }

  double heal = intended > 0.0 ? apply_stochastic_healing(intended, heal_, heal_rng_) : 0.0;
  if (cost > supply_) {
    heal = 0.0;
    cost = 0.0;
  }

  const double before = integrity_;
  integrity_ = std::clamp(before - damage + heal, 0.0, 1.0);
  supply_ = std::max(0.0, supply_ - cost);
  last_damage_ = damage;
  ++step_;

  const bool idle = action.is_discrete() && action.kind() == Intervention::NoAction;
  double reward = (integrity_ - before) - cost -
                  config_.integrity_penalty_weight * (1.0 - integrity_);
  if (idle) reward -= config_.noaction_penalty_weight * damage;

  done_ = step_ >= config_.horizon || integrity_ <= 0.0;

  StepOutcome out;
  out.observation = observation();
  out.reward = reward;
  out.supply_spent = cost;
  out.damage = damage;
  out.realized_heal = heal;
  out.terminal = done_;
  return out;
}

}  // namespace selfheal
