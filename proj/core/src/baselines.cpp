#include "selfheal/baselines.hpp"

#include <algorithm>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {

Action random_policy(ActionSpace space, Rng& rng) {
  if (space == ActionSpace::Continuous) return Action::dosage(uniform(rng, 0.0, 1.0));
  return Action::discrete(static_cast<Intervention>(uniform_index(rng, kNumInterventions)));
}

Action heuristic_policy(const Observation& obs) {
  return Action::discrete(obs.integrity < kHeuristicThreshold ? Intervention::ChemicalRelease
                                                              : Intervention::NoAction);
}

void PiControllerConfig::validate() const {
  if (!(kp >= 0.0) || !(ki >= 0.0)) throw ConfigError("pi gains must be >= 0");
  if (!(integral_clamp >= 0.0)) throw ConfigError("pi.integral_clamp must be >= 0");
  if (!(thermal_threshold <= chem_threshold)) {
    throw ConfigError("pi.thermal_threshold must not exceed pi.chem_threshold");
  }
}

void bind_config(ConfigRegistry& r, PiControllerConfig& c, const std::string& p) {
  r.bind(p + ".kp", c.kp, "proportional gain");
  r.bind(p + ".ki", c.ki, "integral gain");
  r.bind(p + ".setpoint", c.setpoint, "integrity setpoint");
  r.bind(p + ".integral_clamp", c.integral_clamp, "integral accumulator clamp");
  r.bind(p + ".chem_threshold", c.chem_threshold, "u above which ChemicalRelease is chosen");
  r.bind(p + ".thermal_threshold", c.thermal_threshold, "u above which ThermalActivation is chosen");
}

std::pair<Action, PiControllerState> pi_policy(const PiControllerConfig& config, PiControllerState state,
                                               const Observation& obs, ActionSpace space) {
  const double error = config.setpoint - obs.integrity;
  state.integral = std::clamp(state.integral + error, -config.integral_clamp, config.integral_clamp);
  const double u = std::clamp(config.kp * error + config.ki * state.integral, 0.0, 1.0);
  state.control = u;
  if (space == ActionSpace::Continuous) return {Action::dosage(u), state};
  if (u > config.chem_threshold) return {Action::discrete(Intervention::ChemicalRelease), state};
  if (u > config.thermal_threshold) return {Action::discrete(Intervention::ThermalActivation), state};
  return {Action::discrete(Intervention::NoAction), state};
}

Action PiController::act(const Observation& obs) {
  auto [action, next] = pi_policy(config_, state_, obs, space_);
  state_ = next;
  return action;
}

std::optional<GridAction> greedy_grid_policy(const DamageField& observed, double integrity) {
  if (integrity >= kGreedyGridTrigger || observed.n() == 0) return std::nullopt;
  const auto& cells = observed.cells();
  // max_element returns the first maximum, i.e. row-major tie-breaking.
  const auto it = std::max_element(cells.begin(), cells.end());
  const auto k = static_cast<std::size_t>(it - cells.begin());
  return GridAction{k / observed.n(), k % observed.n(), 1.0};
}

std::optional<GridAction> oracle_grid_policy(const DamageField& true_field, double integrity) {
  return greedy_grid_policy(true_field, integrity);
}

const char* grid_controller_name(GridController c) {
  switch (c) {
    case GridController::None: return "none";
    case GridController::Greedy: return "greedy";
    case GridController::Oracle: return "oracle";
  }
  return "?";
}

GridController parse_grid_controller(const std::string& name) {
  if (name == "none") return GridController::None;
  if (name == "greedy") return GridController::Greedy;
  if (name == "oracle") return GridController::Oracle;
  throw ConfigError("unknown grid controller '" + name + "' (valid: none, greedy, oracle)");
}

}  // namespace selfheal
