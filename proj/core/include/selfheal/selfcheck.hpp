#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace selfheal {

/// Five-state deterministic chain used as a Bellman oracle: actions move
/// the state by +2, +1 or -1 (clamped to [0, 4]) at a fixed cost, and every
/// step is penalised by the distance of the next state from the top.
struct ToyChainMdp {
  static constexpr std::size_t kStates = 5;
  static constexpr std::size_t kActions = 3;
  std::array<int, kActions> move{2, 1, -1};
  std::array<double, kActions> cost{0.6, 0.15, 0.0};
  double deficit_weight = 0.5;
  double gamma = 0.9;

  std::size_t next(std::size_t s, std::size_t a) const;
  double reward(std::size_t s, std::size_t a) const;
  /// Greedy policy from exact value iteration.
  std::array<std::size_t, kStates> optimal_policy() const;
};

struct SelfCheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite: gradient check on random nets, Q-learning against
/// value iteration on ToyChainMdp, and hand-computed Laplacian stencils.
std::vector<SelfCheckResult> run_selfcheck(std::uint64_t seed = 0);

}  // namespace selfheal
