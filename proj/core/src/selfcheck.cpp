#include "selfheal/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "selfheal/agents.hpp"
#include "selfheal/env_grid.hpp"
#include "selfheal/nn.hpp"
#include "selfheal/rng.hpp"

namespace selfheal {

std::size_t ToyChainMdp::next(std::size_t s, std::size_t a) const {
  const int n = static_cast<int>(s) + move.at(a);
  return static_cast<std::size_t>(std::clamp(n, 0, static_cast<int>(kStates) - 1));
}

double ToyChainMdp::reward(std::size_t s, std::size_t a) const {
  const auto top = static_cast<double>(kStates - 1);
  return -cost.at(a) - deficit_weight * (top - static_cast<double>(next(s, a))) / top;
}

std::array<std::size_t, ToyChainMdp::kStates> ToyChainMdp::optimal_policy() const {
  std::array<double, kStates> v{};
  for (int sweep = 0; sweep < 2000; ++sweep) {
    for (std::size_t s = 0; s < kStates; ++s) {
      double best = -1e300;
      for (std::size_t a = 0; a < kActions; ++a) best = std::max(best, reward(s, a) + gamma * v[next(s, a)]);
      v[s] = best;
    }
  }
  std::array<std::size_t, kStates> policy{};
  for (std::size_t s = 0; s < kStates; ++s) {
    double best = -1e300;
    for (std::size_t a = 0; a < kActions; ++a) {
      const double q = reward(s, a) + gamma * v[next(s, a)];
      if (q > best) {
        best = q;
        policy[s] = a;
      }
    }
  }
  return policy;
}

namespace {

SelfCheckResult check_gradients(std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Init, 7);
  double worst = 0.0;
  const Activation acts[] = {Activation::Tanh, Activation::Sigmoid, Activation::Relu};
  for (int k = 0; k < 20; ++k) {
    MlpShape shape;
    shape.input = 3;
    shape.hidden = {static_cast<Eigen::Index>(4 + k % 5)};
    if (k % 2 == 0) shape.hidden.push_back(5);
    shape.output = 1 + k % 3;
    shape.hidden_activation = acts[k % 3];
    shape.output_activation = k % 4 == 0 ? Activation::Sigmoid : Activation::Identity;
    shape.enforce_compact = false;
    const Mlp net = Mlp::create(shape, rng);
    Eigen::VectorXd x(3);
    for (Eigen::Index i = 0; i < 3; ++i) x(i) = uniform(rng, -1.0, 1.0);
    worst = std::max(worst, gradient_check(net, x));
  }
  char detail[64];
  std::snprintf(detail, sizeof detail, "max relative error %.3g over 20 nets", worst);
  return {"gradient_check", worst < 1e-4, detail};
}

SelfCheckResult check_bellman(std::uint64_t seed) {
  const ToyChainMdp mdp;
  QLearningConfig cfg;
  cfg.bins = ToyChainMdp::kStates;
  cfg.gamma = mdp.gamma;
  QTable table(cfg);
  Rng rng = make_rng(seed, Stream::Training, 11);
  const int episodes = 3000;
  for (int ep = 0; ep < episodes; ++ep) {
    std::size_t s = uniform_index(rng, ToyChainMdp::kStates);
    const double eps = linear_schedule(1.0, 0.1, static_cast<double>(ep) / (0.7 * episodes));
    for (int t = 0; t < 20; ++t) {
      const std::size_t a = epsilon_greedy(table.values(s), eps, rng);
      const std::size_t s2 = mdp.next(s, a);
      table.q_update(s, a, mdp.reward(s, a), s2, false);
      s = s2;
    }
  }
  const auto oracle = mdp.optimal_policy();
  std::string learned, expected;
  bool same = true;
  for (std::size_t s = 0; s < ToyChainMdp::kStates; ++s) {
    learned += std::to_string(table.greedy(s));
    expected += std::to_string(oracle[s]);
    same = same && table.greedy(s) == oracle[s];
  }
  return {"bellman_oracle", same, "learned " + learned + " vs value iteration " + expected};
}

SelfCheckResult check_stencil() {
  bool ok = true;
  std::string detail;
  auto expect = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-12) {
      ok = false;
      detail += std::string(what) + "=" + std::to_string(got) + " ";
    }
  };
  DamageField flat(5, 0.3);
  const auto lf = laplacian_signed(flat);
  for (double v : lf.cells()) expect("uniform", v, 0.0);

  DamageField spike(5, 0.0);
  spike(2, 2) = 1.0;
  const auto ls = laplacian_signed(spike);
  expect("spike centre", ls(2, 2), -4.0);
  expect("spike neighbour", ls(1, 2), 1.0);
  expect("spike diagonal", ls(1, 1), 0.0);

  DamageField corner(5, 0.0);
  corner(0, 0) = 1.0;
  const auto lc = laplacian_signed(corner);
  expect("corner", lc(0, 0), -2.0);
  expect("corner neighbour", lc(0, 1), 1.0);

  DamageField ramp(5, 0.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) ramp(i, j) = 0.1 * static_cast<double>(j);
  const auto lr = laplacian_signed(ramp);
  expect("ramp interior", lr(2, 2), 0.0);
  expect("ramp left edge", lr(2, 0), 0.1);
  expect("ramp right edge", lr(2, 4), -0.1);
  return {"laplacian_stencil", ok, ok ? "7 cases" : detail};
}

}  // namespace

std::vector<SelfCheckResult> run_selfcheck(std::uint64_t seed) {
  return {check_gradients(seed), check_bellman(seed), check_stencil()};
}

}  // namespace selfheal
