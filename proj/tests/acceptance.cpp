// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/agents.hpp"
#include "selfheal/harness.hpp"
#include "selfheal/nn.hpp"
#include "selfheal/replay.hpp"
#include "selfheal/selfcheck.hpp"

using namespace selfheal;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 42;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string f4(double v) { return fmt("%.4f", v); }

double mean_at(const std::vector<RunRecord>& runs, std::size_t step) {
  double m = 0.0;
  for (const auto& r : runs) m += r.rows.at(step - 1).integrity;
  return m / static_cast<double>(runs.size());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "selfheal_acceptance";
  fs::remove_all(out);
  const ExperimentConfig config;

  std::map<AgentKind, ExperimentResult> results;
  auto run_agent = [&](AgentKind agent) -> const ExperimentResult& {
    auto it = results.find(agent);
    if (it == results.end()) {
      Timer t;
      ExperimentSpec spec{agent, default_env(agent), config.eval_runs, kSeed, out / "agents"};
      it = results.emplace(agent, train_and_evaluate(spec, config)).first;
      std::printf("  trained %s in %.1fs: final %.4f +- %.4f, supply %.2f, reward %.2f\n", agent_name(agent),
                  t.seconds(), it->second.summary.final_mean, it->second.summary.final_std,
                  it->second.summary.mean_supply, it->second.summary.mean_reward);
      std::fflush(stdout);
    }
    return it->second;
  };

  // 1. Q-learning recovery.
  {
    const auto& q = run_agent(AgentKind::QLearning);
    std::size_t reach = 0;
    for (std::size_t t = 1; t <= 30 && reach == 0; ++t) {
      if (mean_at(q.runs, t) >= 0.98) reach = t;
    }
    const double m = q.summary.final_mean;
    report(1, m >= 0.99 && std::abs(m - 0.997) <= 0.01 && reach > 0,
           "qlearning final " + f4(m) + " (>= 0.99, within 0.01 of 0.997); mean >= 0.98 at step " +
               (reach ? std::to_string(reach) : std::string("never")) + " (<= 30)");
  }

  // 2. DQN recovery.
  {
    const auto& d = run_agent(AgentKind::Dqn);
    report(2, d.summary.final_mean >= 0.98, "dqn final " + f4(d.summary.final_mean) + " (>= 0.98)");
  }

  // 3. TD3 recovery and speed.
  {
    const auto& t = run_agent(AgentKind::Td3);
    const double h10 = mean_at(t.runs, 10);
    report(3, t.summary.final_mean >= 0.99 && h10 >= 0.99,
           "td3 final " + f4(t.summary.final_mean) + " (>= 0.99); mean at step 10 " + f4(h10) + " (>= 0.99)");
  }

  // 4. Baseline calibration.
  {
    const double h = run_agent(AgentKind::Heuristic).summary.final_mean;
    const double r = run_agent(AgentKind::Random).summary.final_mean;
    const double a = run_agent(AgentKind::Adaptive).summary.final_mean;
    report(4, h >= 0.80 && h <= 0.92 && r <= 0.80 && a >= 0.93 && a <= 0.99,
           "heuristic " + f4(h) + " in [0.80, 0.92]; random " + f4(r) + " <= 0.80; adaptive " + f4(a) +
               " in [0.93, 0.99]");
  }

  // 5. Ordering, supply and reward.
  {
    auto fin = [&](AgentKind a) { return results.at(a).summary.final_mean; };
    auto sup = [&](AgentKind a) { return results.at(a).summary.mean_supply; };
    auto rew = [&](AgentKind a) { return results.at(a).summary.mean_reward; };
    using A = AgentKind;
    const bool order = fin(A::Td3) >= fin(A::QLearning) && fin(A::QLearning) >= fin(A::Dqn) &&
                       fin(A::Dqn) > fin(A::Adaptive) && fin(A::Adaptive) > fin(A::Heuristic) &&
                       fin(A::Heuristic) > fin(A::Random);
    bool supply = true, reward = true;
    for (A rl : {A::QLearning, A::Dqn, A::Td3}) {
      for (A base : {A::Heuristic, A::Random}) {
        supply = supply && sup(rl) < sup(base);
        reward = reward && rew(rl) > rew(base);
      }
    }
    std::string detail = "final td3 " + f4(fin(A::Td3)) + " q " + f4(fin(A::QLearning)) + " dqn " +
                         f4(fin(A::Dqn)) + " adaptive " + f4(fin(A::Adaptive)) + " heuristic " +
                         f4(fin(A::Heuristic)) + " random " + f4(fin(A::Random)) + "; supply q/dqn/td3 " +
                         fmt("%.2f", sup(A::QLearning)) + "/" + fmt("%.2f", sup(A::Dqn)) + "/" +
                         fmt("%.2f", sup(A::Td3)) + " vs heuristic " + fmt("%.2f", sup(A::Heuristic)) +
                         " random " + fmt("%.2f", sup(A::Random)) + "; reward min(rl) " +
                         fmt("%.2f", std::min({rew(A::QLearning), rew(A::Dqn), rew(A::Td3)})) +
                         " vs max(baseline) " + fmt("%.2f", std::max(rew(A::Heuristic), rew(A::Random)));
    report(5, order && supply && reward, detail);
  }

  // 6. Stochastic study.
  {
    Timer t;
    const auto s = stochastic_study(config, kSeed, out / "stochastic");
    report(6,
           s.td3.runs == 30 && s.td3.final_mean >= 0.98 && s.td3_failure_rate <= 0.10 &&
               s.td3_failure_rate <= s.heuristic_failure_rate,
           "td3 stochastic final " + f4(s.td3.final_mean) + " over " + std::to_string(s.td3.runs) +
               " runs (>= 0.98); failure rate " + f4(s.td3_failure_rate) + " (<= 0.10, <= heuristic " +
               f4(s.heuristic_failure_rate) + ") [" + fmt("%.0fs", t.seconds()) + "]");
  }

  // 7. Budget study.
  {
    Timer t;
    const auto curves = budget_study(config, kSeed, out / "budget");
    const auto& uni = curves.at(0);
    const auto& per = curves.at(1);
    const auto& tr = curves.at(2);
    double early_u = 0.0, early_t = 0.0;
    const std::size_t early = std::min<std::size_t>(20, uni.mean_integrity.size());
    for (std::size_t i = 0; i < early; ++i) {
      early_u += uni.mean_integrity[i] / static_cast<double>(early);
      early_t += tr.mean_integrity[i] / static_cast<double>(early);
    }
    report(7, per.at_budget - uni.at_budget >= 0.02 && early_t > early_u,
           "at step " + std::to_string(config.budget.budget) + " per " + f4(per.at_budget) + " uniform " +
               f4(uni.at_budget) + " (gap >= 0.02); steps 1-20 mean transfer " + f4(early_t) + " vs uniform " +
               f4(early_u) + " [" + fmt("%.0fs", t.seconds()) + "]");
  }

  // 8. Grid surrogate.
  {
    const std::int64_t steps = config.grid.horizon;
    const std::int64_t runs = 20;
    const auto none = grid_runs(GridController::None, config.grid, steps, runs, kSeed);
    const auto greedy = grid_runs(GridController::Greedy, config.grid, steps, runs, kSeed);
    const auto oracle = grid_runs(GridController::Oracle, config.grid, steps, runs, kSeed);
    auto final_mean = [](const std::vector<GridRunRecord>& rs) {
      double m = 0.0;
      for (const auto& r : rs) m += r.integrity.back() / static_cast<double>(rs.size());
      return m;
    };
    double initial = 0.0, init_center = 0.0;
    for (const auto& r : greedy) {
      initial += r.initial_integrity / static_cast<double>(runs);
      init_center += r.initial_center / static_cast<double>(runs);
    }
    const fs::path dir = out / "grid";
    write_grid_outputs(dir / "greedy", GridController::Greedy, greedy);
    const fs::path heat_path = dir / "greedy" / ("heatmap_t" + std::to_string(steps) + ".csv");
    bool heat_ok = fs::exists(heat_path);
    double heat_center = 1.0;
    if (heat_ok) {
      const DamageField heat = parse_heatmap(slurp(heat_path));
      heat_ok = heat.n() == static_cast<std::size_t>(config.grid.n) &&
                heat.cells().size() == heat.n() * heat.n();
      for (double v : heat.cells()) heat_ok = heat_ok && v >= 0.0 && v <= 1.0;
      heat_center = heat.center_mean();
      heat_ok = heat_ok && heat_center < greedy.front().initial_center;
    }
    const double g = final_mean(greedy), n = final_mean(none), o = final_mean(oracle);
    report(8, g >= 0.97 && n < initial && n < 0.91 && o >= g && heat_ok,
           "t=" + std::to_string(steps) + " over " + std::to_string(runs) + " paired seeds: greedy " + f4(g) +
               " (>= 0.97), none " + f4(n) + " (< initial " + f4(initial) + "), oracle " + f4(o) +
               " (>= greedy); heatmap " + (heat_ok ? "ok" : "bad") + ", center " + f4(heat_center) +
               " vs initial " + f4(greedy.front().initial_center));
  }

  // 9. Property suites.
  {
    std::vector<std::string> broken;
    Rng rng(derive_seed(kSeed, Stream::Init, 99));

    double worst_grad = 0.0;
    for (int k = 0; k < 100; ++k) {
      MlpShape shape;
      shape.enforce_compact = false;
      shape.hidden_activation = Activation::Tanh;
      shape.input = static_cast<Eigen::Index>(1 + uniform_index(rng, 5));
      const std::size_t depth = uniform_index(rng, 3);
      for (std::size_t l = 0; l < depth; ++l) shape.hidden.push_back(static_cast<Eigen::Index>(1 + uniform_index(rng, 8)));
      shape.output = static_cast<Eigen::Index>(1 + uniform_index(rng, 4));
      shape.output_activation = k % 2 ? Activation::Sigmoid : Activation::Identity;
      const Mlp net = Mlp::create(shape, rng);
      Eigen::VectorXd x(shape.input);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, -1.0, 1.0);
      worst_grad = std::max(worst_grad, gradient_check(net, x));
    }
    if (!(worst_grad < 1e-4)) broken.push_back("gradient check " + fmt("%.2e", worst_grad));

    {
      const ToyChainMdp mdp;
      QLearningConfig qc;
      qc.bins = ToyChainMdp::kStates;
      qc.gamma = mdp.gamma;
      QTable q(qc);
      Rng qr(derive_seed(kSeed, Stream::Exploration, 99));
      for (int ep = 0; ep < 3000; ++ep) {
        std::size_t s = uniform_index(qr, ToyChainMdp::kStates);
        const double eps = linear_schedule(1.0, 0.1, ep / 2100.0);
        for (int t = 0; t < 20; ++t) {
          const std::size_t a = epsilon_greedy(q.values(s), eps, qr);
          const std::size_t s2 = mdp.next(s, a);
          q.q_update(s, a, mdp.reward(s, a), s2, false);
          s = s2;
        }
      }
      const auto oracle = mdp.optimal_policy();
      for (std::size_t s = 0; s < ToyChainMdp::kStates; ++s) {
        if (q.greedy(s) != oracle[s]) broken.push_back("q-learning policy differs at state " + std::to_string(s));
      }
    }

    {
      ReplayConfig rc;
      rc.capacity = 10;
      ReplayBuffer fifo(rc, ReplayMode::Uniform);
      for (int i = 0; i < 25; ++i) {
        Transition t;
        t.reward = i;
        fifo.push(t);
      }
      const auto order = fifo.in_insertion_order();
      bool ok = order.size() == 10;
      for (std::size_t i = 0; ok && i < order.size(); ++i) ok = order[i].reward == 15.0 + static_cast<double>(i);
      if (!ok) broken.push_back("replay FIFO order");

      ReplayBuffer per(rc, ReplayMode::Prioritized);
      for (int i = 0; i < 10; ++i) per.push(Transition{});
      std::vector<int> counts(10, 0);
      const int draws = 100000;
      Rng pr(derive_seed(kSeed, Stream::Sampling, 99));
      for (const auto& s : per.sample(static_cast<std::size_t>(draws), pr)) ++counts[s.index];
      for (int c : counts) {
        if (std::abs(c / static_cast<double>(draws) - 0.1) > 0.005) {
          broken.push_back("PER with equal priorities is not uniform");
          break;
        }
      }
    }

    {
      bool clamped = true;
      Rng fr(derive_seed(kSeed, Stream::Policy, 99));
      for (int ep = 0; ep < 10000 && clamped; ++ep) {
        ScalarEnvConfig ec;
        ec.initial_integrity = uniform(fr, 0.0, 1.0);
        ec.severe_prob = uniform(fr, 0.0, 1.0);
        ec.severe_high = uniform(fr, ec.severe_low, 1.0);
        ec.horizon = 30;
        const bool cont = ep % 2 == 1;
        ScalarEnv env(ec, cont ? ActionSpace::Continuous : ActionSpace::Discrete,
                      StochasticHealParams{0.9, 5.0, 2.0, ep % 3 == 0});
        RandomController policy(cont ? ActionSpace::Continuous : ActionSpace::Discrete);
        policy.reset(static_cast<std::uint64_t>(ep));
        Observation obs = env.reset(static_cast<std::uint64_t>(ep));
        while (!env.done()) {
          const auto o = env.step(policy.act(obs));
          obs = o.observation;
          clamped = clamped && env.integrity() >= 0.0 && env.integrity() <= 1.0 && env.supply_remaining() >= 0.0 &&
                    obs.supply_frac >= 0.0 && obs.supply_frac <= 1.0;
        }
      }
      GridConfig gc;
      gc.horizon = 40;
      for (int ep = 0; ep < 200 && clamped; ++ep) {
        gc.growth_gain = uniform(fr, 0.0, 2.0);
        gc.heal_amplitude = uniform(fr, 0.0, 1.0);
        GridEnv env(gc);
        env.reset(static_cast<std::uint64_t>(ep));
        while (!env.done()) {
          std::optional<GridAction> a;
          if (bernoulli(fr, 0.5)) a = GridAction{uniform(fr, 0.0, 1.0)};
          env.step(a);
          for (double v : env.true_field().cells()) clamped = clamped && v >= 0.0 && v <= 1.0;
        }
      }
      if (!clamped) broken.push_back("clamp fuzz");
    }

    {
      const std::vector<AgentKind> agents{AgentKind::QLearning, AgentKind::Heuristic, AgentKind::Random,
                                          AgentKind::Adaptive};
      compare(agents, config, kSeed, out / "determinism_a");
      compare(agents, config, kSeed, out / "determinism_b");
      const auto a = tree_bytes(out / "determinism_a");
      if (a.empty() || a != tree_bytes(out / "determinism_b")) broken.push_back("compare outputs differ");
    }

    std::string detail = "gradient check worst " + fmt("%.2e", worst_grad) +
                         " on 100 nets; toy MDP policy; replay FIFO and PER degeneracy; 10^4 clamp-fuzz "
                         "episodes; compare byte determinism";
    for (const auto& b : broken) detail += "; BROKEN: " + b;
    report(9, broken.empty(), detail);
  }

  std::printf("%s (%d failing)\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED", failures);
  return failures == 0 ? 0 : 1;
}
