#include <benchmark/benchmark.h>

#include "selfheal/agents.hpp"
#include "selfheal/baselines.hpp"
#include "selfheal/env_grid.hpp"
#include "selfheal/env_scalar.hpp"
#include "selfheal/nn.hpp"
#include "selfheal/replay.hpp"

using namespace selfheal;

static void BM_ScalarEnvStep(benchmark::State& state) {
  ScalarEnv env(ScalarEnvConfig{}, ActionSpace::Discrete);
  Observation obs = env.reset(1);
  std::uint64_t episode = 1;
  for (auto _ : state) {
    const auto out = env.step(heuristic_policy(obs));
    obs = out.terminal ? env.reset(++episode) : out.observation;
    benchmark::DoNotOptimize(obs);
  }
}
BENCHMARK(BM_ScalarEnvStep);

static void BM_GridEnvStep(benchmark::State& state) {
  GridConfig cfg;
  cfg.n = state.range(0);
  cfg.horizon = 1 << 30;
  GridEnv env(cfg);
  env.reset(1);
  for (auto _ : state) {
    const DamageField seen = env.observe();
    benchmark::DoNotOptimize(env.step(greedy_grid_policy(seen, env.integrity())));
  }
}
BENCHMARK(BM_GridEnvStep)->Arg(16)->Arg(32);

static Mlp bench_net(Eigen::Index hidden) {
  Rng rng(3);
  return Mlp::create(MlpShape{3, {hidden, hidden}, 3}, rng);
}

static void BM_MlpForwardBatch(benchmark::State& state) {
  const Mlp net = bench_net(64);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
}
BENCHMARK(BM_MlpForwardBatch)->Arg(1)->Arg(64);

static void BM_MlpBackwardBatch(benchmark::State& state) {
  const Mlp net = bench_net(64);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, state.range(0));
  const Eigen::MatrixXd up = Eigen::MatrixXd::Random(3, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mlp_backward(net, x, up));
}
BENCHMARK(BM_MlpBackwardBatch)->Arg(64);

static void BM_ReplaySample(benchmark::State& state) {
  const auto mode = state.range(0) ? ReplayMode::Prioritized : ReplayMode::Uniform;
  ReplayBuffer buffer(ReplayConfig{}, mode);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    Transition t;
    t.reward = uniform(rng, -1.0, 0.0);
    buffer.push(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(buffer.sample(64, rng));
}
BENCHMARK(BM_ReplaySample)->Arg(0)->Arg(1);

static void BM_DqnTrainStep(benchmark::State& state) {
  DqnAgent agent(DqnConfig{}, DqnVariant::Uniform, 1);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    Transition t;
    t.obs = {uniform(rng, 0.5, 1.0), 0.5, 0.01};
    t.next_obs = t.obs;
    t.action = static_cast<double>(i % 3);
    t.reward = -0.1;
    agent.remember(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step());
}
BENCHMARK(BM_DqnTrainStep);

BENCHMARK_MAIN();
