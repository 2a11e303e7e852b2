#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selfheal/agents.hpp"
#include "selfheal/baselines.hpp"
#include "selfheal/env_grid.hpp"
#include "selfheal/env_scalar.hpp"

namespace selfheal {

class ConfigRegistry;

enum class EnvVariant { Discrete, Continuous, Stochastic, Grid };
const char* env_variant_name(EnvVariant v);
EnvVariant parse_env_variant(const std::string& name);

enum class AgentKind { QLearning, Dqn, DqnPer, DqnTransfer, Td3, Heuristic, Random, Adaptive };
const char* agent_name(AgentKind a);
/// Throws ConfigError listing the valid names.
AgentKind parse_agent(const std::string& name);
std::vector<std::string> agent_names();

/// Throws ConfigError when the agent cannot act in `env`.
void check_compatible(AgentKind agent, EnvVariant env);
/// Scalar variant an agent runs on when none is requested explicitly.
EnvVariant default_env(AgentKind agent);

struct BudgetStudyConfig {
  std::int64_t budget = 60;
  std::int64_t runs = 10;
  std::int64_t batch = 16;
  std::int64_t updates_per_step = 4;
  double epsilon_start = 0.3;
  double epsilon_end = 0.0;
};

/// Every tunable of every experiment, addressable through one registry.
struct ExperimentConfig {
  ScalarEnvConfig env;
  StochasticHealParams heal{0.9, 5.0, 2.0, false};
  GridConfig grid;
  QLearningConfig qlearning;
  DqnConfig dqn;
  Td3Config td3;
  PiControllerConfig pi;
  BudgetStudyConfig budget;
  std::int64_t eval_runs = 10;
  std::int64_t stochastic_runs = 30;

  void validate() const;
};

void bind_all(ConfigRegistry& registry, ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Records

struct StepRow {
  std::int64_t step = 0;      // 1-based
  double integrity = 0.0;     // after the step
  double action = 0.0;        // intervention index, -1 for dosage actions
  double dosage = 0.0;        // continuous amount, 0 for discrete actions
  double reward = 0.0;
  double supply_used = 0.0;   // cumulative

  friend bool operator==(const StepRow&, const StepRow&) = default;
};

struct RunRecord {
  std::uint64_t run_id = 0;
  std::vector<StepRow> rows;  // exactly `horizon` rows
  double final_integrity = 0.0;
  double total_reward = 0.0;
  double total_supply = 0.0;

  /// True when integrity fell below kFailureThreshold at any step.
  bool failed() const;
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct SummaryRow {
  std::string agent;
  double mean_reward = 0.0;
  double final_mean = 0.0;
  double final_std = 0.0;
  double mean_supply = 0.0;
  std::int64_t runs = 0;
};

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> values);
SummaryRow summarize(const std::string& agent, std::span<const RunRecord> runs);
double failure_rate(std::span<const RunRecord> runs);
/// Header plus one row, the summary.csv layout.
std::string summary_csv(const SummaryRow& row, EnvVariant env);

/// Resets `env` with `seed` and runs `policy` greedily to the horizon. If
/// integrity reaches 0 early the remaining rows repeat the terminal state
/// with zero reward and no further spending.
RunRecord run_episode(ScalarEnv& env, Controller& policy, std::uint64_t seed, std::uint64_t run_id = 0);

/// Seed of evaluation episode `run` under `base` (disjoint from training).
std::uint64_t evaluation_seed(std::uint64_t base, std::uint64_t run);

std::vector<RunRecord> evaluate(Controller& policy, EnvVariant env, const ExperimentConfig& config,
                                std::uint64_t seed, std::int64_t runs);

// ---------------------------------------------------------------------------
// Pipelines

struct ExperimentSpec {
  AgentKind agent = AgentKind::Heuristic;
  EnvVariant env = EnvVariant::Discrete;
  std::int64_t eval_runs = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // empty: nothing written

  void validate() const;
};

struct TrainedPolicy {
  std::unique_ptr<Controller> controller;
  std::string artifact_name;  // "policy.csv", "policy.mlp", "policy.txt"
  std::string artifact;       // file contents, provenance header included
};

TrainedPolicy train_policy(AgentKind agent, EnvVariant env, const ExperimentConfig& config,
                           std::uint64_t seed);

/// Rebuilds a greedy controller from an artifact written by train_policy.
/// Baselines carry no learned state and ignore the file.
std::unique_ptr<Controller> load_policy(AgentKind agent, EnvVariant env, const ExperimentConfig& config,
                                        const std::filesystem::path& artifact);
std::string artifact_name(AgentKind agent);

struct ExperimentResult {
  TrainedPolicy policy;
  SummaryRow summary;
  std::vector<RunRecord> runs;
};

/// Train, evaluate on fresh seeds and, when spec.out is set, write
/// <out>/<agent>/<env>/{summary,trajectory,action_freq,supply_reward}.csv
/// and the policy artifact. A failed run leaves no partial directory.
ExperimentResult train_and_evaluate(const ExperimentSpec& spec, const ExperimentConfig& config);

/// Trains and evaluates each agent on its default env with shared seeds,
/// sorted by final integrity (descending). Writes <out>/compare.csv.
std::vector<SummaryRow> compare(const std::vector<AgentKind>& agents, const ExperimentConfig& config,
                                std::uint64_t seed, const std::filesystem::path& out = {});

struct BudgetCurve {
  DqnVariant variant = DqnVariant::Uniform;
  std::vector<double> mean_integrity;  // index t-1 holds step t
  double at_budget = 0.0;
  std::size_t prefill = 0;             // transitions stored before step 1
};

/// Each run is one fresh DQN learning online for `budget` interaction steps
/// from the initial integrity; curves are averaged over runs. Writes
/// <out>/budget_study.csv when `out` is set.
std::vector<BudgetCurve> budget_study(const ExperimentConfig& config, std::uint64_t seed,
                                      const std::filesystem::path& out = {});

struct StochasticStudyResult {
  SummaryRow td3;
  double td3_failure_rate = 0.0;
  SummaryRow heuristic;
  double heuristic_failure_rate = 0.0;
  std::vector<RunRecord> td3_runs;
  std::vector<RunRecord> heuristic_runs;
};

/// TD3 trained and evaluated with stochastic healing, against the heuristic
/// on the same evaluation seeds. Writes <out>/stochastic_study.csv.
StochasticStudyResult stochastic_study(const ExperimentConfig& config, std::uint64_t seed,
                                       const std::filesystem::path& out = {});

struct GridRunRecord {
  std::uint64_t run_id = 0;
  std::vector<double> integrity;  // after each step
  double initial_integrity = 0.0;
  double initial_center = 0.0;
  double final_center = 0.0;
  DamageField final_field;
};

std::vector<GridRunRecord> grid_runs(GridController controller, const GridConfig& config,
                                     std::int64_t steps, std::int64_t runs, std::uint64_t seed);

/// Writes trajectory.csv, summary.csv and heatmap_t<steps>.csv (final true
/// field of run 0) into `out`.
void write_grid_outputs(const std::filesystem::path& out, GridController controller,
                        std::span<const GridRunRecord> runs);

/// action_freq.csv, trajectory.csv and supply_reward.csv for `records`.
void emit_figure_data(std::span<const RunRecord> records, const std::filesystem::path& dir);

/// Writes `text` to `path`, raising IoError naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace selfheal
