#include "selfheal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {

namespace fs = std::filesystem;

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr AgentKind kAllAgents[] = {AgentKind::QLearning, AgentKind::Dqn,       AgentKind::DqnPer,
                                    AgentKind::DqnTransfer, AgentKind::Td3,     AgentKind::Heuristic,
                                    AgentKind::Random,    AgentKind::Adaptive};

bool is_scalar(EnvVariant v) { return v != EnvVariant::Grid; }

ActionSpace space_for(AgentKind agent, EnvVariant env) {
  return agent == AgentKind::Td3 || env == EnvVariant::Continuous ? ActionSpace::Continuous
                                                                   : ActionSpace::Discrete;
}

StochasticHealParams heal_for(const ExperimentConfig& config, EnvVariant env) {
  StochasticHealParams heal = config.heal;
  if (env == EnvVariant::Stochastic) heal.enabled = true;
  return heal;
}

std::string provenance(const ExperimentConfig& config, AgentKind agent, EnvVariant env, std::uint64_t seed) {
  ExperimentConfig copy = config;
  ConfigRegistry registry;
  bind_all(registry, copy);
  return "config_hash=" + hex64(registry.hash()) + " seed=" + std::to_string(seed) +
         " agent=" + agent_name(agent) + " env=" + env_variant_name(env);
}

std::string mlp_text(const Mlp& net, const std::string& header) {
  std::ostringstream out;
  out << "# " << header << '\n';
  save_mlp(out, net);
  return out.str();
}

std::string summary_header() {
  return "agent,env,mean_reward,final_integrity_mean,final_integrity_std,mean_supply_used,runs\n";
}

std::string summary_line(const SummaryRow& row, const std::string& env) {
  return row.agent + ',' + env + ',' + g6(row.mean_reward) + ',' + g6(row.final_mean) + ',' +
         g6(row.final_std) + ',' + g6(row.mean_supply) + ',' + std::to_string(row.runs) + '\n';
}

/// Writes into a sibling staging directory and swaps it into place only
/// once every file is complete.
class StagedDirectory {
 public:
  explicit StagedDirectory(fs::path target) : target_(std::move(target)) {
    staging_ = target_;
    staging_ += ".partial";
    std::error_code ec;
    fs::remove_all(staging_, ec);
    fs::create_directories(staging_, ec);
    if (ec) throw IoError("cannot create directory " + staging_.string() + ": " + ec.message());
  }
  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;
  ~StagedDirectory() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  fs::path path(const std::string& name) const { return staging_ / name; }

  void commit() {
    std::error_code ec;
    fs::remove_all(target_, ec);
    fs::rename(staging_, target_, ec);
    if (ec) throw IoError("cannot move results into " + target_.string() + ": " + ec.message());
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staging_;
  bool committed_ = false;
};

}  // namespace

const char* env_variant_name(EnvVariant v) {
  switch (v) {
    case EnvVariant::Discrete: return "discrete";
    case EnvVariant::Continuous: return "continuous";
    case EnvVariant::Stochastic: return "stochastic";
    case EnvVariant::Grid: return "grid";
  }
  return "?";
}

EnvVariant parse_env_variant(const std::string& name) {
  for (auto v : {EnvVariant::Discrete, EnvVariant::Continuous, EnvVariant::Stochastic, EnvVariant::Grid}) {
    if (name == env_variant_name(v)) return v;
  }
  throw ConfigError("unknown env '" + name + "' (valid: discrete, continuous, stochastic, grid)");
}

const char* agent_name(AgentKind a) {
  switch (a) {
    case AgentKind::QLearning: return "qlearning";
    case AgentKind::Dqn: return "dqn";
    case AgentKind::DqnPer: return "dqn-per";
    case AgentKind::DqnTransfer: return "dqn-transfer";
    case AgentKind::Td3: return "td3";
    case AgentKind::Heuristic: return "heuristic";
    case AgentKind::Random: return "random";
    case AgentKind::Adaptive: return "adaptive";
  }
  return "?";
}

std::vector<std::string> agent_names() {
  std::vector<std::string> names;
  for (auto a : kAllAgents) names.emplace_back(agent_name(a));
  return names;
}

AgentKind parse_agent(const std::string& name) {
  for (auto a : kAllAgents) {
    if (name == agent_name(a)) return a;
  }
  std::string valid;
  for (const auto& n : agent_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown agent '" + name + "' (valid: " + valid + ")");
}

void check_compatible(AgentKind agent, EnvVariant env) {
  if (!is_scalar(env)) {
    throw ConfigError(std::string(agent_name(agent)) +
                      " runs on scalar envs only; use gridsim for the grid surrogate");
  }
  switch (agent) {
    case AgentKind::Td3:
      if (env == EnvVariant::Discrete) {
        throw ConfigError("td3 needs a continuous action space (env continuous or stochastic)");
      }
      return;
    case AgentKind::QLearning:
    case AgentKind::Dqn:
    case AgentKind::DqnPer:
    case AgentKind::DqnTransfer:
    case AgentKind::Heuristic:
      if (env == EnvVariant::Continuous) {
        throw ConfigError(std::string(agent_name(agent)) +
                          " needs a discrete action space (env discrete or stochastic)");
      }
      return;
    case AgentKind::Random:
    case AgentKind::Adaptive:
      return;
  }
}

EnvVariant default_env(AgentKind agent) {
  return agent == AgentKind::Td3 ? EnvVariant::Continuous : EnvVariant::Discrete;
}

void ExperimentConfig::validate() const {
  env.validate();
  heal.validate();
  grid.validate();
  qlearning.validate();
  dqn.validate();
  td3.validate();
  pi.validate();
  if (eval_runs < 1) throw ConfigError("eval_runs must be >= 1");
  if (stochastic_runs < 1) throw ConfigError("stochastic_runs must be >= 1");
  if (budget.budget < 1) throw ConfigError("budget.steps must be >= 1");
  if (budget.runs < 1) throw ConfigError("budget.runs must be >= 1");
  if (budget.batch < 1) throw ConfigError("budget.batch must be >= 1");
  if (budget.updates_per_step < 0) throw ConfigError("budget.updates_per_step must be >= 0");
}

void bind_all(ConfigRegistry& r, ExperimentConfig& c) {
  bind_config(r, c.env, "env");
  bind_config(r, c.heal, "heal");
  bind_config(r, c.grid, "grid");
  bind_config(r, c.qlearning, "qlearning");
  bind_config(r, c.dqn, "dqn");
  bind_config(r, c.td3, "td3");
  bind_config(r, c.pi, "pi");
  r.bind("budget.steps", c.budget.budget, "interaction steps per budget-study run");
  r.bind("budget.runs", c.budget.runs, "independent budget-study runs");
  r.bind("budget.batch", c.budget.batch, "minibatch size during the budget study");
  r.bind("budget.updates_per_step", c.budget.updates_per_step, "gradient updates per interaction step");
  r.bind("budget.epsilon_start", c.budget.epsilon_start, "exploration rate at step 1");
  r.bind("budget.epsilon_end", c.budget.epsilon_end, "exploration rate at the last step");
  r.bind("eval.runs", c.eval_runs, "evaluation episodes per trained policy");
  r.bind("eval.stochastic_runs", c.stochastic_runs, "evaluation episodes in the stochastic study");
}

// ---------------------------------------------------------------------------
// Records

bool RunRecord::failed() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const StepRow& r) { return r.integrity < kFailureThreshold; });
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

SummaryRow summarize(const std::string& agent, std::span<const RunRecord> runs) {
  if (runs.empty()) throw std::invalid_argument("summarize: no runs");
  SummaryRow row;
  row.agent = agent;
  row.runs = static_cast<std::int64_t>(runs.size());
  std::vector<double> finals;
  for (const auto& r : runs) {
    finals.push_back(r.final_integrity);
    row.mean_reward += r.total_reward;
    row.mean_supply += r.total_supply;
  }
  const auto n = static_cast<double>(runs.size());
  row.mean_reward /= n;
  row.mean_supply /= n;
  row.final_mean = std::accumulate(finals.begin(), finals.end(), 0.0) / n;
  row.final_std = sample_std(finals);
  return row;
}

double failure_rate(std::span<const RunRecord> runs) {
  if (runs.empty()) return 0.0;
  const auto failures = std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed(); });
  return static_cast<double>(failures) / static_cast<double>(runs.size());
}

RunRecord run_episode(ScalarEnv& env, Controller& policy, std::uint64_t seed, std::uint64_t run_id) {
  if (policy.action_space() != env.action_space()) {
    throw ConfigError("policy and environment disagree on the action space");
  }
  RunRecord record;
  record.run_id = run_id;
  Observation obs = env.reset(seed);
  policy.reset(seed);
  const double budget = env.supply_remaining();
  const auto horizon = env.config().horizon;
  record.rows.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    StepRow row;
    row.step = t;
    if (!env.done()) {
      const Action action = policy.act(obs);
      const StepOutcome out = env.step(action);
      row.action = action.is_discrete() ? static_cast<double>(action.kind()) : -1.0;
      row.dosage = action.is_discrete() ? 0.0 : action.amount();
      row.reward = out.reward;
      obs = out.observation;
    } else {
      row.action = static_cast<double>(Intervention::NoAction);
    }
    row.integrity = env.integrity();
    row.supply_used = budget - env.supply_remaining();
    record.total_reward += row.reward;
    record.rows.push_back(row);
  }
  record.final_integrity = env.integrity();
  record.total_supply = budget - env.supply_remaining();
  return record;
}

std::uint64_t evaluation_seed(std::uint64_t base, std::uint64_t run) {
  return derive_seed(base, Stream::Evaluation, run);
}

namespace {

std::vector<RunRecord> evaluate_in(Controller& policy, ActionSpace space, EnvVariant env,
                                   const ExperimentConfig& config, std::uint64_t seed, std::int64_t runs) {
  ScalarEnv scalar(config.env, space, heal_for(config, env));
  std::vector<RunRecord> records;
  for (std::int64_t i = 0; i < runs; ++i) {
    const auto id = static_cast<std::uint64_t>(i);
    records.push_back(run_episode(scalar, policy, evaluation_seed(seed, id), id));
  }
  return records;
}

}  // namespace

std::string summary_csv(const SummaryRow& row, EnvVariant env) {
  return summary_header() + summary_line(row, env_variant_name(env));
}

std::vector<RunRecord> evaluate(Controller& policy, EnvVariant env, const ExperimentConfig& config,
                                std::uint64_t seed, std::int64_t runs) {
  if (!is_scalar(env)) throw ConfigError("evaluate: scalar env required");
  return evaluate_in(policy, policy.action_space(), env, config, seed, runs);
}

// ---------------------------------------------------------------------------
// Figure data

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void emit_figure_data(std::span<const RunRecord> records, const fs::path& dir) {
  if (records.empty()) throw std::invalid_argument("emit_figure_data: no records");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  const bool continuous = records.front().rows.empty() ? false : records.front().rows.front().action < 0.0;
  std::vector<std::pair<std::string, std::int64_t>> counts;
  if (continuous) {
    for (int b = 0; b < 5; ++b) {
      char label[32];
      std::snprintf(label, sizeof label, "dosage_%.1f-%.1f", b * 0.2, (b + 1) * 0.2);
      counts.emplace_back(label, 0);
    }
  } else {
    for (std::size_t a = 0; a < kNumInterventions; ++a) {
      counts.emplace_back(intervention_name(static_cast<Intervention>(a)), 0);
    }
  }
  std::int64_t total = 0;
  for (const auto& r : records) {
    for (const auto& row : r.rows) {
      const std::size_t k = continuous ? std::min<std::size_t>(4, static_cast<std::size_t>(row.dosage * 5.0))
                                       : static_cast<std::size_t>(row.action);
      ++counts[k].second;
      ++total;
    }
  }
  std::string freq = "action,count,fraction\n";
  for (const auto& [name, count] : counts) {
    freq += name + ',' + std::to_string(count) + ',' +
            g6(total > 0 ? static_cast<double>(count) / static_cast<double>(total) : 0.0) + '\n';
  }
  write_text_file(dir / "action_freq.csv", freq);

  std::string traj = "step,mean_integrity,std_integrity\n";
  const std::size_t steps = records.front().rows.size();
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> values;
    for (const auto& r : records) values.push_back(r.rows.at(t).integrity);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    traj += std::to_string(t + 1) + ',' + g6(mean) + ',' + g6(sample_std(values)) + '\n';
  }
  write_text_file(dir / "trajectory.csv", traj);

  std::string scatter = "run,total_supply,total_reward\n";
  for (const auto& r : records) {
    scatter += std::to_string(r.run_id) + ',' + g6(r.total_supply) + ',' + g6(r.total_reward) + '\n';
  }
  write_text_file(dir / "supply_reward.csv", scatter);
}

// ---------------------------------------------------------------------------
// Pipelines

void ExperimentSpec::validate() const {
  check_compatible(agent, env);
  if (eval_runs < 1) throw ConfigError("eval runs must be >= 1");
}

TrainedPolicy train_policy(AgentKind agent, EnvVariant env, const ExperimentConfig& config, std::uint64_t seed) {
  check_compatible(agent, env);
  const StochasticHealParams heal = heal_for(config, env);
  const std::string header = provenance(config, agent, env, seed);
  const ActionSpace space = space_for(agent, env);
  TrainedPolicy policy;
  switch (agent) {
    case AgentKind::QLearning: {
      QTable table = train_qlearning(config.qlearning, config.env, heal, seed);
      std::ostringstream out;
      table.save_csv(out, header);
      policy.artifact_name = artifact_name(agent);
      policy.artifact = out.str();
      policy.controller = std::make_unique<QTableController>(std::move(table));
      break;
    }
    case AgentKind::Dqn:
    case AgentKind::DqnPer:
    case AgentKind::DqnTransfer: {
      const DqnVariant variant = agent == AgentKind::Dqn      ? DqnVariant::Uniform
                                 : agent == AgentKind::DqnPer ? DqnVariant::Prioritized
                                                              : DqnVariant::Transfer;
      DqnAgent trained = train_dqn(config.dqn, variant, config.env, heal, seed);
      policy.artifact_name = artifact_name(agent);
      policy.artifact = mlp_text(trained.online(), header);
      policy.controller = std::make_unique<QNetworkController>(trained.online());
      break;
    }
    case AgentKind::Td3: {
      Td3Agent trained = train_td3(config.td3, config.env, heal, seed);
      policy.artifact_name = artifact_name(agent);
      policy.artifact = mlp_text(trained.actor(), header);
      policy.controller = std::make_unique<ActorController>(trained.actor());
      break;
    }
    case AgentKind::Heuristic:
      policy.artifact_name = artifact_name(agent);
      policy.artifact = "# " + header + "\nheuristic threshold=" + format_exact(kHeuristicThreshold) + '\n';
      policy.controller = std::make_unique<HeuristicController>();
      break;
    case AgentKind::Random:
      policy.artifact_name = artifact_name(agent);
      policy.artifact = "# " + header + "\nrandom\n";
      policy.controller = std::make_unique<RandomController>(space);
      break;
    case AgentKind::Adaptive:
      policy.artifact_name = artifact_name(agent);
      policy.artifact = "# " + header + "\npi kp=" + format_exact(config.pi.kp) +
                        " ki=" + format_exact(config.pi.ki) + " setpoint=" + format_exact(config.pi.setpoint) +
                        " integral_clamp=" + format_exact(config.pi.integral_clamp) + '\n';
      policy.controller = std::make_unique<PiController>(config.pi, space);
      break;
  }
  return policy;
}

std::string artifact_name(AgentKind agent) {
  switch (agent) {
    case AgentKind::QLearning: return "policy.csv";
    case AgentKind::Dqn:
    case AgentKind::DqnPer:
    case AgentKind::DqnTransfer:
    case AgentKind::Td3: return "policy.mlp";
    default: return "policy.txt";
  }
}

std::unique_ptr<Controller> load_policy(AgentKind agent, EnvVariant env, const ExperimentConfig& config,
                                        const fs::path& artifact) {
  check_compatible(agent, env);
  auto open = [&] {
    std::ifstream in(artifact);
    if (!in) throw IoError("cannot read policy artifact " + artifact.string());
    return in;
  };
  switch (agent) {
    case AgentKind::QLearning: {
      auto in = open();
      return std::make_unique<QTableController>(QTable::load_csv(in, config.qlearning));
    }
    case AgentKind::Dqn:
    case AgentKind::DqnPer:
    case AgentKind::DqnTransfer: {
      auto in = open();
      return std::make_unique<QNetworkController>(load_mlp(in));
    }
    case AgentKind::Td3: {
      auto in = open();
      return std::make_unique<ActorController>(load_mlp(in));
    }
    case AgentKind::Heuristic: return std::make_unique<HeuristicController>();
    case AgentKind::Random: return std::make_unique<RandomController>(space_for(agent, env));
    case AgentKind::Adaptive: return std::make_unique<PiController>(config.pi, space_for(agent, env));
  }
  throw ConfigError("unknown agent");
}

ExperimentResult train_and_evaluate(const ExperimentSpec& spec, const ExperimentConfig& config) {
  spec.validate();
  config.validate();
  std::optional<StagedDirectory> staged;
  if (!spec.out.empty()) staged.emplace(spec.out / agent_name(spec.agent) / env_variant_name(spec.env));

  ExperimentResult result;
  result.policy = train_policy(spec.agent, spec.env, config, spec.seed);
  result.runs = evaluate_in(*result.policy.controller, space_for(spec.agent, spec.env), spec.env, config,
                            spec.seed, spec.eval_runs);
  result.summary = summarize(agent_name(spec.agent), result.runs);

  if (staged) {
    write_text_file(staged->path("summary.csv"),
                    summary_csv(result.summary, spec.env));
    emit_figure_data(result.runs, staged->path(""));
    write_text_file(staged->path(result.policy.artifact_name), result.policy.artifact);
    staged->commit();
  }
  return result;
}

std::vector<SummaryRow> compare(const std::vector<AgentKind>& agents, const ExperimentConfig& config,
                                std::uint64_t seed, const fs::path& out) {
  if (agents.size() < 2) throw ConfigError("compare needs at least two agents");
  config.validate();
  std::vector<std::pair<SummaryRow, EnvVariant>> rows;
  for (auto agent : agents) {
    ExperimentSpec spec{agent, default_env(agent), config.eval_runs, seed, out};
    rows.emplace_back(train_and_evaluate(spec, config).summary, spec.env);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first.final_mean > b.first.final_mean; });
  std::vector<SummaryRow> table;
  std::string csv = summary_header();
  for (const auto& [row, env] : rows) {
    csv += summary_line(row, env_variant_name(env));
    table.push_back(row);
  }
  if (!out.empty()) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create directory " + out.string() + ": " + ec.message());
    write_text_file(out / "compare.csv", csv);
  }
  return table;
}

std::vector<BudgetCurve> budget_study(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out) {
  config.validate();
  const BudgetStudyConfig& bs = config.budget;
  DqnConfig dqn = config.dqn;
  dqn.batch = bs.batch;
  dqn.learning_starts = bs.batch;
  const auto budget = static_cast<std::size_t>(bs.budget);

  std::vector<BudgetCurve> curves;
  for (auto variant : {DqnVariant::Uniform, DqnVariant::Prioritized, DqnVariant::Transfer}) {
    BudgetCurve curve;
    curve.variant = variant;
    curve.mean_integrity.assign(budget, 0.0);
    for (std::int64_t run = 0; run < bs.runs; ++run) {
      const auto r = static_cast<std::uint64_t>(run);
      DqnAgent agent(dqn, variant, derive_seed(seed, Stream::Training, r));
      ScalarEnv env(config.env, ActionSpace::Discrete, config.heal);
      if (variant == DqnVariant::Transfer && dqn.prefill > 0) {
        HeuristicController heuristic;
        prefill_from_policy(agent.buffer(), heuristic, env, static_cast<std::size_t>(dqn.prefill),
                            derive_seed(seed, Stream::Prefill, r));
      }
      if (run == 0) curve.prefill = agent.buffer().size();
      std::uint64_t episode = 0;
      Observation obs = env.reset(derive_seed(evaluation_seed(seed, r), Stream::Evaluation, episode));
      for (std::size_t t = 0; t < budget; ++t) {
        const double progress = budget > 1 ? static_cast<double>(t) / static_cast<double>(budget - 1) : 1.0;
        const Intervention a = agent.act(obs, linear_schedule(bs.epsilon_start, bs.epsilon_end, progress));
        const StepOutcome step = env.step(Action::discrete(a));
        agent.remember({obs.to_array(), static_cast<double>(a), step.reward, step.observation.to_array(),
                        step.terminal});
        agent.set_progress(progress);
        if (agent.ready()) {
          for (std::int64_t u = 0; u < bs.updates_per_step; ++u) agent.train_step();
        }
        curve.mean_integrity[t] += env.integrity() / static_cast<double>(bs.runs);
        obs = step.terminal ? env.reset(derive_seed(evaluation_seed(seed, r), Stream::Evaluation, ++episode))
                            : step.observation;
      }
    }
    curve.at_budget = curve.mean_integrity.back();
    curves.push_back(std::move(curve));
  }

  if (!out.empty()) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create directory " + out.string() + ": " + ec.message());
    std::string csv = "step";
    for (const auto& c : curves) csv += std::string(",dqn_") + dqn_variant_name(c.variant);
    csv += '\n';
    for (std::size_t t = 0; t < budget; ++t) {
      csv += std::to_string(t + 1);
      for (const auto& c : curves) csv += ',' + g6(c.mean_integrity[t]);
      csv += '\n';
    }
    write_text_file(out / "budget_study.csv", csv);
  }
  return curves;
}

StochasticStudyResult stochastic_study(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out) {
  StochasticStudyResult result;
  ExperimentSpec spec{AgentKind::Td3, EnvVariant::Stochastic, config.stochastic_runs, seed, out};
  ExperimentResult td3 = train_and_evaluate(spec, config);
  result.td3 = td3.summary;
  result.td3_runs = std::move(td3.runs);
  result.td3_failure_rate = failure_rate(result.td3_runs);

  HeuristicController heuristic;
  result.heuristic_runs =
      evaluate_in(heuristic, ActionSpace::Discrete, EnvVariant::Stochastic, config, seed, config.stochastic_runs);
  result.heuristic = summarize(agent_name(AgentKind::Heuristic), result.heuristic_runs);
  result.heuristic_failure_rate = failure_rate(result.heuristic_runs);

  if (!out.empty()) {
    std::string csv = "agent,final_integrity_mean,final_integrity_std,failure_rate,runs\n";
    for (const auto& [row, rate] : {std::pair{&result.td3, result.td3_failure_rate},
                                    std::pair{&result.heuristic, result.heuristic_failure_rate}}) {
      csv += row->agent + ',' + g6(row->final_mean) + ',' + g6(row->final_std) + ',' + g6(rate) + ',' +
             std::to_string(row->runs) + '\n';
    }
    write_text_file(out / "stochastic_study.csv", csv);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Grid

std::vector<GridRunRecord> grid_runs(GridController controller, const GridConfig& config, std::int64_t steps,
                                     std::int64_t runs, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("grid steps must be >= 1");
  if (runs < 1) throw ConfigError("grid runs must be >= 1");
  GridConfig cfg = config;
  cfg.horizon = std::max(cfg.horizon, steps);
  std::vector<GridRunRecord> records;
  for (std::int64_t run = 0; run < runs; ++run) {
    GridEnv env(cfg);
    GridRunRecord record;
    record.run_id = static_cast<std::uint64_t>(run);
    env.reset(evaluation_seed(seed, record.run_id));
    record.initial_integrity = env.integrity();
    record.initial_center = env.true_field().center_mean();
    for (std::int64_t t = 0; t < steps; ++t) {
      // Observation noise is drawn every step for every controller so the
      // dynamics stream stays aligned across paired runs.
      const DamageField observed = env.observe();
      std::optional<GridAction> action;
      if (controller == GridController::Greedy) action = greedy_grid_policy(observed, env.integrity());
      if (controller == GridController::Oracle) action = oracle_grid_policy(env.true_field(), env.integrity());
      record.integrity.push_back(env.step(action));
    }
    record.final_center = env.true_field().center_mean();
    record.final_field = env.true_field();
    records.push_back(std::move(record));
  }
  return records;
}

void write_grid_outputs(const fs::path& out, GridController controller, std::span<const GridRunRecord> runs) {
  if (runs.empty()) throw std::invalid_argument("write_grid_outputs: no runs");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create directory " + out.string() + ": " + ec.message());

  const std::size_t steps = runs.front().integrity.size();
  std::string traj = "step,mean_integrity,std_integrity\n";
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> values;
    for (const auto& r : runs) values.push_back(r.integrity.at(t));
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    traj += std::to_string(t + 1) + ',' + g6(mean) + ',' + g6(sample_std(values)) + '\n';
  }
  write_text_file(out / "trajectory.csv", traj);

  std::vector<double> finals;
  double init = 0.0, init_center = 0.0, final_center = 0.0;
  for (const auto& r : runs) {
    finals.push_back(r.integrity.back());
    init += r.initial_integrity;
    init_center += r.initial_center;
    final_center += r.final_center;
  }
  const auto n = static_cast<double>(runs.size());
  std::string summary =
      "controller,initial_integrity_mean,final_integrity_mean,final_integrity_std,initial_center_mean,"
      "final_center_mean,runs\n";
  summary += std::string(grid_controller_name(controller)) + ',' + g6(init / n) + ',' +
             g6(std::accumulate(finals.begin(), finals.end(), 0.0) / n) + ',' + g6(sample_std(finals)) + ',' +
             g6(init_center / n) + ',' + g6(final_center / n) + ',' + std::to_string(runs.size()) + '\n';
  write_text_file(out / "summary.csv", summary);
  write_text_file(out / ("heatmap_t" + std::to_string(steps) + ".csv"), export_heatmap(runs.front().final_field));
}

}  // namespace selfheal
