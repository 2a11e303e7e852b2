#include "selfheal_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"
#include "selfheal/harness.hpp"
#include "selfheal/selfcheck.hpp"

namespace selfheal::cli {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out = "results";
  std::string agent;
  std::string agents;
  std::string env;
  std::string controller = "greedy";
  std::int64_t runs = 0;   // 0: subcommand default
  std::int64_t steps = 0;  // 0: subcommand default
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string config_key_listing() {
  ExperimentConfig defaults;
  ConfigRegistry registry;
  bind_all(registry, defaults);
  std::ostringstream s;
  s << "Configuration keys (config file lines or --set key=value):\n";
  for (const auto& e : registry.entries()) {
    s << "  " << e.key << " = " << registry.get(e.key);
    if (!e.help.empty()) s << "    " << e.help;
    s << '\n';
  }
  return s.str();
}

ExperimentConfig resolve_config(const Options& opt) {
  ExperimentConfig config;
  ConfigRegistry registry;
  bind_all(registry, config);
  if (!opt.config_path.empty()) registry.apply(parse_key_value_file(opt.config_path));
  for (const auto& text : opt.overrides) {
    const auto [key, value] = split_assignment(text);
    registry.set(key, value);
  }
  config.validate();
  return config;
}

std::vector<AgentKind> parse_agent_list(const std::string& text) {
  std::vector<AgentKind> agents;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (!name.empty()) agents.push_back(parse_agent(name));
  }
  return agents;
}

void print_summary(std::ostream& out, const SummaryRow& row) {
  out << row.agent << ": final integrity " << fmt(row.final_mean) << " +/- " << fmt(row.final_std)
      << ", reward " << fmt(row.mean_reward) << ", supply " << fmt(row.mean_supply) << " (" << row.runs
      << " runs)\n";
}

int cmd_train(const Options& opt, std::ostream& out) {
  const ExperimentConfig config = resolve_config(opt);
  const AgentKind agent = parse_agent(opt.agent);
  ExperimentSpec spec;
  spec.agent = agent;
  spec.env = opt.env.empty() ? default_env(agent) : parse_env_variant(opt.env);
  spec.eval_runs = opt.runs > 0 ? opt.runs : config.eval_runs;
  spec.seed = opt.seed;
  spec.out = opt.out;
  spec.validate();
  const ExperimentResult result = train_and_evaluate(spec, config);
  print_summary(out, result.summary);
  out << "wrote " << (spec.out / agent_name(agent) / env_variant_name(spec.env)).string() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& opt, std::ostream& out) {
  const ExperimentConfig config = resolve_config(opt);
  const AgentKind agent = parse_agent(opt.agent);
  const EnvVariant env = opt.env.empty() ? default_env(agent) : parse_env_variant(opt.env);
  check_compatible(agent, env);
  const std::filesystem::path dir = std::filesystem::path(opt.out) / agent_name(agent) / env_variant_name(env);
  auto policy = load_policy(agent, env, config, dir / artifact_name(agent));
  const auto runs = evaluate(*policy, env, config, opt.seed, opt.runs > 0 ? opt.runs : config.eval_runs);
  const SummaryRow row = summarize(agent_name(agent), runs);
  emit_figure_data(runs, dir / "eval");
  write_text_file(dir / "eval" / "summary.csv", summary_csv(row, env));
  print_summary(out, row);
  return kExitOk;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  ExperimentConfig config = resolve_config(opt);
  if (opt.runs > 0) config.eval_runs = opt.runs;
  const auto agents = parse_agent_list(opt.agents);
  const auto table = compare(agents, config, opt.seed, opt.out);
  for (const auto& row : table) print_summary(out, row);
  out << "wrote " << (std::filesystem::path(opt.out) / "compare.csv").string() << '\n';
  return kExitOk;
}

int cmd_gridsim(const Options& opt, std::ostream& out) {
  const ExperimentConfig config = resolve_config(opt);
  const GridController controller = parse_grid_controller(opt.controller);
  const std::int64_t steps = opt.steps > 0 ? opt.steps : config.grid.horizon;
  const std::int64_t runs = opt.runs > 0 ? opt.runs : config.eval_runs;
  const auto records = grid_runs(controller, config.grid, steps, runs, opt.seed);
  write_grid_outputs(opt.out, controller, records);
  double mean = 0.0;
  for (const auto& r : records) mean += r.integrity.back() / static_cast<double>(records.size());
  out << grid_controller_name(controller) << ": integrity at t=" << steps << " " << fmt(mean) << " ("
      << runs << " runs)\n";
  out << "wrote " << (std::filesystem::path(opt.out) / ("heatmap_t" + std::to_string(steps) + ".csv")).string()
      << '\n';
  return kExitOk;
}

int cmd_budget(const Options& opt, std::ostream& out) {
  ExperimentConfig config = resolve_config(opt);
  if (opt.steps > 0) config.budget.budget = opt.steps;
  if (opt.runs > 0) config.budget.runs = opt.runs;
  const auto curves = budget_study(config, opt.seed, opt.out);
  for (const auto& c : curves) {
    out << "dqn-" << dqn_variant_name(c.variant) << ": integrity at step " << config.budget.budget << " "
        << fmt(c.at_budget) << '\n';
  }
  out << "wrote " << (std::filesystem::path(opt.out) / "budget_study.csv").string() << '\n';
  return kExitOk;
}

int cmd_stochastic(const Options& opt, std::ostream& out) {
  ExperimentConfig config = resolve_config(opt);
  if (opt.runs > 0) config.stochastic_runs = opt.runs;
  const auto result = stochastic_study(config, opt.seed, opt.out);
  print_summary(out, result.td3);
  out << "td3 failure rate " << fmt(result.td3_failure_rate) << ", heuristic failure rate "
      << fmt(result.heuristic_failure_rate) << '\n';
  return kExitOk;
}

int cmd_selfcheck(const Options& opt, std::ostream& out, std::ostream& err) {
  bool ok = true;
  for (const auto& r : run_selfcheck(opt.seed)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  if (!ok) {
    err << "selfheal: selfcheck failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Self-healing material control experiments", "selfheal"};
  app.footer(config_key_listing());
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key = value configuration file");
    sub->add_option("--set", opt.overrides, "override one configuration key (repeatable)")
        ->type_name("KEY=VALUE");
    sub->add_option("--seed", opt.seed, "base seed");
    sub->add_option("--out", opt.out, "output directory");
  };

  auto* train = app.add_subcommand("train", "train one agent, evaluate it and write its results");
  common(train);
  train->add_option("--agent", opt.agent, "agent name")->required();
  train->add_option("--env", opt.env, "discrete, continuous or stochastic");
  train->add_option("--runs", opt.runs, "evaluation runs");

  auto* eval = app.add_subcommand("eval", "re-evaluate a policy saved by train under --out");
  common(eval);
  eval->add_option("--agent", opt.agent, "agent name")->required();
  eval->add_option("--env", opt.env, "discrete, continuous or stochastic");
  eval->add_option("--runs", opt.runs, "evaluation runs");

  auto* cmp = app.add_subcommand("compare", "train and evaluate several agents on shared seeds");
  common(cmp);
  cmp->add_option("--agents", opt.agents, "comma-separated agent names")->required();
  cmp->add_option("--runs", opt.runs, "evaluation runs per agent");

  auto* grid = app.add_subcommand("gridsim", "run a controller on the grid damage surrogate");
  common(grid);
  grid->add_option("--controller", opt.controller, "none, greedy or oracle");
  grid->add_option("--steps", opt.steps, "steps per run");
  grid->add_option("--runs", opt.runs, "runs");

  auto* budget = app.add_subcommand("budget-study", "DQN replay variants under a fixed interaction budget");
  common(budget);
  budget->add_option("--steps", opt.steps, "interaction steps per run");
  budget->add_option("--runs", opt.runs, "runs per variant");

  auto* stoch = app.add_subcommand("stochastic-study", "TD3 with stochastic healing efficacy");
  common(stoch);
  stoch->add_option("--runs", opt.runs, "evaluation runs");

  auto* check = app.add_subcommand("selfcheck", "fast invariant checks");
  check->add_option("--seed", opt.seed, "base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string names;
    for (const auto* sub : app.get_subcommands({})) names += (names.empty() ? "" : ", ") + sub->get_name();
    err << "selfheal: " << e.what() << " (subcommands: " << names << "; see --help)\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) return cmd_train(opt, out);
    if (eval->parsed()) return cmd_eval(opt, out);
    if (cmp->parsed()) return cmd_compare(opt, out);
    if (grid->parsed()) return cmd_gridsim(opt, out);
    if (budget->parsed()) return cmd_budget(opt, out);
    if (stoch->parsed()) return cmd_stochastic(opt, out);
    if (check->parsed()) return cmd_selfcheck(opt, out, err);
  } catch (const ConfigError& e) {
    err << "selfheal: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "selfheal: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace selfheal::cli
