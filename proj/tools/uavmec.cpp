// uavmec: train, evaluate, sweep and trace UAV edge-computing agents.
//
// Exit codes: 0 success, 1 configuration or runtime error, 2 usage error.

#include <iostream>

#include <CLI11.hpp>

#include "uavmec/commands.hpp"
#include "uavmec/config.hpp"

namespace {

void add_common(CLI::App& cmd, uavmec::cli::CommonArgs& args) {
  cmd.add_option("--config", args.config_path, "key=value config file");
  cmd.add_option("--set", args.overrides, "override one field, e.g. --set env.N=3")
      ->type_name("KEY=VALUE");
  cmd.add_option("--seed", args.seed, "master seed (overrides the config)");
  cmd.add_option("--out", args.out_dir, "output directory (default runs/<command>-<time>)");
  cmd.add_option("--agent", args.agent, "ddqn, dqn, ql, dql or random")
      ->check(CLI::IsMember({"ddqn", "dqn", "ql", "dql", "random"}));
  cmd.add_option("--jobs", args.jobs, "parallel workers (sweep)")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace uavmec::cli;
  CLI::App app{"UAV-assisted edge computing: trajectory and offloading agents"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, sweep_args, trace_args;
  EvalArgs eval;
  SweepArgs sweep;
  TraceArgs trace;

  auto* train_cmd = app.add_subcommand("train", "train an agent and write a checkpoint");
  add_common(*train_cmd, train_args);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  add_common(*eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint.txt from train")->required();
  eval_cmd->add_option("--qos-mask", eval.qos_mask, "restrict actions to unmet users (on|off)");
  eval_cmd->add_option("--episodes", eval.episodes, "evaluation episodes");

  auto* sweep_cmd = app.add_subcommand("sweep", "train and evaluate across N or mean speed");
  add_common(*sweep_cmd, sweep_args);
  sweep_cmd->add_option("--vary", sweep.vary, "n or vbar")->required();
  sweep_cmd->add_option("--values", sweep.values, "values of the varied parameter")
      ->delimiter(',');
  sweep_cmd->add_option("--agents", sweep.agents, "agents to compare (default --agent)")
      ->delimiter(',')
      ->check(CLI::IsMember({"ddqn", "dqn", "ql", "dql", "random"}));
  sweep_cmd->add_option("--eval-episodes", sweep.eval_episodes, "evaluation episodes per run");
  sweep_cmd->add_option("--seeds", sweep.seeds, "paired seeds per value and agent");
  sweep_cmd->add_flag("--robustness", sweep.robustness,
                      "train once at the configured speed, evaluate at every value");

  auto* trace_cmd = app.add_subcommand("trace", "record one greedy trajectory");
  add_common(*trace_cmd, trace_args);
  trace_cmd->add_option("--checkpoint", trace.checkpoint, "checkpoint.txt from train")
      ->required();
  trace_cmd->add_option("--slots", trace.slots, "maximum slots (0: whole episode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::string dir;
    if (*train_cmd) dir = cmd_train(train_args);
    if (*eval_cmd) dir = cmd_eval(eval_args, eval);
    if (*sweep_cmd) dir = cmd_sweep(sweep_args, sweep);
    if (*trace_cmd) dir = cmd_trace(trace_args, trace);
    std::cout << dir << '\n';
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const uavmec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
