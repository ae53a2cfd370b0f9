#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavmec/config.hpp"

namespace uavmec::cli {

/// Bad command-line usage (as opposed to a bad configuration value).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;             // empty: built-in defaults
  std::vector<std::string> overrides;  // "key=value"
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // empty: runs/<command>-<timestamp>
  std::string agent = "ddqn";
  int jobs = 1;
};

struct EvalArgs {
  std::string checkpoint;
  std::string qos_mask = "on";
  int episodes = 100;
};

struct SweepArgs {
  std::string vary;  // "n" or "vbar"
  std::vector<std::string> values;
  std::vector<std::string> agents;  // empty: {agent from CommonArgs}
  int eval_episodes = 100;
  int seeds = 1;  // paired seeds seed, seed+1, ... shared by every value and agent
  // Train once at the configured speed and evaluate at every value (vbar
  // only); otherwise every value is trained and evaluated separately.
  bool robustness = false;
};

struct TraceArgs {
  std::string checkpoint;
  int slots = 0;  // 0: whole episode
};

/// Defaults <- config file <- --set overrides <- --seed, then validated.
SimConfig build_config(const CommonArgs& args);

/// Each command writes its files plus manifest.json into the output
/// directory and returns that directory.
std::string cmd_train(const CommonArgs& args);
std::string cmd_eval(const CommonArgs& args, const EvalArgs& eval);
std::string cmd_sweep(const CommonArgs& args, const SweepArgs& sweep);
std::string cmd_trace(const CommonArgs& args, const TraceArgs& trace);

}  // namespace uavmec::cli
