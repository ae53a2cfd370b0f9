#include "uavmec/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <memory>

#include "uavmec/io.hpp"
#include "uavmec/trainer.hpp"

namespace uavmec::cli {

namespace fs = std::filesystem;

namespace {

std::string default_out_dir(const std::string& command) {
  std::string stamp = io::timestamp_now();
  for (auto& c : stamp) {
    if (c == ':') c = '-';
  }
  return "runs/" + command + "-" + stamp;
}

class Output {
 public:
  Output(const std::string& command, const CommonArgs& args, const SimConfig& cfg)
      : dir_(args.out_dir.empty() ? default_out_dir(command) : args.out_dir),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    manifest_.command = command;
    manifest_.config = to_key_values(cfg);
    manifest_.seed = cfg.seed;
    manifest_.out_dir = dir_;
    manifest_.started_at = io::timestamp_now();
    manifest_.options["agent"] = args.agent;
    manifest_.options["config_path"] = args.config_path;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(fs::path(dir_) / name);
    if (!f) throw std::runtime_error("cannot write '" + (fs::path(dir_) / name).string() + "'");
    manifest_.files.push_back(name);
    return f;
  }

  void option(const std::string& key, const std::string& value) { manifest_.options[key] = value; }

  std::string finish() {
    manifest_.finished_at = io::timestamp_now();
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    manifest_.files.push_back("manifest.json");
    std::ofstream f(fs::path(dir_) / "manifest.json");
    f << io::manifest_json(manifest_);
    return dir_;
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::chrono::steady_clock::time_point start_;
  io::RunManifest manifest_;
};

LoadedAgent read_checkpoint(const std::string& path, const SimConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return load_agent(in, cfg);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

SimConfig build_config(const CommonArgs& args) {
  SimConfig cfg = args.config_path.empty() ? SimConfig{} : load_config(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) cfg.seed = *args.seed;
  validate(cfg);
  return cfg;
}

std::string cmd_train(const CommonArgs& args) {
  const SimConfig cfg = build_config(args);
  const AgentKind kind = parse_agent_kind(args.agent);
  for (const auto& w : feasibility_warnings(cfg)) std::cerr << "warning: " << w << '\n';
  Output out("train", args, cfg);

  {
    auto f = out.open("config.txt");
    f << to_config_text(cfg);
  }
  TrainingResult result;
  {
    auto steps = out.open("steps.csv");
    steps << io::step_trace_header(cfg.N) << '\n';
    TrainingOptions options;
    options.on_step = [&steps](const StepRecord& r) { io::write_step_row(steps, r); };
    result = run_training(cfg, kind, options);
  }
  {
    auto f = out.open("checkpoint.txt");
    result.agent->save(f, cfg, result.epsilon_step);
  }
  {
    auto f = out.open("summary.json");
    f << io::summary_json(result.summary);
  }
  {
    auto f = out.open("episodes.csv");
    io::write_episodes(f, result.summary, cfg.N);
  }
  return out.finish();
}

std::string cmd_eval(const CommonArgs& args, const EvalArgs& eval) {
  if (eval.episodes < 1) throw UsageError("--episodes must be at least 1");
  if (eval.qos_mask != "on" && eval.qos_mask != "off") {
    throw UsageError("--qos-mask expects on or off");
  }
  if (eval.checkpoint.empty()) throw UsageError("--checkpoint is required");
  const SimConfig cfg = build_config(args);
  const LoadedAgent loaded = read_checkpoint(eval.checkpoint, cfg);
  Output out("eval", args, cfg);
  out.option("agent", to_string(loaded.agent->kind()));
  out.option("checkpoint", eval.checkpoint);
  out.option("qos_mask", eval.qos_mask);
  out.option("episodes", std::to_string(eval.episodes));

  const RunSummary summary =
      run_evaluation(*loaded.agent, cfg, eval.episodes, eval.qos_mask == "on");
  {
    auto f = out.open("summary.json");
    f << io::summary_json(summary);
  }
  {
    auto f = out.open("episodes.csv");
    io::write_episodes(f, summary, cfg.N);
  }
  {
    auto f = out.open("qos.csv");
    io::write_qos_table(f, summary);
  }
  return out.finish();
}

std::string cmd_sweep(const CommonArgs& args, const SweepArgs& sweep) {
  if (sweep.values.empty()) throw UsageError("sweep needs at least one value");
  if (sweep.vary != "n" && sweep.vary != "vbar") throw UsageError("--vary expects n or vbar");
  if (sweep.robustness && sweep.vary != "vbar") {
    throw UsageError("--robustness applies to --vary vbar only");
  }
  if (sweep.eval_episodes < 1) throw UsageError("--eval-episodes must be at least 1");
  if (sweep.seeds < 1) throw UsageError("--seeds must be at least 1");
  const SimConfig base = build_config(args);
  const std::vector<std::string> agents =
      sweep.agents.empty() ? std::vector<std::string>{args.agent} : sweep.agents;
  for (const auto& a : agents) parse_agent_kind(a);

  const std::string key = sweep.vary == "n" ? "env.N" : "mobility.v_bar";
  std::vector<SimConfig> configs;
  for (const auto& v : sweep.values) {
    SimConfig c = base;
    set_field(c, key, v);
    validate(c);
    configs.push_back(c);
  }

  Output out("sweep", args, base);
  out.option("vary", sweep.vary);
  out.option("values", join(sweep.values));
  out.option("agents", join(agents));
  out.option("eval_episodes", std::to_string(sweep.eval_episodes));
  out.option("seeds", std::to_string(sweep.seeds));
  out.option("robustness", sweep.robustness ? "true" : "false");

  struct Job {
    std::size_t value;
    std::size_t agent;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::size_t a = 0; a < agents.size(); ++a) {
      for (int s = 0; s < sweep.seeds; ++s) jobs.push_back({i, a, base.seed + s});
    }
  }

  // Robustness mode trains each (agent, seed) once at the base speed.
  std::map<std::pair<std::size_t, std::uint64_t>, std::shared_ptr<Agent>> frozen;
  if (sweep.robustness) {
    for (std::size_t a = 0; a < agents.size(); ++a) {
      for (int s = 0; s < sweep.seeds; ++s) {
        SimConfig c = base;
        c.seed = base.seed + s;
        frozen[{a, c.seed}] = run_training(c, parse_agent_kind(agents[a])).agent;
      }
    }
  }

  auto run_job = [&](const Job& job) {
    SimConfig c = configs[job.value];
    c.seed = job.seed;
    if (sweep.robustness) {
      return run_evaluation(*frozen.at({job.agent, job.seed}), c, sweep.eval_episodes, true);
    }
    TrainingResult trained = run_training(c, parse_agent_kind(agents[job.agent]));
    return run_evaluation(*trained.agent, c, sweep.eval_episodes, true);
  };

  std::vector<RunSummary> results(jobs.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, args.jobs));
  for (std::size_t first = 0; first < jobs.size(); first += width) {
    std::vector<std::future<RunSummary>> batch;
    for (std::size_t j = first; j < std::min(jobs.size(), first + width); ++j) {
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, run_job,
                                 jobs[j]));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) results[first + j] = batch[j].get();
  }

  auto csv = out.open("sweep.csv");
  csv << io::sweep_header() << '\n';
  const auto per_row = static_cast<std::size_t>(sweep.seeds);
  for (std::size_t j = 0; j < jobs.size(); j += per_row) {
    const std::string& value = sweep.values[jobs[j].value];
    const std::string& agent = agents[jobs[j].agent];
    double throughput = 0.0;
    double reward = 0.0;
    for (std::size_t s = j; s < j + per_row; ++s) {
      throughput += results[s].mean_throughput();
      reward += results[s].mean_reward();
      auto f = out.open("summary_" + sweep.vary + "_" + value + "_" + agent + "_s" +
                        std::to_string(jobs[s].seed) + ".json");
      f << io::summary_json(results[s]);
    }
    io::write_sweep_row(csv, {value, agent, throughput / static_cast<double>(per_row),
                              reward / static_cast<double>(per_row)});
  }
  csv.close();
  return out.finish();
}

std::string cmd_trace(const CommonArgs& args, const TraceArgs& trace) {
  if (trace.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (trace.slots < 0) throw UsageError("--slots must be non-negative");
  const SimConfig cfg = build_config(args);
  const LoadedAgent loaded = read_checkpoint(trace.checkpoint, cfg);
  Output out("trace", args, cfg);
  out.option("agent", to_string(loaded.agent->kind()));
  out.option("checkpoint", trace.checkpoint);
  const int slots = trace.slots > 0 ? trace.slots : cfg.max_slots;
  out.option("slots", std::to_string(slots));
  const auto points = trajectory_trace(*loaded.agent, cfg, slots);
  auto f = out.open("trajectory.csv");
  io::write_trajectory(f, points, cfg.N);
  f.close();
  return out.finish();
}

}  // namespace uavmec::cli
