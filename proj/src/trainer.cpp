#include "uavmec/trainer.hpp"

#include <chrono>
#include <stdexcept>

namespace uavmec {

namespace {

std::vector<Point> positions(const Environment& env) {
  std::vector<Point> out;
  out.reserve(env.users().size());
  for (const auto& tu : env.users()) out.push_back(tu.position);
  return out;
}

EpisodeMetrics close_episode(int index, const Environment& env, double total_reward,
                             long long tasks, double energy) {
  EpisodeMetrics m;
  m.episode = index;
  m.slots = env.slot();
  m.total_reward = total_reward;
  m.average_reward = m.slots > 0 ? total_reward / m.slots : 0.0;
  m.tasks = tasks;
  m.throughput_bits = static_cast<double>(tasks) * env.config().N_b;
  for (const auto& tu : env.users()) {
    m.cum_tasks.push_back(tu.cum_tasks);
    m.qos_met.push_back(tu.cum_tasks >= env.config().Z);
  }
  m.energy_used = energy;
  m.final_battery = env.uav().battery;
  return m;
}

}  // namespace

double RunSummary::mean_reward() const {
  if (episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : episodes) s += e.average_reward;
  return s / static_cast<double>(episodes.size());
}

double RunSummary::mean_throughput() const {
  if (episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : episodes) s += e.throughput_bits;
  return s / static_cast<double>(episodes.size());
}

double RunSummary::tail_mean_reward(std::size_t count) const {
  if (episodes.empty() || count == 0) return 0.0;
  const std::size_t n = std::min(count, episodes.size());
  double s = 0.0;
  for (std::size_t i = episodes.size() - n; i < episodes.size(); ++i) s += episodes[i].average_reward;
  return s / static_cast<double>(n);
}

void finalize_summary(RunSummary& summary, int N) {
  summary.moving_average.clear();
  const auto w = static_cast<std::size_t>(std::max(1, summary.window));
  double running = 0.0;
  for (std::size_t i = 0; i < summary.episodes.size(); ++i) {
    running += summary.episodes[i].average_reward;
    if (i >= w) running -= summary.episodes[i - w].average_reward;
    summary.moving_average.push_back(running / static_cast<double>(std::min(i + 1, w)));
  }
  summary.qos_percent.assign(static_cast<std::size_t>(N), 0.0);
  if (summary.episodes.empty()) return;
  for (const auto& e : summary.episodes) {
    for (std::size_t n = 0; n < e.qos_met.size() && n < summary.qos_percent.size(); ++n) {
      if (e.qos_met[n]) summary.qos_percent[n] += 1.0;
    }
  }
  for (auto& q : summary.qos_percent) q = 100.0 * q / static_cast<double>(summary.episodes.size());
}

TrainingResult run_training(const SimConfig& cfg, AgentKind kind, const TrainingOptions& options) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  Rng env_rng = make_rng(cfg.seed, Stream::kEnvironment);
  Rng agent_rng = make_rng(cfg.seed, Stream::kAgent);

  TrainingResult result;
  result.agent = make_agent(kind, cfg, agent_rng);
  Agent& agent = *result.agent;
  auto* deep = dynamic_cast<DeepAgent*>(&agent);
  auto* tabular = dynamic_cast<TabularAgent*>(&agent);
  if (deep && options.target_probe) deep->set_target_probe(options.target_probe);

  RunSummary& summary = result.summary;
  summary.agent = to_string(kind);
  summary.seed = cfg.seed;
  summary.window = cfg.learning.moving_average_window;

  Environment env(cfg);
  long long eps_step = 0;
  for (int episode = 0; episode < cfg.learning.episodes; ++episode) {
    env.reset(env_rng);
    double total_reward = 0.0;
    double energy = 0.0;
    long long tasks = 0;
    Observation obs = agent.observe(env);
    while (!env.done()) {
      const double epsilon = epsilon_schedule(eps_step, cfg.learning);
      const Action action = agent.act(obs, epsilon, true, agent_rng);
      const int from = env.uav().fpap_index;
      std::vector<Point> before;
      if (options.on_step) before = positions(env);

      StepOutcome out = env.step(action, env_rng);
      ++summary.env_steps;
      total_reward += out.reward;
      energy += out.energy.total;
      tasks += out.mu_served;

      Observation next = agent.observe(env);
      agent.learn(obs, action, out.reward, next, out.terminal, agent_rng);
      if (cfg.learning.decay_unit == DecayUnit::kStep) ++eps_step;

      if (options.on_step) {
        options.on_step({episode, env.slot() - 1, action, from, std::move(out), std::move(before)});
      }
      obs = std::move(next);
    }
    if (cfg.learning.decay_unit == DecayUnit::kEpisode) ++eps_step;

    EpisodeMetrics m = close_episode(episode, env, total_reward, tasks, energy);
    m.epsilon = epsilon_schedule(eps_step, cfg.learning);
    if (tabular) m.table_keys = tabular->key_count();
    if (deep) m.replay_fill = deep->replay().size();
    if (options.on_episode) options.on_episode(m, agent);
    summary.episodes.push_back(std::move(m));
  }
  finalize_summary(summary, cfg.N);
  result.epsilon_step = eps_step;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

RunSummary run_evaluation(const Agent& agent, const SimConfig& cfg, int episodes, bool qos_mask,
                          const StepSink& on_step) {
  if (episodes < 1) throw std::invalid_argument("run_evaluation: episodes must be at least 1");
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  Rng env_rng = make_rng(cfg.seed, Stream::kEvaluation);
  Rng agent_rng = make_rng(cfg.seed, Stream::kAgent);

  RunSummary summary;
  summary.agent = to_string(agent.kind());
  summary.seed = cfg.seed;
  summary.window = cfg.learning.moving_average_window;

  Environment env(cfg);
  for (int episode = 0; episode < episodes; ++episode) {
    env.reset(env_rng);
    double total_reward = 0.0;
    double energy = 0.0;
    long long tasks = 0;
    while (!env.done()) {
      const Observation obs = agent.observe(env);
      const Action action = agent.act(obs, 0.0, qos_mask, agent_rng);
      const int from = env.uav().fpap_index;
      std::vector<Point> before;
      if (on_step) before = positions(env);
      StepOutcome out = env.step(action, env_rng);
      ++summary.env_steps;
      total_reward += out.reward;
      energy += out.energy.total;
      tasks += out.mu_served;
      if (on_step) on_step({episode, env.slot() - 1, action, from, std::move(out), std::move(before)});
    }
    summary.episodes.push_back(close_episode(episode, env, total_reward, tasks, energy));
  }
  finalize_summary(summary, cfg.N);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

std::map<double, RunSummary> robustness_sweep(const Agent& agent, const SimConfig& cfg,
                                              const std::vector<double>& speeds, int episodes,
                                              bool qos_mask) {
  std::map<double, RunSummary> out;
  for (double v : speeds) {
    SimConfig at_speed = cfg;
    at_speed.mobility.v_bar = v;
    out[v] = run_evaluation(agent, at_speed, episodes, qos_mask);
  }
  return out;
}

std::vector<TrajectoryPoint> trajectory_trace(const Agent& agent, const SimConfig& cfg,
                                              int max_slots) {
  validate(cfg);
  Rng env_rng = make_rng(cfg.seed, Stream::kEvaluation);
  Rng agent_rng = make_rng(cfg.seed, Stream::kAgent);
  Environment env(cfg);
  env.reset(env_rng);

  std::vector<TrajectoryPoint> trace;
  while (!env.done() && static_cast<int>(trace.size()) < max_slots) {
    const Observation obs = agent.observe(env);
    const Action action = agent.act(obs, 0.0, true, agent_rng);
    TrajectoryPoint p;
    p.t = env.slot();
    p.uav_fpap = env.uav().fpap_index;
    p.uav_position = env.uav().position;
    p.target_fpap = action.fpap;
    p.served_tu = action.tu;
    p.battery = env.uav().battery;
    p.tu_positions = positions(env);
    p.mu = env.step(action, env_rng).mu_served;
    trace.push_back(std::move(p));
  }
  return trace;
}

}  // namespace uavmec
