#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "uavmec/agents.hpp"
#include "uavmec/config.hpp"
#include "uavmec/environment.hpp"

namespace uavmec {

struct EpisodeMetrics {
  int episode = 0;
  int slots = 0;  // T
  double total_reward = 0.0;
  double average_reward = 0.0;  // total_reward / T
  long long tasks = 0;
  double throughput_bits = 0.0;  // tasks * N_b
  std::vector<int> cum_tasks;
  std::vector<bool> qos_met;  // cum_tasks[n] >= Z
  double energy_used = 0.0;
  double final_battery = 0.0;
  double epsilon = 0.0;        // exploration rate at episode end
  std::size_t table_keys = 0;  // tabular agents only
  std::size_t replay_fill = 0;  // deep agents only
};

struct RunSummary {
  std::string agent;
  std::uint64_t seed = 0;
  int window = 100;
  std::vector<EpisodeMetrics> episodes;
  std::vector<double> moving_average;  // of average_reward
  std::vector<double> qos_percent;     // per user, in [0, 100]
  long long env_steps = 0;
  double wall_seconds = 0.0;

  double mean_reward() const;
  double mean_throughput() const;
  /// Mean of average_reward over the last `count` episodes.
  double tail_mean_reward(std::size_t count) const;
};

/// One row of the per-step trace. Positions are the users' locations at
/// service time (before the slot's mobility update).
struct StepRecord {
  int episode = 0;
  int t = 0;
  Action action;
  int from_fpap = 0;
  StepOutcome outcome;
  std::vector<Point> tu_positions;
};

using StepSink = std::function<void(const StepRecord&)>;

struct TrainingOptions {
  StepSink on_step;
  std::function<void(const TargetProbe&)> target_probe;
  std::function<void(const EpisodeMetrics&, const Agent&)> on_episode;
};

struct TrainingResult {
  RunSummary summary;
  std::unique_ptr<Agent> agent;
  long long epsilon_step = 0;
};

/// Offline training: for each episode reset, then act with the QoS-masked
/// epsilon-greedy policy until the battery is spent, storing and learning
/// from every transition. Deterministic for a given cfg.seed.
TrainingResult run_training(const SimConfig& cfg, AgentKind kind,
                            const TrainingOptions& options = {});

/// Greedy rollouts (epsilon = 0) with the QoS mask on or off; never updates
/// the agent. Throws std::invalid_argument when `episodes` < 1.
RunSummary run_evaluation(const Agent& agent, const SimConfig& cfg, int episodes, bool qos_mask,
                          const StepSink& on_step = {});

/// Evaluates a frozen agent at each mean user speed in `speeds`.
std::map<double, RunSummary> robustness_sweep(const Agent& agent, const SimConfig& cfg,
                                              const std::vector<double>& speeds, int episodes,
                                              bool qos_mask = true);

struct TrajectoryPoint {
  int t = 0;
  int uav_fpap = 0;  // hover point at the start of the slot
  Point uav_position;
  int target_fpap = 0;
  int served_tu = 0;
  int mu = 0;
  double battery = 0.0;  // at the start of the slot
  std::vector<Point> tu_positions;
};

/// One greedy, QoS-masked episode recorded slot by slot (at most
/// `max_slots` records).
std::vector<TrajectoryPoint> trajectory_trace(const Agent& agent, const SimConfig& cfg,
                                              int max_slots);

/// Fills moving_average and qos_percent from `episodes`.
void finalize_summary(RunSummary& summary, int N);

}  // namespace uavmec
