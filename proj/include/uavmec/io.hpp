#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "uavmec/trainer.hpp"

namespace uavmec::io {

// CSV schemas. Header rows are part of the file contract and are checked
// verbatim by the tests.

/// episode,t,n,m,mu,e_f,e_h,e_c,W,b,r,delta,tu0_x,tu0_y,...
std::string step_trace_header(int N);
void write_step_row(std::ostream& out, const StepRecord& rec);

/// episode,slots,total_reward,average_reward,moving_average,tasks,
/// throughput_bits,energy_used,final_battery,epsilon,table_keys,replay_fill,
/// cum_tasks_0,...
std::string episodes_header(int N);
void write_episodes(std::ostream& out, const RunSummary& summary, int N);

/// tu,qos_percent (one row per user)
std::string qos_header();
void write_qos_table(std::ostream& out, const RunSummary& summary);

/// t,uav_fpap,uav_x,uav_y,target_fpap,served_tu,mu,battery,tu0_x,tu0_y,...
std::string trajectory_header(int N);
void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& trace, int N);

/// value,agent,mean_sum_throughput_bits,mean_reward
std::string sweep_header();

struct SweepRow {
  std::string value;
  std::string agent;
  double mean_throughput_bits = 0.0;
  double mean_reward = 0.0;
};
void write_sweep_row(std::ostream& out, const SweepRow& row);

/// Structured summary (JSON). Field names:
///   agent, seed, window, episodes, env_steps, mean_reward,
///   mean_throughput_bits, tail_mean_reward_500, qos_percent[],
///   average_reward[], moving_average[], slots[], throughput_bits[]
std::string summary_json(const RunSummary& summary);

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<std::string> files;
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> options;
};

std::string manifest_json(const RunManifest& manifest);

/// Local time as YYYY-mm-ddTHH:MM:SS.
std::string timestamp_now();

/// Shortest round-trip decimal representation.
std::string fmt(double v);

}  // namespace uavmec::io
