#include "uavmec/io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <ostream>

#include <json.hpp>

namespace uavmec::io {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string position_columns(int N) {
  std::string out;
  for (int n = 0; n < N; ++n) {
    out += ",tu" + std::to_string(n) + "_x,tu" + std::to_string(n) + "_y";
  }
  return out;
}

}  // namespace

std::string step_trace_header(int N) {
  return "episode,t,n,m,mu,e_f,e_h,e_c,W,b,r,delta" + position_columns(N);
}

void write_step_row(std::ostream& out, const StepRecord& rec) {
  const StepOutcome& o = rec.outcome;
  out << rec.episode << ',' << rec.t << ',' << rec.action.tu << ',' << rec.action.fpap << ','
      << o.mu_served << ',' << fmt(o.energy.flying) << ',' << fmt(o.energy.hovering) << ','
      << fmt(o.energy.computing) << ',' << fmt(o.energy.total) << ',' << fmt(o.battery_after)
      << ',' << fmt(o.reward) << ',' << fmt(o.duration);
  for (const auto& p : rec.tu_positions) out << ',' << fmt(p.x) << ',' << fmt(p.y);
  out << '\n';
}

std::string episodes_header(int N) {
  std::string h =
      "episode,slots,total_reward,average_reward,moving_average,tasks,throughput_bits,"
      "energy_used,final_battery,epsilon,table_keys,replay_fill";
  for (int n = 0; n < N; ++n) h += ",cum_tasks_" + std::to_string(n);
  return h;
}

void write_episodes(std::ostream& out, const RunSummary& summary, int N) {
  out << episodes_header(N) << '\n';
  for (std::size_t i = 0; i < summary.episodes.size(); ++i) {
    const auto& e = summary.episodes[i];
    out << e.episode << ',' << e.slots << ',' << fmt(e.total_reward) << ','
        << fmt(e.average_reward) << ','
        << fmt(i < summary.moving_average.size() ? summary.moving_average[i] : 0.0) << ','
        << e.tasks << ',' << fmt(e.throughput_bits) << ',' << fmt(e.energy_used) << ','
        << fmt(e.final_battery) << ',' << fmt(e.epsilon) << ',' << e.table_keys << ','
        << e.replay_fill;
    for (int c : e.cum_tasks) out << ',' << c;
    out << '\n';
  }
}

std::string qos_header() { return "tu,qos_percent"; }

void write_qos_table(std::ostream& out, const RunSummary& summary) {
  out << qos_header() << '\n';
  for (std::size_t n = 0; n < summary.qos_percent.size(); ++n) {
    out << n << ',' << fmt(summary.qos_percent[n]) << '\n';
  }
}

std::string trajectory_header(int N) {
  return "t,uav_fpap,uav_x,uav_y,target_fpap,served_tu,mu,battery" + position_columns(N);
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& trace, int N) {
  out << trajectory_header(N) << '\n';
  for (const auto& p : trace) {
    out << p.t << ',' << p.uav_fpap << ',' << fmt(p.uav_position.x) << ','
        << fmt(p.uav_position.y) << ',' << p.target_fpap << ',' << p.served_tu << ',' << p.mu
        << ',' << fmt(p.battery);
    for (const auto& q : p.tu_positions) out << ',' << fmt(q.x) << ',' << fmt(q.y);
    out << '\n';
  }
}

std::string sweep_header() { return "value,agent,mean_sum_throughput_bits,mean_reward"; }

void write_sweep_row(std::ostream& out, const SweepRow& row) {
  out << row.value << ',' << row.agent << ',' << fmt(row.mean_throughput_bits) << ','
      << fmt(row.mean_reward) << '\n';
}

std::string summary_json(const RunSummary& summary) {
  nlohmann::ordered_json j;
  j["agent"] = summary.agent;
  j["seed"] = summary.seed;
  j["window"] = summary.window;
  j["episodes"] = summary.episodes.size();
  j["env_steps"] = summary.env_steps;
  j["mean_reward"] = summary.mean_reward();
  j["mean_throughput_bits"] = summary.mean_throughput();
  j["tail_mean_reward_500"] = summary.tail_mean_reward(500);
  j["qos_percent"] = summary.qos_percent;
  std::vector<double> avg;
  std::vector<int> slots;
  std::vector<double> thr;
  for (const auto& e : summary.episodes) {
    avg.push_back(e.average_reward);
    slots.push_back(e.slots);
    thr.push_back(e.throughput_bits);
  }
  j["average_reward"] = avg;
  j["moving_average"] = summary.moving_average;
  j["slots"] = slots;
  j["throughput_bits"] = thr;
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["out_dir"] = m.out_dir;
  j["options"] = m.options;
  j["config"] = m.config;
  j["files"] = m.files;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["wall_seconds"] = m.wall_seconds;
  return j.dump(2) + "\n";
}

std::string timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

}  // namespace uavmec::io
