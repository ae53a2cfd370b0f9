#pragma once

#include <optional>
#include <vector>

#include "uavmec/config.hpp"
#include "uavmec/mobility.hpp"
#include "uavmec/rng.hpp"

namespace uavmec {

struct UavState {
  int fpap_index = 0;
  Point position;
  double battery = 0.0;  // J, may be negative after the final slot
};

/// Joint decision for one slot: serve user `tu` from hover point `fpap`.
struct Action {
  int tu = 0;
  int fpap = 0;

  int flat(int M) const { return tu * M + fpap; }
  static Action from_flat(int id, int M) { return {id / M, id % M}; }
};

inline bool operator==(const Action& a, const Action& b) {
  return a.tu == b.tu && a.fpap == b.fpap;
}

struct EnergyBreakdown {
  double flying = 0.0;     // e_f
  double hovering = 0.0;   // e_h
  double computing = 0.0;  // e_c
  double total = 0.0;      // W = e_f + e_h + e_c
};

struct StepOutcome {
  double reward = 0.0;
  int mu_served = 0;
  EnergyBreakdown energy;
  double t_fly = 0.0;
  double t_hover = 0.0;
  double t_comp = 0.0;
  double duration = 0.0;  // slot length, s
  double rate = 0.0;      // uplink bits/s of the served user
  double battery_before = 0.0;
  double battery_after = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

struct TimedEnergy {
  double energy = 0.0;  // J
  double time = 0.0;    // s
};

// Closed-form pieces of the slot model. All of them are pure functions of the
// configuration.
Point fpap_position(int m, const SimConfig& cfg);
double horizontal_distance(const Point& a, const Point& b);
double channel_gain(const Point& tu, const Point& uav, const SimConfig& cfg);
double uplink_rate(const Point& tu, const Point& uav, const SimConfig& cfg);
TimedEnergy flying_energy(int from_fpap, int to_fpap, const SimConfig& cfg);
TimedEnergy hovering_energy(int mu, double rate, const SimConfig& cfg);
TimedEnergy computing_energy(int mu, const SimConfig& cfg);
double utility(double mu, const SimConfig& cfg);

/// Worst-case energy of any single slot: a corner-to-corner flight, mu_max
/// tasks at the lowest reachable rate, and mu_max tasks of computing.
double worst_case_slot_energy(const SimConfig& cfg);
/// 1 / worst_case_slot_energy.
double psi_normalizer(const SimConfig& cfg);

int default_start_fpap(const SimConfig& cfg);

/// Single-UAV world. Owns the user and UAV state for one episode at a time;
/// not thread-safe, but independent instances share nothing.
class Environment {
 public:
  explicit Environment(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  int num_actions() const { return cfg_.N * cfg_.M; }
  int state_size() const;

  /// Starts a new episode and returns the encoded initial state.
  std::vector<double> reset(Rng& rng);

  /// Advances one slot, drawing the task count uniformly in [0, mu_max].
  StepOutcome step(const Action& action, Rng& rng);
  /// Same as step() with the served task count fixed by the caller.
  StepOutcome step_with_tasks(const Action& action, int mu, Rng& rng);

  std::vector<double> encode_state() const;
  /// Users whose cumulative tasks are still below Z, ascending.
  std::vector<int> qos_unmet() const;

  bool terminal() const { return terminal_; }
  /// True once the battery is exhausted or the slot cap is reached.
  bool done() const { return terminal_ || slot_ >= cfg_.max_slots; }
  int slot() const { return slot_; }
  double psi() const { return psi_; }

  const UavState& uav() const { return uav_; }
  const std::vector<TuState>& users() const { return tus_; }
  const std::vector<double>& mean_directions() const { return theta_bar_; }

  // Test hooks for placing the world in a known configuration.
  void set_battery(double b) { uav_.battery = b; }
  void set_user(int n, const TuState& tu) { tus_.at(static_cast<std::size_t>(n)) = tu; }
  void set_uav_fpap(int m);

 private:
  SimConfig cfg_;
  double psi_ = 0.0;
  UavState uav_;
  std::vector<TuState> tus_;
  std::vector<double> theta_bar_;
  int slot_ = 0;
  bool terminal_ = false;
};

std::vector<int> qos_unmet_set(const std::vector<TuState>& tus, int Z);

}  // namespace uavmec
