#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavmec {

/// Thrown when a configuration value is missing, malformed or out of range.
/// `field()` names the offending dotted key (e.g. "env.M").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Gauss-Markov mobility constants shared by all terminal users.
struct MobilityParams {
  double kappa1 = 0.9;  // velocity memory
  double kappa2 = 0.9;  // direction memory
  double v_bar = 1.0;   // m/s
  double phi_mean = 0.0;
  double phi_std = 1.0;  // m/s
  double psi_mean = 0.0;
  double psi_std = 0.2;  // rad
  double area_width = 1000.0;
  double area_height = 1000.0;
  // Per-user mean directions. Empty means "draw uniformly in [0, 2pi) on
  // every reset".
  std::vector<double> theta_bar;
};

enum class DecayUnit { kStep, kEpisode };

struct LearnConfig {
  double omega = 0.9;
  double lambda = 1e-3;
  double epsilon0 = 1.0;
  double epsilon_min = 0.1;
  double delta = 0.005;
  DecayUnit decay_unit = DecayUnit::kStep;
  int batch_size = 64;  // K
  int replay_capacity = 10000;
  int sync_interval = 200;
  int episodes = 1000;  // N_e
  std::vector<int> hidden = {128, 64};
  int moving_average_window = 100;
};

struct SimConfig {
  int N = 5;
  int M = 25;
  double area_width = 1000.0;
  double area_height = 1000.0;
  double H = 50.0;
  double B = 200e3;
  double V = 20.0;
  double P_f = 110.0;
  double P_h = 80.0;
  double P_t = 0.1;
  double sigma2 = 1e-14;  // -140 dB
  double rho0 = 1e-5;     // -50 dB
  double pathloss_exponent = 1.0;
  double bandwidth = 1e6;
  double gamma_c = 1e-27;
  double C = 1000.0;
  double f_c = 2e9;
  double N_b = 1e8;
  int mu_max = 10;
  double eta = 2.0;
  double beta = 10.0;
  int Z = 5;
  int start_fpap = -1;  // -1: grid centre
  bool qos_in_state = true;
  int max_slots = 10000;
  MobilityParams mobility;
  LearnConfig learning;
  std::uint64_t seed = 1;
};

/// Throws ConfigError naming the first invalid field.
void validate(const SimConfig& cfg);

/// Returns human-readable warnings (currently only QoS feasibility).
std::vector<std::string> feasibility_warnings(const SimConfig& cfg);

/// Integer square root of M; throws ConfigError("env.M") when M is not a
/// perfect square.
int grid_side(int M);

/// Sets one dotted key ("env.N", "mobility.kappa1", "learning.hidden", ...).
void set_field(SimConfig& cfg, const std::string& key, const std::string& value);

/// Flat key/value view of every field, values printed round-trip exact.
std::map<std::string, std::string> to_key_values(const SimConfig& cfg);

/// Parses `key = value` lines; `#` starts a comment. Keys are dotted and
/// may be grouped under `[section]` headers. Unknown keys are errors.
SimConfig parse_config(const std::string& text, SimConfig base = {});

SimConfig load_config(const std::string& path);

std::string to_config_text(const SimConfig& cfg);

/// Keeps the area fields of the environment and mobility model in sync.
void set_area(SimConfig& cfg, double width, double height);

}  // namespace uavmec
