#include "uavmec/environment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace uavmec {

Point fpap_position(int m, const SimConfig& cfg) {
  if (m < 0 || m >= cfg.M) {
    throw std::out_of_range("fpap index " + std::to_string(m) + " outside [0, " +
                            std::to_string(cfg.M) + ")");
  }
  const int side = grid_side(cfg.M);
  const double sx = cfg.area_width / side;
  const double sy = cfg.area_height / side;
  const int row = m / side;
  const int col = m % side;
  return {(col + 0.5) * sx, (row + 0.5) * sy};
}

double horizontal_distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double channel_gain(const Point& tu, const Point& uav, const SimConfig& cfg) {
  const double dx = uav.x - tu.x;
  const double dy = uav.y - tu.y;
  const double d = std::sqrt(cfg.H * cfg.H + dx * dx + dy * dy);
  return cfg.rho0 / std::pow(d, cfg.pathloss_exponent);
}

double uplink_rate(const Point& tu, const Point& uav, const SimConfig& cfg) {
  const double snr = cfg.P_t * channel_gain(tu, uav, cfg) / cfg.sigma2;
  return cfg.bandwidth * std::log2(1.0 + snr);
}

TimedEnergy flying_energy(int from_fpap, int to_fpap, const SimConfig& cfg) {
  if (from_fpap == to_fpap) return {0.0, 0.0};
  const double d = horizontal_distance(fpap_position(from_fpap, cfg), fpap_position(to_fpap, cfg));
  const double t = d / cfg.V;
  return {cfg.P_f * t, t};
}

TimedEnergy hovering_energy(int mu, double rate, const SimConfig& cfg) {
  if (!(rate > 0.0)) throw std::logic_error("hovering_energy: non-positive uplink rate");
  if (mu < 0) throw std::invalid_argument("hovering_energy: negative task count");
  const double t = mu * cfg.N_b / rate;
  return {cfg.P_h * t, t};
}

TimedEnergy computing_energy(int mu, const SimConfig& cfg) {
  if (mu < 0) throw std::invalid_argument("computing_energy: negative task count");
  const double bits = mu * cfg.N_b;
  return {cfg.gamma_c * cfg.C * cfg.f_c * cfg.f_c * bits, cfg.C * bits / cfg.f_c};
}

double utility(double mu, const SimConfig& cfg) {
  if (mu <= 0.0) return 0.0;
  return 1.0 - std::exp(-std::pow(mu, cfg.eta) / (mu + cfg.beta));
}

double worst_case_slot_energy(const SimConfig& cfg) {
  const int side = grid_side(cfg.M);
  const double sx = cfg.area_width / side;
  const double sy = cfg.area_height / side;
  const double diag = std::hypot((side - 1) * sx, (side - 1) * sy);
  const double fly = cfg.P_f * diag / cfg.V;

  // Farthest user/hover-point pair: user in one corner of the area, UAV over
  // the hover point in the opposite corner of the grid.
  double hover = 0.0;
  if (cfg.P_h > 0.0) {
    const Point corner{0.0, 0.0};
    const Point far_fpap{cfg.area_width - sx / 2.0, cfg.area_height - sy / 2.0};
    const double r_min = uplink_rate(corner, far_fpap, cfg);
    hover = cfg.P_h * cfg.mu_max * cfg.N_b / r_min;
  }
  const double compute = computing_energy(cfg.mu_max, cfg).energy;
  return fly + hover + compute;
}

double psi_normalizer(const SimConfig& cfg) { return 1.0 / worst_case_slot_energy(cfg); }

int default_start_fpap(const SimConfig& cfg) {
  if (cfg.start_fpap >= 0) return cfg.start_fpap;
  const int side = grid_side(cfg.M);
  return (side / 2) * side + side / 2;
}

std::vector<int> qos_unmet_set(const std::vector<TuState>& tus, int Z) {
  std::vector<int> out;
  for (std::size_t n = 0; n < tus.size(); ++n) {
    if (tus[n].cum_tasks < Z) out.push_back(static_cast<int>(n));
  }
  return out;
}

Environment::Environment(SimConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  psi_ = psi_normalizer(cfg_);
  tus_.resize(static_cast<std::size_t>(cfg_.N));
  theta_bar_.assign(static_cast<std::size_t>(cfg_.N), 0.0);
  set_uav_fpap(default_start_fpap(cfg_));
  uav_.battery = cfg_.B;
}

int Environment::state_size() const { return cfg_.qos_in_state ? 3 * cfg_.N + 3 : 2 * cfg_.N + 3; }

void Environment::set_uav_fpap(int m) {
  uav_.position = fpap_position(m, cfg_);
  uav_.fpap_index = m;
}

std::vector<double> Environment::reset(Rng& rng) {
  if (cfg_.mobility.theta_bar.empty()) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (auto& th : theta_bar_) th = angle(rng);
  } else {
    theta_bar_ = cfg_.mobility.theta_bar;
  }
  tus_ = mobility::initial_states(theta_bar_, cfg_.mobility, rng);
  set_uav_fpap(default_start_fpap(cfg_));
  uav_.battery = cfg_.B;
  slot_ = 0;
  terminal_ = false;
  return encode_state();
}

StepOutcome Environment::step(const Action& action, Rng& rng) {
  std::uniform_int_distribution<int> tasks(0, cfg_.mu_max);
  const int mu = tasks(rng);
  return step_with_tasks(action, mu, rng);
}

StepOutcome Environment::step_with_tasks(const Action& action, int mu, Rng& rng) {
  if (terminal_) throw std::logic_error("Environment::step called on a terminal episode");
  if (action.tu < 0 || action.tu >= cfg_.N || action.fpap < 0 || action.fpap >= cfg_.M) {
    throw std::out_of_range("Environment::step: action outside the action space");
  }
  if (mu < 0) throw std::invalid_argument("Environment::step: negative task count");

  StepOutcome out;
  const TimedEnergy fly = flying_energy(uav_.fpap_index, action.fpap, cfg_);
  set_uav_fpap(action.fpap);

  TuState& served = tus_[static_cast<std::size_t>(action.tu)];
  out.rate = uplink_rate(served.position, uav_.position, cfg_);
  const TimedEnergy hover = hovering_energy(mu, out.rate, cfg_);
  const TimedEnergy comp = computing_energy(mu, cfg_);

  out.mu_served = mu;
  out.energy.flying = fly.energy;
  out.energy.hovering = hover.energy;
  out.energy.computing = comp.energy;
  out.energy.total = fly.energy + hover.energy + comp.energy;
  out.t_fly = fly.time;
  out.t_hover = hover.time;
  out.t_comp = comp.time;
  out.duration = fly.time + hover.time + comp.time;

  out.battery_before = uav_.battery;
  uav_.battery = uav_.battery - out.energy.total;
  out.battery_after = uav_.battery;

  out.reward = utility(mu, cfg_) - psi_ * out.energy.total;

  mobility::step_all(tus_, theta_bar_, cfg_.mobility, out.duration, rng);
  served.cum_tasks += mu;

  ++slot_;
  terminal_ = uav_.battery <= 0.0;
  out.terminal = terminal_;
  out.next_state = encode_state();
  return out;
}

std::vector<double> Environment::encode_state() const {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(state_size()));
  for (const auto& tu : tus_) {
    s.push_back(tu.position.x / cfg_.area_width);
    s.push_back(tu.position.y / cfg_.area_height);
  }
  s.push_back(uav_.position.x / cfg_.area_width);
  s.push_back(uav_.position.y / cfg_.area_height);
  s.push_back(uav_.battery / cfg_.B);
  if (cfg_.qos_in_state) {
    for (const auto& tu : tus_) {
      s.push_back(cfg_.Z > 0 ? std::min(static_cast<double>(tu.cum_tasks) / cfg_.Z, 1.0) : 1.0);
    }
  }
  return s;
}

std::vector<int> Environment::qos_unmet() const { return qos_unmet_set(tus_, cfg_.Z); }

}  // namespace uavmec
