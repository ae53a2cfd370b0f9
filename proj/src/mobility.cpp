#include "uavmec/mobility.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uavmec::mobility {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Fold {
  double coordinate;
  bool mirrored;
};

// Folds a 1-D coordinate into [0, extent] by repeated reflection.
Fold fold(double x, double extent) {
  if (x >= 0.0 && x <= extent) return {x, false};
  const double k = std::floor(x / extent);
  const double r = x - k * extent;
  const bool odd = std::fmod(std::abs(k), 2.0) == 1.0;
  return {odd ? extent - r : r, odd};
}

}  // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double next_velocity(double velocity, const MobilityParams& p, double noise) {
  const double k = p.kappa1;
  const double v = k * velocity + (1.0 - k) * p.v_bar + std::sqrt(1.0 - k * k) * noise;
  return std::max(0.0, v);
}

double step_velocity(const TuState& tu, const MobilityParams& p, Rng& rng) {
  std::normal_distribution<double> phi(p.phi_mean, p.phi_std);
  const double noise = p.phi_std > 0.0 ? phi(rng) : p.phi_mean;
  return next_velocity(tu.velocity, p, noise);
}

double next_direction(double direction, double theta_bar, const MobilityParams& p,
                      double noise) {
  const double k = p.kappa2;
  return wrap_angle(k * direction + (1.0 - k) * theta_bar + std::sqrt(1.0 - k * k) * noise);
}

double step_direction(const TuState& tu, double theta_bar, const MobilityParams& p, Rng& rng) {
  std::normal_distribution<double> psi(p.psi_mean, p.psi_std);
  const double noise = p.psi_std > 0.0 ? psi(rng) : p.psi_mean;
  return next_direction(tu.direction, theta_bar, p, noise);
}

Displacement step_position(const TuState& tu, double dt, double area_width,
                           double area_height) {
  const double raw_x = tu.position.x + tu.velocity * std::cos(tu.direction) * dt;
  const double raw_y = tu.position.y + tu.velocity * std::sin(tu.direction) * dt;
  const Fold fx = fold(raw_x, area_width);
  const Fold fy = fold(raw_y, area_height);
  double theta = tu.direction;
  if (fx.mirrored) theta = std::numbers::pi - theta;
  if (fy.mirrored) theta = -theta;
  return {{fx.coordinate, fy.coordinate}, wrap_angle(theta)};
}

void step_all(std::span<TuState> tus, std::span<const double> theta_bar,
              const MobilityParams& p, double dt, Rng& rng) {
  if (theta_bar.size() != tus.size()) {
    throw std::invalid_argument("step_all: one mean direction per user required");
  }
  for (std::size_t n = 0; n < tus.size(); ++n) {
    TuState& tu = tus[n];
    const Displacement moved = step_position(tu, dt, p.area_width, p.area_height);
    tu.position = moved.position;
    tu.direction = moved.direction;
    tu.velocity = step_velocity(tu, p, rng);
    tu.direction = step_direction(tu, theta_bar[n], p, rng);
  }
}

std::vector<TuState> initial_states(std::span<const double> theta_bar, const MobilityParams& p,
                                    Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, p.area_width);
  std::uniform_real_distribution<double> uy(0.0, p.area_height);
  std::vector<TuState> out(theta_bar.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n].position.x = ux(rng);
    out[n].position.y = uy(rng);
    out[n].velocity = p.v_bar;
    out[n].direction = wrap_angle(theta_bar[n]);
    out[n].cum_tasks = 0;
  }
  return out;
}

}  // namespace uavmec::mobility
