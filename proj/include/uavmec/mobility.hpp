#pragma once

#include <span>
#include <vector>

#include "uavmec/config.hpp"
#include "uavmec/rng.hpp"

namespace uavmec {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

struct TuState {
  Point position;
  double velocity = 0.0;   // m/s
  double direction = 0.0;  // rad, in [0, 2pi)
  int cum_tasks = 0;
};

namespace mobility {

double wrap_angle(double theta);

/// Gauss-Markov velocity update with an explicit noise sample. Negative
/// results are clamped to zero.
double next_velocity(double velocity, const MobilityParams& p, double noise);
double step_velocity(const TuState& tu, const MobilityParams& p, Rng& rng);

/// Gauss-Markov direction update towards `theta_bar`, wrapped into [0, 2pi).
double next_direction(double direction, double theta_bar, const MobilityParams& p, double noise);
double step_direction(const TuState& tu, double theta_bar, const MobilityParams& p, Rng& rng);

struct Displacement {
  Point position;
  double direction = 0.0;
};

/// Moves a user for `dt` seconds along its current heading. A path leaving
/// the area is folded back at the violated wall (any number of times) and the
/// heading is mirrored for every reflection.
Displacement step_position(const TuState& tu, double dt, double area_width, double area_height);

/// Advances all users one slot: the position moves with the previous slot's
/// velocity and heading, then velocity and heading are resampled. Users are
/// processed in index order so the result is a pure function of the rng state.
void step_all(std::span<TuState> tus, std::span<const double> theta_bar,
              const MobilityParams& p, double dt, Rng& rng);

/// Uniform placement over the area with velocity v_bar and heading theta_bar.
std::vector<TuState> initial_states(std::span<const double> theta_bar, const MobilityParams& p,
                                    Rng& rng);

}  // namespace mobility
}  // namespace uavmec
