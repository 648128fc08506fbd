#pragma once

#include <numbers>

namespace hte {

constexpr double kPi = std::numbers::pi;

/// Planar rigid-body pose. Units are body lengths; yaw is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument for non-finite input.
double wrap_angle(double a);

/// Returns a followed by b, where b is expressed in the frame of a.
Pose2 se2_compose(const Pose2& a, const Pose2& b);

Pose2 se2_inverse(const Pose2& p);

/// Negated angular distance between the final heading of `d` and the heading
/// an ideal circular arc from the origin (initial heading +x) would have at
/// the same endpoint. Zero means the displacement lies exactly on such an arc.
double circular_fitness(const Pose2& d);

}  // namespace hte
