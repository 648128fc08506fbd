#include "hte/geom.hpp"

#include <cmath>
#include <stdexcept>

namespace hte {

double wrap_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("wrap_angle: non-finite angle");
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

Pose2 se2_compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.yaw);
  const double s = std::sin(a.yaw);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, wrap_angle(a.yaw + b.yaw)};
}

Pose2 se2_inverse(const Pose2& p) {
  const double c = std::cos(p.yaw);
  const double s = std::sin(p.yaw);
  return {-c * p.x - s * p.y, s * p.x - c * p.y, wrap_angle(-p.yaw)};
}

double circular_fitness(const Pose2& d) {
  if (d.x == 0.0 && d.y == 0.0) return -std::abs(wrap_angle(d.yaw));
  const double ideal = 2.0 * std::atan2(d.y, d.x);
  return -std::abs(wrap_angle(d.yaw - ideal));
}

}  // namespace hte
