#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hte/geom.hpp"
#include "hte/rng.hpp"

using namespace hte;

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2.0 * kPi));
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(wrap_angle(std::numeric_limits<double>::infinity()), std::invalid_argument);

  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    const double turns = (a - w) / (2.0 * kPi);
    CHECK(std::abs(turns - std::round(turns)) < 1e-9);
  }
}

TEST_CASE("composition against hand-worked values") {
  // Quarter turn then one unit forward ends up one unit along +y.
  const Pose2 p = se2_compose({0, 0, kPi / 2}, {1, 0, 0});
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(1.0));
  CHECK(p.yaw == doctest::Approx(kPi / 2));

  const Pose2 q = se2_compose({1, 2, kPi}, {0.5, -1, kPi / 2});
  CHECK(q.x == doctest::Approx(0.5));
  CHECK(q.y == doctest::Approx(3.0));
  CHECK(q.yaw == doctest::Approx(-kPi / 2));
}

TEST_CASE("inverse and associativity hold for random poses") {
  Rng rng(11);
  auto draw = [&] { return Pose2{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-kPi, kPi)}; };
  for (int i = 0; i < 500; ++i) {
    const Pose2 a = draw(), b = draw(), c = draw();
    const Pose2 id = se2_compose(a, se2_inverse(a));
    CHECK(std::abs(id.x) < 1e-12);
    CHECK(std::abs(id.y) < 1e-12);
    CHECK(std::abs(id.yaw) < 1e-12);
    const Pose2 l = se2_compose(se2_compose(a, b), c);
    const Pose2 r = se2_compose(a, se2_compose(b, c));
    CHECK(l.x == doctest::Approx(r.x).epsilon(1e-12));
    CHECK(l.y == doctest::Approx(r.y).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(l.yaw - r.yaw)) < 1e-12);
  }
}

TEST_CASE("circular fitness is zero on arcs through the origin") {
  CHECK(circular_fitness({1.0, 0.0, 0.0}) == 0.0);
  // Quarter circle of radius 1 centred at (0, 1): ends at (1, 1) heading +y.
  CHECK(circular_fitness({1.0, 1.0, kPi / 2}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(circular_fitness({1.0, 0.0, 0.5}) == doctest::Approx(-0.5));
  CHECK(circular_fitness({0.0, 0.0, -0.25}) == doctest::Approx(-0.25));

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    // Any endpoint on a circle through the origin tangent to +x, with the arc's heading.
    const double radius = rng.uniform(0.3, 4.0) * (rng.uniform() < 0.5 ? -1 : 1);
    const double theta = rng.uniform(-2.5, 2.5);
    const Pose2 d{radius * std::sin(theta), radius * (1 - std::cos(theta)), wrap_angle(theta)};
    CHECK(circular_fitness(d) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(circular_fitness({d.x, d.y, wrap_angle(d.yaw + 0.3)}) == doctest::Approx(-0.3));
  }
}
