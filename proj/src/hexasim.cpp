#include "hte/hexasim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>

namespace hte {
constexpr int kMinStance = 1;

std::optional<Pattern> Pattern::parse(std::string_view text) {
  if (text.size() != kLegs) return std::nullopt;
  std::uint8_t m = 0;
  for (int l = 0; l < kLegs; ++l) {
    const char ch = text[static_cast<std::size_t>(l)];
    if (ch == '1') m |= static_cast<std::uint8_t>(1u << l);
    else if (ch != '0') return std::nullopt;
  }
  return Pattern(m);
}

std::array<Pattern, 64> Pattern::all() {
  std::array<Pattern, 64> out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Pattern(static_cast<std::uint8_t>(i));
  return out;
}

int Pattern::count() const { return std::popcount(mask_); }

std::string Pattern::str() const {
  std::string s(kLegs, '0');
  for (int l = 0; l < kLegs; ++l)
    if (uses_leg(l + 1)) s[static_cast<std::size_t>(l)] = '1';
  return s;
}

std::array<double, kLegs> Pattern::bits() const {
  std::array<double, kLegs> b{};
  for (int l = 0; l < kLegs; ++l) b[static_cast<std::size_t>(l)] = uses_leg(l + 1) ? 1.0 : 0.0;
  return b;
}

DamageSpec DamageSpec::legs(std::initializer_list<int> blocked) {
  std::uint8_t m = 0;
  for (int l : blocked) {
    if (l < 1 || l > kLegs) throw std::invalid_argument("DamageSpec: leg index out of range");
    m |= static_cast<std::uint8_t>(1u << (l - 1));
  }
  return DamageSpec(m);
}

std::optional<DamageSpec> DamageSpec::parse(std::string_view name) {
  if (name == "none") return DamageSpec{};
  if (name == "middle-both") return legs({2, 5});
  if (name.size() == 4 && name.substr(0, 3) == "leg" && name[3] >= '1' && name[3] <= '6')
    return legs({name[3] - '0'});
  return std::nullopt;
}

std::array<DamageSpec, 7> DamageSpec::benchmark() {
  return {legs({1}), legs({2}), legs({3}), legs({4}), legs({5}), legs({6}), legs({2, 5})};
}

std::string DamageSpec::name() const {
  if (mask_ == 0) return "none";
  if (mask_ == 0b010010) return "middle-both";
  if (std::popcount(mask_) == 1) return "leg" + std::to_string(std::countr_zero(mask_) + 1);
  std::string s = "legs";
  for (int l = 1; l <= kLegs; ++l)
    if (blocked(l)) s += std::to_string(l);
  return s;
}

std::string SimConstants::fingerprint() const {
  std::string text;
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    text += buf;
  };
  put(stride);
  put(smoothing_window);
  put(contact_threshold);
  put(displacement_range);
  put(yaw_range);
  for (const auto& a : anchors) {
    put(a[0]);
    put(a[1]);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LegParams LegParams::from(std::span<const double> g) {
  if (g.size() != 6) throw std::invalid_argument("LegParams: need 6 values");
  return {g[0], g[1], g[2], g[3], g[4], g[5]};
}

namespace {

std::array<double, kSamples> smoothed_square(double a, double p, double d, int window) {
  std::array<double, kSamples> raw{};
  for (int i = 0; i < kSamples; ++i) {
    const double t = i * SimConstants::dt + p;
    const double frac = t - std::floor(t);
    raw[static_cast<std::size_t>(i)] = frac < d ? a : -a;
  }
  std::array<double, kSamples> out{};
  const int half = window / 2;
  for (int i = 0; i < kSamples; ++i) {
    double s = 0.0;
    for (int k = -half; k <= half; ++k) s += raw[static_cast<std::size_t>((i + k + kSamples) % kSamples)];
    out[static_cast<std::size_t>(i)] = s / (2 * half + 1);
  }
  return out;
}

}  // namespace

LegSignals leg_signal(const LegParams& p, const SimConstants& c) {
  if (c.smoothing_window < 1 || c.smoothing_window % 2 == 0)
    throw std::invalid_argument("smoothing window must be a positive odd sample count");
  return {smoothed_square(p.a1, p.p1, p.d1, c.smoothing_window),
          smoothed_square(p.a2, p.p2, p.d2, c.smoothing_window)};
}

LegDescriptor leg_descriptor(const LegParams& p, const SimConstants& c) {
  const LegSignals s = leg_signal(p, c);
  const auto [m1min, m1max] = std::minmax_element(s.m1.begin(), s.m1.end());
  const double m2max = *std::max_element(s.m2.begin(), s.m2.end());
  double effort = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const auto k = static_cast<std::size_t>(i);
    effort += std::abs(s.m1[k]) + std::abs(s.m2[k]) + std::abs(s.m3(i));
  }
  LegDescriptor out;
  out.bd = {(m2max + 1.0) / 2.0, (*m1max - *m1min) / 2.0, p.d2};
  out.fitness = -effort / (3.0 * kSamples);
  return out;
}

HexapodModel::HexapodModel(SimConstants c) : c_(c) {
  for (int mask = 0; mask < 64; ++mask) {
    auto& P = pinv_[static_cast<std::size_t>(mask)];
    P.setZero();
    const int k = std::popcount(static_cast<unsigned>(mask));
    if (k < kMinStance) continue;
    // Rows: vx - w*ry = -fdot, vy + w*rx = 0 for every stance leg.
    Eigen::MatrixXd A(2 * k, 3);
    std::array<int, kLegs> legs{};
    int r = 0;
    for (int l = 0; l < kLegs; ++l) {
      if (!((mask >> l) & 1)) continue;
      const double rx = c_.anchors[static_cast<std::size_t>(l)][0];
      const double ry = c_.anchors[static_cast<std::size_t>(l)][1];
      A.row(2 * r) << 1.0, 0.0, -ry;
      A.row(2 * r + 1) << 0.0, 1.0, rx;
      legs[static_cast<std::size_t>(r)] = l;
      ++r;
    }
    const Eigen::MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();
    for (int j = 0; j < k; ++j) P.col(legs[static_cast<std::size_t>(j)]) = pinv.col(2 * j);
  }
}

StepOutcome HexapodModel::gait_step(const std::array<LegSignals, kLegs>& legs, DamageSpec dmg) const {
  StepOutcome out;
  std::uint8_t load_bearing = 0;
  std::array<std::array<bool, kSamples>, kLegs> touch{};
  for (int l = 0; l < kLegs; ++l) {
    const auto& s = legs[static_cast<std::size_t>(l)];
    int n = 0;
    for (int i = 0; i < kSamples; ++i) {
      const bool t = s.m2[static_cast<std::size_t>(i)] < 0.0;
      touch[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] = t;
      n += t;
      out.energy += std::abs(s.m1[static_cast<std::size_t>(i)]) + 2.0 * std::abs(s.m2[static_cast<std::size_t>(i)]);
    }
    const double frac = static_cast<double>(n) / kSamples;
    // A foot down for no more than the threshold never carries load; a blocked leg never touches.
    if (!dmg.blocked(l + 1) && frac > c_.contact_threshold) {
      load_bearing |= static_cast<std::uint8_t>(1u << l);
      out.duty[static_cast<std::size_t>(l)] = frac;
    }
  }
  out.energy /= kSamples;
  out.contact = Pattern(load_bearing);

  const double dt = SimConstants::dt;
  double x = 0.0, y = 0.0, yaw = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto next = static_cast<std::size_t>((i + 1) % kSamples);
    unsigned stance = 0;
    for (int l = 0; l < kLegs; ++l)
      if (((load_bearing >> l) & 1u) && touch[static_cast<std::size_t>(l)][k]) stance |= 1u << l;
    if (stance == 0) continue;
    const auto& P = pinv_[stance];
    double vx = 0.0, vy = 0.0, w = 0.0;
    for (int l = 0; l < kLegs; ++l) {
      if (!((stance >> l) & 1u)) continue;
      const auto& m1 = legs[static_cast<std::size_t>(l)].m1;
      const double fdot = c_.stride * (m1[next] - m1[k]) / dt;
      if (fdot == 0.0) continue;
      vx += P(0, l) * -fdot;
      vy += P(1, l) * -fdot;
      w += P(2, l) * -fdot;
    }
    if (vx == 0.0 && vy == 0.0 && w == 0.0) continue;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    x += (c * vx - s * vy) * dt;
    y += (s * vx + c * vy) * dt;
    yaw = wrap_angle(yaw + w * dt);
  }
  out.displacement = {x, y, yaw};
  return out;
}

StepOutcome HexapodModel::gait_step(const std::array<LegParams, kLegs>& legs, DamageSpec dmg) const {
  std::array<LegSignals, kLegs> signals;
  for (std::size_t l = 0; l < signals.size(); ++l) signals[l] = leg_signal(legs[l], c_);
  return gait_step(signals, dmg);
}

std::array<double, 3> HexapodModel::normalize_step(const Pose2& d) const {
  const double r = c_.displacement_range;
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {unit((d.x + r) / (2.0 * r)), unit((d.y + r) / (2.0 * r)), unit((d.yaw + c_.yaw_range) / (2.0 * c_.yaw_range))};
}

Pose2 HexapodModel::denormalize_step(std::span<const double> bd) const {
  const double r = c_.displacement_range;
  return {bd[0] * 2.0 * r - r, bd[1] * 2.0 * r - r, bd[2] * 2.0 * c_.yaw_range - c_.yaw_range};
}

}  // namespace hte

namespace hte {

FlatOutcome run_flat(const HexapodModel& model, std::span<const double> genotype, DamageSpec dmg) {
  if (genotype.size() != static_cast<std::size_t>(kFlatGenes))
    throw std::invalid_argument("run_flat: genotype must have 36 values");
  std::array<LegParams, kLegs> legs;
  for (std::size_t l = 0; l < legs.size(); ++l) legs[l] = LegParams::from(genotype.subspan(6 * l, 6));
  FlatOutcome out;
  out.step = model.gait_step(legs, dmg);
  const Pose2& d = out.step.displacement;
  out.displacement = se2_compose(se2_compose(d, d), d);
  return out;
}

}  // namespace hte
