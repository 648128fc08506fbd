#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hte/geom.hpp"

namespace hte {

constexpr int kLegs = 6;
constexpr int kSamples = 100;  // one controller period sampled every 0.01 s

/// Six ground-contact bits, bit (l - 1) for leg l. Text form lists leg 1 first.
class Pattern {
 public:
  constexpr Pattern() = default;
  constexpr explicit Pattern(std::uint8_t mask) : mask_(mask & 0x3f) {}

  static std::optional<Pattern> parse(std::string_view text);
  static std::array<Pattern, 64> all();

  constexpr std::uint8_t mask() const { return mask_; }
  /// leg in 1..6
  constexpr bool uses_leg(int leg) const { return (mask_ >> (leg - 1)) & 1u; }
  int count() const;
  std::string str() const;
  std::array<double, kLegs> bits() const;

  friend constexpr bool operator==(Pattern, Pattern) = default;
  friend constexpr auto operator<=>(Pattern, Pattern) = default;

 private:
  std::uint8_t mask_ = 0;
};

/// Set of legs blocked in the air.
class DamageSpec {
 public:
  constexpr DamageSpec() = default;
  static DamageSpec legs(std::initializer_list<int> blocked);
  /// Accepts none, leg1..leg6, middle-both.
  static std::optional<DamageSpec> parse(std::string_view name);
  /// The seven benchmark scenarios: each single leg, then both middle legs.
  static std::array<DamageSpec, 7> benchmark();

  constexpr bool blocked(int leg) const { return (mask_ >> (leg - 1)) & 1u; }
  constexpr std::uint8_t mask() const { return mask_; }
  constexpr bool none() const { return mask_ == 0; }
  std::string name() const;

  friend constexpr bool operator==(DamageSpec, DamageSpec) = default;

 private:
  constexpr explicit DamageSpec(std::uint8_t m) : mask_(m) {}
  std::uint8_t mask_ = 0;
};

/// Kinematic model constants. Every field can be overridden from the config file.
struct SimConstants {
  double stride = 0.13;             // foot travel per unit of motor-1 command
  int smoothing_window = 5;         // samples, circular moving average
  double contact_threshold = 0.3;   // load-bearing duty fraction
  double displacement_range = 0.6;  // per-second x/y normalisation half-range
  double yaw_range = 1.0;           // per-second yaw normalisation half-range, radians
  std::array<std::array<double, 2>, kLegs> anchors{{
      {0.5, 0.3}, {0.0, 0.35}, {-0.5, 0.3}, {0.5, -0.3}, {0.0, -0.35}, {-0.5, -0.3}}};

  static constexpr double dt = 0.01;

  /// FNV-1a over the constants printed with 17 significant digits.
  std::string fingerprint() const;
};

/// Open-loop controller of one leg: amplitude, phase and duty cycle for the
/// hip motor and for the two motors kept perpendicular to the ground.
struct LegParams {
  double a1 = 0, p1 = 0, d1 = 0, a2 = 0, p2 = 0, d2 = 0;

  static LegParams from(std::span<const double> g);
};

/// Smoothed motor commands over one period; motor 3 is the negation of motor 2.
struct LegSignals {
  std::array<double, kSamples> m1{};
  std::array<double, kSamples> m2{};

  double m3(int i) const { return -m2[static_cast<std::size_t>(i)]; }
};

LegSignals leg_signal(const LegParams& p, const SimConstants& c = {});

struct LegDescriptor {
  std::array<double, 3> bd{};  // height, swing distance, duty cycle
  double fitness = 0.0;
};

LegDescriptor leg_descriptor(const LegParams& p, const SimConstants& c = {});

struct StepOutcome {
  Pose2 displacement;
  Pattern contact;
  std::array<double, kLegs> duty{};
  double energy = 0.0;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Stance kinematics for the hexapod. Each load-bearing foot stays fixed on the
/// ground, and the body twist is the least-squares rigid motion that keeps the
/// stance feet fixed. Pseudo-inverses for all 64 stance sets are cached.
class HexapodModel {
 public:
  explicit HexapodModel(SimConstants c = {});

  StepOutcome gait_step(const std::array<LegSignals, kLegs>& legs, DamageSpec dmg = {}) const;
  StepOutcome gait_step(const std::array<LegParams, kLegs>& legs, DamageSpec dmg = {}) const;

  /// Maps a one-second displacement to the [0,1]^3 middle-layer descriptor.
  std::array<double, 3> normalize_step(const Pose2& d) const;
  Pose2 denormalize_step(std::span<const double> bd) const;

  const SimConstants& constants() const { return c_; }

 private:
  SimConstants c_;
  std::array<Eigen::Matrix<double, 3, kLegs>, 64> pinv_;
};

}  // namespace hte

namespace hte {

constexpr int kFlatGenes = kLegs * 6;

/// A flat repertoire controller: 36 genes, six per leg, run for three periods.
struct FlatOutcome {
  Pose2 displacement;  // after three seconds
  StepOutcome step;    // every one-second period is identical
};

FlatOutcome run_flat(const HexapodModel& model, std::span<const double> genotype, DamageSpec dmg = {});

}  // namespace hte
