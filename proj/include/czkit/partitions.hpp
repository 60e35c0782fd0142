#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "report.hpp"

namespace czkit {

/// The order gamma as used by the partition construction: an exact
/// rational p/q, or a named irrational (pi, e, sqrt2) held in extended
/// precision. Comparisons of m*gamma against integers are exact for
/// rationals; for irrationals they use a guard band of 1e-9 and throw
/// DomainError inside it.
class Order {
 public:
  /// "1.5", "37/10", "pi", "e", "sqrt2".
  static Order parse(std::string_view text);
  /// Shortest decimal form of v, read back as an exact rational.
  static Order from_double(double v);
  static Order rational(std::int64_t p, std::int64_t q);

  double value() const { return static_cast<double>(value_); }
  bool is_rational() const { return rational_; }
  std::int64_t num() const { return p_; }
  std::int64_t den() const { return q_; }
  const std::string& label() const { return label_; }

  /// floor(gamma).
  std::int64_t floor() const { return floor_times(1); }
  /// floor(m * gamma).
  std::int64_t floor_times(std::int64_t m) const;
  /// Sign of m*gamma - c.
  int compare(std::int64_t m, std::int64_t c) const;
  /// m*gamma - c as a double (exact up to the final rounding for rationals).
  double offset(std::int64_t m, std::int64_t c) const;

 private:
  bool rational_ = true;
  std::int64_t p_ = 0, q_ = 1;
  long double value_ = 0;
  std::string label_;
};

enum class Direction { finer, coarser };

/// State of the division-merger recursion at one level. E is the time
/// exponent (time side 2^{-E}); k is the count of time halvings that links
/// this level to its neighbour towards level 0 (0 at m = 0).
struct LevelState {
  std::int64_t m = 0;
  std::int64_t E = 0;
  int k = 0;
};

/// One step of the recursion: finer goes m -> m+1, coarser m -> m-1.
/// finer:   k = floor(g) if m' g - E < floor(g) + 1, else floor(g) + 1; E' = E + k.
/// coarser: k = floor(g) if m' g - E >= -floor(g), else floor(g) + 1; E' = E - k.
LevelState advance(const Order& gamma, const LevelState& s, Direction dir);

/// A cube of level m: [i0 2^{-E_m}, (i0+1) 2^{-E_m}) x prod [i_j 2^{-m}, (i_j+1) 2^{-m}).
struct Cube {
  std::int64_t m = 0;
  std::int64_t i0 = 0;
  std::array<std::int64_t, 3> idx{};
  int dim = 1;

  bool operator==(const Cube&) const = default;
};

/// Half-open real box [t0, t1) x prod [lo_j, hi_j).
struct Box {
  double t0 = 0, t1 = 0;
  std::array<double, 3> lo{}, hi{};
  int dim = 1;

  double volume() const;
  bool contains(double t, std::span<const double> x) const;
  /// Closure of `inner` lies in this box's half-open interior sense:
  /// lo <= inner.lo and inner.hi < hi on every axis (time included).
  bool contains_closure(const Box& inner) const;
};

/// The filtration (Q_m, m in Z) for a fixed order and dimension. Levels
/// |m| <= kMaxLevel are precomputed by iterating `advance` from m = 0.
class Filtration {
 public:
  static constexpr std::int64_t kMaxLevel = 64;

  Filtration(Order gamma, int dim);

  const Order& gamma() const { return gamma_; }
  int dim() const { return dim_; }

  std::int64_t E(std::int64_t m) const;
  /// E_m - E_{m-1}: time halvings from the parent level.
  int k(std::int64_t m) const;
  /// tau_m = 2^{m gamma - E_m}.
  double tau(std::int64_t m) const;
  double time_side(std::int64_t m) const;
  /// |parent| / |cube| = 2^{d + E_m - E_{m-1}}.
  double regularity_ratio(std::int64_t m) const;
  /// 2^{d + floor(gamma) + 1}.
  double regularity_bound() const;

  Cube locate(double t, std::span<const double> x, std::int64_t m) const;
  std::vector<Cube> children(const Cube& q) const;
  Cube parent(const Cube& q) const;
  Box box(const Cube& q) const;
  /// Q* = [t0, t0 + 4 * 2^{-m gamma}) x prod [x_j - 2 * 2^{-m}, x_j + 2 * 2^{-m})
  /// with (t0, x) the lower corner of q.
  Box dilate(const Cube& q) const;

 private:
  Order gamma_;
  int dim_;
  std::vector<std::int64_t> E_;  // E_[m + kMaxLevel]
};

/// The time-only filtration with intervals [4^{-m} i, 4^{-m}(i + 1)).
struct TimeInterval {
  std::int64_t m = 0;
  std::int64_t i = 0;
  bool operator==(const TimeInterval&) const = default;
};

struct TimeFiltration {
  static double side(std::int64_t m);
  static TimeInterval locate(double t, std::int64_t m);
  static std::vector<TimeInterval> children(const TimeInterval& q);
  static TimeInterval parent(const TimeInterval& q);
  /// [t0, t1).
  static std::array<double, 2> bounds(const TimeInterval& q);
  /// [t0 - 2 delta, t0 + 2 delta) with delta = 4^{-m}.
  static std::array<double, 2> dilate(const TimeInterval& q);
};

/// CSV trace over levels [m_lo, m_hi]: m, k_m, E_m, tau_m, time_side,
/// regularity_ratio. Passes iff every row satisfies 1 <= tau < 2,
/// k in {floor(g), floor(g)+1} and ratio <= the regularity bound.
EstimateReport partition_trace(const Filtration& f, std::int64_t m_lo, std::int64_t m_hi);

}  // namespace czkit
