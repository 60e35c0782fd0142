#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grid.hpp"
#include "partitions.hpp"
#include "report.hpp"
#include "symbols.hpp"

namespace czkit {

/// Integral of psi(r, xi) over r in [a, b]: the exact sum over schedule
/// pieces of overlap length times the piece value.
cplx time_integral(const SymbolSpec& s, double a, double b, const Vec& xi);

/// psi sampled once per schedule piece on every mode of a grid, plus the
/// per-mode data the kernel routines reuse. Immutable after construction.
class SymbolTable {
 public:
  SymbolTable(const SymbolSpec& s, const SpatialGrid& g);

  const SymbolSpec& symbol() const { return s_; }
  const SpatialGrid& grid() const { return g_; }
  const std::vector<cplx>& piece(std::size_t p) const { return psi_[p]; }
  /// |xi|^gamma per mode (0 at xi = 0).
  const std::vector<double>& order_weight() const { return weight_; }
  const std::vector<Vec>& frequencies() const { return xi_; }

  /// (piece, overlap length) pairs covering [a, b]; DomainError if [a, b]
  /// leaves the schedule.
  std::vector<std::pair<std::size_t, double>> overlaps(double a, double b) const;
  /// Integral of psi over [a, b] on every mode.
  void integral(double a, double b, std::vector<cplx>& out) const;

 private:
  SymbolSpec s_;
  SpatialGrid g_;
  std::vector<std::vector<cplx>> psi_;
  std::vector<double> weight_;
  std::vector<Vec> xi_;
};

/// Inverse transform from the frequency lattice to the centred physical
/// box: v(x_j) = L^{-d} sum_k m_k exp(i xi_k . x_j). In place.
void to_physical(const SpatialGrid& g, std::vector<cplx>& data);
/// Inverse of to_physical.
void to_spectral(const SpatialGrid& g, std::vector<cplx>& data);

enum class KernelKind { p_lambda, K };

/// One sampled kernel p_lambda(t, s, .) or K(t, s, .). `values` is empty
/// when t <= s (the causal indicator).
struct KernelSlice {
  SpatialGrid grid;
  KernelKind kind = KernelKind::p_lambda;
  double t = 0, s = 0, lambda = 0, gamma = 0;
  std::vector<cplx> values;
  /// Max multiplier modulus on the Nyquist shell over the global max.
  double nyquist_ratio = 0;
  bool under_resolved = false;

  bool is_zero() const { return values.empty(); }
};

/// Multiplier exp(int_s^t psi - lambda (t - s)) for p_lambda, or
/// |xi|^gamma exp(int_s^t psi) for K, inverted on the grid. An optional
/// shift y returns the kernel evaluated at x - y. The slice is flagged
/// under-resolved when the Nyquist shell exceeds 1e-8 of the max.
KernelSlice kernel_slice(const SymbolTable& table, double t, double s, double lambda,
                         KernelKind kind, const Vec* shift = nullptr);
KernelSlice kernel_slice(const SymbolSpec& sym, double t, double s, double lambda,
                         const SpatialGrid& grid, KernelKind kind = KernelKind::p_lambda);

double l1_norm(const KernelSlice& ks);
/// max |Im| / max |v| over the slice (0 for the zero slice).
double imag_ratio(const KernelSlice& ks);

/// `proof`: 0 <= mu < min(gamma, floor(d/2) + 1 - d/2).
/// `finite`: 0 <= mu < gamma, where the moment is still finite.
enum class MomentRange { proof, finite };
double moment_limit(int dim, double gamma, MomentRange range);
/// Riemann sum of |x|^mu |v| over the box; DomainError outside the range.
double moment(const KernelSlice& ks, double mu, MomentRange range = MomentRange::proof);

/// F(t, s, xi) = |xi|^gamma exp(int_s^t psi(r, (t-s)^{-1/gamma} xi) dr) on
/// the frequency lattice; empty when t <= s.
std::vector<cplx> scaled_profile(const SymbolSpec& sym, double t, double s, const SpatialGrid& g);
/// max over the lattice of |F| / (|xi|^gamma exp(-kappa |xi|^gamma)).
double scaled_profile_ratio(const SymbolSpec& sym, double t, double s, const SpatialGrid& g);

/// L1 norm of the K slice: the Young-inequality bound of the operator
/// norm of f -> K(t, s, .) * f on every L_p. 0 when t <= s.
double operator_slice_norm(const SymbolTable& table, double t, double s);
double operator_slice_norm(const SymbolSpec& sym, double t, double s, const SpatialGrid& g);

/// Grid sized so that K at the gap range [gap_min, gap_max] is resolved
/// (Nyquist multiplier decayed) and its box holds `extent_widths` kernel
/// widths gap_max^{1/gamma}. N is capped at max_points per axis.
SpatialGrid kernel_grid(int dim, double gamma, double gap_min, double gap_max,
                        double extent_widths, int max_points = 1 << 22);

/// L1 sweep over (t - s, lambda): rows t_minus_s, lambda, l1, scaled =
/// e^{lambda (t-s)} l1. Checks that the scaled column does not depend on
/// lambda (relative 1e-12) and that no slice is under-resolved.
EstimateReport l1_sweep(const SymbolSpec& sym, std::span<const double> gaps,
                        std::span<const double> lambdas, const SpatialGrid& g, double s0 = 0.0);

/// Moment of K against the gap: fits log moment vs log(t - s) and checks
/// the slope mu/gamma - 1 within `tol`.
EstimateReport moment_sweep(const SymbolSpec& sym, double mu, std::span<const double> gaps,
                            const SpatialGrid& g, MomentRange range, double tol = 0.05,
                            double s0 = 0.0);

/// operator_slice_norm against the gap; fits the exponent -1 within `tol`.
EstimateReport opnorm_sweep(const SymbolSpec& sym, std::span<const double> gaps,
                            const SpatialGrid& g, double tol = 0.05, double s0 = 0.0);

// ---------------------------------------------------------------------------
// Hormander condition on a cube

struct PointPair {
  double s = 0;
  Vec y;
  double r = 0;
  Vec z;
};

/// `count` pairs drawn uniformly from the cube; the relative positions
/// depend only on the seed, so the same pairs rescale across levels.
std::vector<PointPair> sample_pairs(const Filtration& f, const Cube& q, int count,
                                    std::uint64_t seed);

struct HormanderOptions {
  int gl_points = 8;
  /// Panels of the graded rule on the near-time exterior.
  int near_panels = 6;
  /// T_max = t0 + tmax_factor * 2^{-m gamma}.
  double tmax_factor = 64.0;
  /// Box extent in units of 2^{-m}.
  double extent_factor = 256.0;
  /// Smallest resolved gap t - s in units of 2^{-m gamma}.
  double min_gap_fraction = 1.0 / 32.0;
  int max_points = 1 << 16;
};

/// Grid for hormander_Q at the cube's level.
SpatialGrid hormander_grid(const SymbolSpec& sym, const Filtration& f, const Cube& q,
                           const HormanderOptions& opt = {});

/// For each pair, integral of |K(t,x,s,y) - K(t,x,r,z)| over the exterior
/// of dilate(q), with t truncated at T_max. Rows per pair: index, total,
/// far (t beyond Q*), near (t inside Q*, x outside), I1, I2, I3, tail,
/// sliver. total = far + near + tail + sliver estimates. I1 and I2 split
/// the far part through (s, z); I3 bounds the near part by the two
/// single-kernel exterior masses.
EstimateReport hormander_Q(const SymbolSpec& sym, const Filtration& f, const Cube& q,
                           std::span<const PointPair> pairs, const SpatialGrid& g,
                           const HormanderOptions& opt = {});

/// hormander_Q at the unit-anchored cube of each level with the same
/// relative pairs. Reports per-level maxima and the level-to-level spread
/// (max/min - 1) of the max total.
EstimateReport hormander_levels(const SymbolSpec& sym, int dim, std::span<const std::int64_t> levels,
                                int pairs, std::uint64_t seed, const HormanderOptions& opt = {});

// ---------------------------------------------------------------------------
// Assumption sweep

struct SweepOptions {
  std::vector<double> scales{0.5, 1.0, 2.0};
  /// log2 of the scale-invariant argument u.
  int log2_u_min = -6;
  int log2_u_max = 2;
  /// Small-u fit window (log2 u <= fit_log2_u_max).
  int fit_log2_u_max = -2;
  int gl_points = 8;
  double tmax_factor = 64.0;
  int near_panels = 6;
  double collapse_tol = 0.25;
  double slope_tol = 0.1;
  /// Values below floor * (largest value of the condition) are skipped.
  double floor = 1e-10;
  /// Envelope exponent for condition (iii); <= 0 selects gamma.
  double mu = 0.0;
  int max_points = 1 << 16;
};

/// Evaluates the three left-hand sides of the kernel assumption on a
/// log-spaced sweep of their scale-invariant arguments:
///  (i)   int_a^inf int |K(t,x,s,y) - K(t,x,s,z)|, u = |y-z| / (a-s)^{1/gamma}
///  (ii)  int_a^inf int |K(t,x,s,y) - K(t,x,r,y)|, u = |s-r| / (a-b), b = max(s,r)
///  (iii) int_s^b int_{|x-y|>=rho} |K(t,x,s,y)|,  u = (b-s)^{1/gamma} / rho
/// Each u is evaluated in several configurations (scales, and directions
/// or orientations); the report checks their collapse and fits the
/// small-u exponents: 1 for (i) and (ii), mu for (iii) when the kernel has
/// power-law tails (gamma not an even integer), at least mu otherwise.
EstimateReport assumption1_sweep(const SymbolSpec& sym, const SweepOptions& opt = {});

}  // namespace czkit
