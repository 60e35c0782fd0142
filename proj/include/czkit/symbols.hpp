#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "report.hpp"

namespace czkit {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;

/// Fixed-capacity spatial vector (d <= 3).
struct Vec {
  std::array<double, kMaxDim> v{};
  int dim = 1;

  Vec() = default;
  explicit Vec(int d) : dim(d) {}
  Vec(std::initializer_list<double> xs);
  static Vec from(std::span<const double> xs);

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  double norm() const;
  std::span<const double> span() const { return {v.data(), static_cast<std::size_t>(dim)}; }
};

struct MultiIndex {
  std::array<int, kMaxDim> e{};
  int dim = 1;

  int order() const;
  bool operator==(const MultiIndex&) const = default;
  std::string str() const;  // "1,0"
};

/// All multi-indices of dimension d with |alpha| == order, lexicographic.
std::vector<MultiIndex> multi_indices(int dim, int order);
/// All multi-indices of dimension d with |alpha| <= max_order, by order.
std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order);

enum class SymbolKind { fractional, poly2m, levy, composed, scaled };
std::string to_string(SymbolKind k);

/// One coefficient a^{alpha beta} of a 2m-order operator.
struct PolyTerm {
  MultiIndex alpha;
  MultiIndex beta;
  cplx a;
};

/// Zero-order homogeneous, nonnegative jump density m(t, .) restricted to
/// the unit sphere. In d = 1 the sphere is {+1, -1}; in d = 2 the density
/// is a trigonometric polynomial in the polar angle.
struct LevyDensity {
  double plus = 0.0;
  double minus = 0.0;
  double c0 = 0.0;
  std::vector<double> cos_coeffs;  // k = 1, 2, ...
  std::vector<double> sin_coeffs;

  static LevyDensity constant(int dim, double c);
  double at_angle(double theta) const;
};

struct Composition;
struct Rescaling;

using Coefficients = std::variant<std::monostate, cplx, std::vector<PolyTerm>, LevyDensity>;

/// One interval [t0, t1) of a piecewise-constant coefficient schedule.
/// Either end may be infinite.
struct TimePiece {
  double t0 = 0.0;
  double t1 = 0.0;
  Coefficients coeffs;
};

/// A time-measurable symbol psi(t, xi) of order gamma with ellipticity
/// constant kappa. Immutable after construction; cheap to copy.
class SymbolSpec {
 public:
  SymbolKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  int dim() const { return dim_; }
  int poly_order() const { return poly_m_; }

  const std::vector<TimePiece>& pieces() const { return pieces_; }
  double t_begin() const { return pieces_.front().t0; }
  double t_end() const { return pieces_.back().t1; }
  /// Interior breakpoints (finite piece boundaries strictly inside the window).
  std::vector<double> breakpoints() const;
  /// Index of the piece containing t; the right end of the last piece is
  /// included. Throws DomainError outside the window.
  std::size_t piece_index(double t) const;
  /// Some time inside piece i (its midpoint when finite).
  double piece_sample_time(std::size_t i) const;

  /// psi(t, xi). Returns 0 at xi = 0 for every kind.
  cplx eval(double t, const Vec& xi) const;
  /// psi on piece i; same as eval at any time of the piece.
  cplx eval_piece(std::size_t piece, const Vec& xi) const;

  /// D^alpha_xi psi(t, xi) for |alpha| <= 2; analytic where the kind
  /// supplies it, central differences with step 1e-4|xi| otherwise.
  cplx derivative(double t, const Vec& xi, const MultiIndex& alpha) const;
  bool has_analytic_derivatives() const;

  /// Same family with the piece coefficients reassigned: piece i receives
  /// the coefficients of piece perm[i]. Only for leaf kinds.
  SymbolSpec with_permuted_schedule(std::span<const std::size_t> perm) const;
  /// Same family with the coefficients of piece `i` on the whole window.
  SymbolSpec frozen(std::size_t i) const;

  /// Component symbols of a composition (empty otherwise).
  const Composition* composition() const { return comp_.get(); }
  const Rescaling* rescaling() const { return scale_.get(); }

 private:
  friend SymbolSpec make_fractional(std::vector<TimePiece>, double, int);
  friend SymbolSpec make_poly2m(std::vector<TimePiece>, int, int);
  friend SymbolSpec make_levy(std::vector<TimePiece>, double, int);
  friend SymbolSpec compose(const SymbolSpec&, double, const SymbolSpec&, double);
  friend SymbolSpec power(const SymbolSpec&, double);
  friend SymbolSpec rescale(const SymbolSpec&, double, double);

  cplx eval_leaf(const Coefficients& c, const Vec& xi) const;
  cplx eval_at(std::size_t piece, double t, const Vec& xi) const;
  cplx fd_derivative(double t, const Vec& xi, const MultiIndex& alpha) const;

  SymbolKind kind_ = SymbolKind::fractional;
  double gamma_ = 0.0;
  double kappa_ = 0.0;
  int dim_ = 1;
  int poly_m_ = 0;
  std::vector<TimePiece> pieces_;
  std::shared_ptr<const Composition> comp_;
  std::shared_ptr<const Rescaling> scale_;
};

struct Composition {
  SymbolSpec first;
  double a = 1.0;
  std::optional<SymbolSpec> second;
  double b = 0.0;
};

/// psi_s(t, xi) = c * psi(origin + c t, c^{-1/gamma} xi): the parabolic
/// rescaling, which leaves gamma and kappa unchanged for homogeneous symbols.
struct Rescaling {
  SymbolSpec base;
  double factor = 1.0;
  double origin = 0.0;
};

/// Constant schedule helper: one piece over (-inf, inf).
std::vector<TimePiece> constant_schedule(Coefficients c);

/// psi = -a(t)|xi|^gamma. kappa = min over pieces of min(Re a, 1/|a|).
SymbolSpec make_fractional(std::vector<TimePiece> a_profile, double gamma, int dim);
SymbolSpec make_fractional(cplx a, double gamma, int dim);

/// psi = -sum a^{alpha beta}(t) xi^alpha xi^beta over |alpha| = |beta| = m.
/// Coercivity is checked on a dense sample of the unit sphere.
SymbolSpec make_poly2m(std::vector<TimePiece> coeffs_profile, int m, int dim);

/// Symbol of the jump operator with density m(t, y)/|y|^{d+gamma},
/// gamma in (0, 2), d in {1, 2}.
SymbolSpec make_levy(std::vector<TimePiece> density_profile, double gamma, int dim);

/// psi = -(-psi1)^a (-psi2)^b (principal branch), order a g1 + b g2.
SymbolSpec compose(const SymbolSpec& s1, double a, const SymbolSpec& s2, double b);
/// psi = -(-psi1)^a.
SymbolSpec power(const SymbolSpec& s1, double a);
SymbolSpec rescale(const SymbolSpec& base, double factor, double origin = 0.0);

/// Normalizing constant C(d, gamma) with
/// (-Delta)^{gamma/2} u = C int (u(x) - u(x+y) + ...) |y|^{-d-gamma} dy,
/// i.e. the constant Levy density reproducing -|xi|^gamma.
double fractional_laplacian_constant(int dim, double gamma);

/// Points on the unit sphere of R^d: {+1,-1} in d = 1, `count` equally
/// spaced angles in d = 2, a Fibonacci lattice in d = 3.
std::vector<Vec> sphere_samples(int dim, int count);

/// Empirical check of the ellipticity and derivative-decay conditions.
/// Rows: t, xi_1..xi_d, alpha ("ellip" or multi-index), ratio, bound, pass.
/// Ellipticity rows have ratio (-Re psi)/|xi|^gamma and bound = declared
/// kappa. Derivative rows have ratio |D^alpha psi| |xi|^{|alpha|-gamma}
/// and bound = the sup of that ratio over the sweep (the empirical
/// 1/kappa); they fail only when the stencil is not finite.
EstimateReport verify_conditions(const SymbolSpec& s, std::span<const double> t_samples,
                                 std::span<const Vec> xi_lattice, double tol = 1e-3);

/// Default sweep: every piece, radii 10^{-2..2}, sphere directions.
EstimateReport verify_conditions(const SymbolSpec& s, double tol = 1e-3);

}  // namespace czkit
