#include "czkit/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "czkit/errors.hpp"
#include "czkit/parallel.hpp"
#include "czkit/quadrature.hpp"

namespace czkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;

std::string fmt_vec(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.dim; ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

void check_schedule(const std::vector<TimePiece>& pieces) {
  if (pieces.empty()) throw ValidationError("coefficient schedule has no pieces");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (std::isnan(p.t0) || std::isnan(p.t1) || !(p.t0 < p.t1))
      throw ValidationError("schedule piece " + std::to_string(i) + " is empty or malformed");
    if (i > 0 && pieces[i - 1].t1 != p.t0)
      throw ValidationError("schedule pieces " + std::to_string(i - 1) + " and " +
                            std::to_string(i) + " are not contiguous");
  }
}

// Radial integral int_0^inf (e^{iur} - 1 - chi i u r) r^{-1-gamma} dr.
cplx levy_radial(double u, double gamma) {
  if (u == 0.0) return {0.0, 0.0};
  const double au = std::abs(u);
  if (gamma == 1.0) {
    return {-0.5 * kPi * au, -u * std::log(au) + (1.0 - kEulerGamma) * u};
  }
  const double g = std::tgamma(-gamma) * std::pow(au, gamma);
  const double phase = 0.5 * kPi * gamma;
  const double sgn = u > 0 ? 1.0 : -1.0;
  return {g * std::cos(phase), -sgn * g * std::sin(phase)};
}

const TanhSinhRule& angular_rule() {
  static const TanhSinhRule rule = tanh_sinh(128);
  return rule;
}

cplx eval_levy(const LevyDensity& m, double gamma, const Vec& xi) {
  if (xi.dim == 1) {
    return m.plus * levy_radial(xi[0], gamma) + m.minus * levy_radial(-xi[0], gamma);
  }
  const double r = xi.norm();
  if (r == 0.0) return {0.0, 0.0};
  const double phi = std::atan2(xi[1], xi[0]);
  const auto& rule = angular_rule();
  cplx acc{0.0, 0.0};
  // Two arcs where xi.w > 0 and xi.w < 0; xi.w vanishes at their ends.
  for (int arc = 0; arc < 2; ++arc) {
    const double centre = phi + (arc == 0 ? 0.0 : kPi);
    const double sgn = arc == 0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double theta = centre + 0.5 * kPi * rule.nodes[k];
      const double u = sgn * r * std::sin(0.5 * kPi * rule.gap[k]);
      acc += rule.weights[k] * m.at_angle(theta) * levy_radial(u, gamma);
    }
  }
  return 0.5 * kPi * acc;
}

cplx eval_poly(const std::vector<PolyTerm>& terms, const Vec& xi) {
  cplx acc{0.0, 0.0};
  for (const auto& term : terms) {
    double mono = 1.0;
    for (int i = 0; i < xi.dim; ++i) mono *= std::pow(xi[i], term.alpha.e[i] + term.beta.e[i]);
    acc += term.a * mono;
  }
  return -acc;
}

// D^delta of the monomial xi^mu.
double monomial_derivative(const Vec& xi, const std::array<int, kMaxDim>& mu,
                           const MultiIndex& delta) {
  double out = 1.0;
  for (int i = 0; i < xi.dim; ++i) {
    const int p = mu[static_cast<std::size_t>(i)];
    const int q = delta.e[static_cast<std::size_t>(i)];
    if (q > p) return 0.0;
    double c = 1.0;
    for (int j = 0; j < q; ++j) c *= p - j;
    out *= c * std::pow(xi[i], p - q);
  }
  return out;
}

struct SphereStats {
  double min_ellip = kInf;
  double max_modulus = 0.0;
  Vec argmin;
};

template <class Eval>
SphereStats sphere_stats(int dim, int count, std::span<const double> radii, double gamma,
                         Eval&& eval) {
  SphereStats st;
  for (double r : radii) {
    for (Vec w : sphere_samples(dim, count)) {
      for (int i = 0; i < dim; ++i) w[i] *= r;
      const cplx psi = eval(w);
      const double scale = std::pow(r, gamma);
      const double e = -psi.real() / scale;
      if (e < st.min_ellip || std::isnan(e)) {
        st.min_ellip = e;
        st.argmin = w;
      }
      st.max_modulus = std::max(st.max_modulus, std::abs(psi) / scale);
    }
  }
  return st;
}

double kappa_from(const SphereStats& st) {
  return std::min(st.min_ellip, 1.0 / st.max_modulus);
}

}  // namespace

// ---------------------------------------------------------------------------

Vec::Vec(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size())) {
  if (xs.size() == 0 || xs.size() > kMaxDim) throw DomainError("vector dimension must be 1..3");
  std::copy(xs.begin(), xs.end(), v.begin());
}

Vec Vec::from(std::span<const double> xs) {
  if (xs.empty() || xs.size() > kMaxDim) throw DomainError("vector dimension must be 1..3");
  Vec out(static_cast<int>(xs.size()));
  std::copy(xs.begin(), xs.end(), out.v.begin());
  return out;
}

double Vec::norm() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

int MultiIndex::order() const {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += e[static_cast<std::size_t>(i)];
  return s;
}

std::string MultiIndex::str() const {
  std::string out;
  for (int i = 0; i < dim; ++i) {
    if (i) out += ',';
    out += std::to_string(e[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::vector<MultiIndex> multi_indices(int dim, int order) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  cur.dim = dim;
  auto rec = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == dim - 1) {
      cur.e[static_cast<std::size_t>(axis)] = remaining;
      out.push_back(cur);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur.e[static_cast<std::size_t>(axis)] = k;
      self(self, axis + 1, remaining - k);
    }
  };
  rec(rec, 0, order);
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    auto level = multi_indices(dim, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::string to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::fractional: return "fractional";
    case SymbolKind::poly2m: return "poly2m";
    case SymbolKind::levy: return "levy";
    case SymbolKind::composed: return "composed";
    case SymbolKind::scaled: return "scaled";
  }
  return "unknown";
}

LevyDensity LevyDensity::constant(int dim, double c) {
  LevyDensity m;
  if (dim == 1) {
    m.plus = c;
    m.minus = c;
  } else {
    m.c0 = c;
  }
  return m;
}

double LevyDensity::at_angle(double theta) const {
  double v = c0;
  for (std::size_t k = 0; k < cos_coeffs.size(); ++k)
    v += cos_coeffs[k] * std::cos(static_cast<double>(k + 1) * theta);
  for (std::size_t k = 0; k < sin_coeffs.size(); ++k)
    v += sin_coeffs[k] * std::sin(static_cast<double>(k + 1) * theta);
  return v;
}

std::vector<Vec> sphere_samples(int dim, int count) {
  std::vector<Vec> out;
  if (dim == 1) {
    out.push_back(Vec{1.0});
    out.push_back(Vec{-1.0});
  } else if (dim == 2) {
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * kPi * (k + 0.5) / count;
      out.push_back(Vec{std::cos(th), std::sin(th)});
    }
  } else if (dim == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * k;
      out.push_back(Vec{rr * std::cos(th), rr * std::sin(th), z});
    }
  } else {
    throw DomainError("dimension must be 1, 2 or 3");
  }
  return out;
}

double fractional_laplacian_constant(int dim, double gamma) {
  return std::pow(2.0, gamma) * std::tgamma(0.5 * (dim + gamma)) /
         (std::pow(kPi, 0.5 * dim) * std::abs(std::tgamma(-0.5 * gamma)));
}

std::vector<TimePiece> constant_schedule(Coefficients c) {
  return {TimePiece{-kInf, kInf, std::move(c)}};
}

// ---------------------------------------------------------------------------
// SymbolSpec

std::vector<double> SymbolSpec::breakpoints() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].t0);
  return out;
}

std::size_t SymbolSpec::piece_index(double t) const {
  if (std::isnan(t) || t < t_begin() || t > t_end() || (t == t_end() && std::isinf(t)))
    throw DomainError("time " + std::to_string(t) + " is outside the coefficient schedule [" +
                      std::to_string(t_begin()) + ", " + std::to_string(t_end()) + "]");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const TimePiece& p) { return v < p.t1; });
  if (it == pieces_.end()) return pieces_.size() - 1;
  return static_cast<std::size_t>(it - pieces_.begin());
}

double SymbolSpec::piece_sample_time(std::size_t i) const {
  const auto& p = pieces_.at(i);
  const bool lo = std::isfinite(p.t0), hi = std::isfinite(p.t1);
  if (lo && hi) return 0.5 * (p.t0 + p.t1);
  if (lo) return p.t0;
  if (hi) return p.t1 - 1.0;
  return 0.0;
}

cplx SymbolSpec::eval_leaf(const Coefficients& c, const Vec& xi) const {
  switch (kind_) {
    case SymbolKind::fractional:
      return -std::get<cplx>(c) * std::pow(xi.norm(), gamma_);
    case SymbolKind::poly2m:
      return eval_poly(std::get<std::vector<PolyTerm>>(c), xi);
    case SymbolKind::levy:
      return eval_levy(std::get<LevyDensity>(c), gamma_, xi);
    default:
      break;
  }
  throw DomainError("not a leaf symbol");
}

cplx SymbolSpec::eval_at(std::size_t piece, double t, const Vec& xi) const {
  if (xi.dim != dim_) throw DomainError("frequency dimension does not match the symbol");
  if (xi.norm() == 0.0) return {0.0, 0.0};
  switch (kind_) {
    case SymbolKind::composed: {
      const cplx p1 = comp_->first.eval(t, xi);
      cplx out = std::pow(-p1, comp_->a);
      if (comp_->second) out *= std::pow(-comp_->second->eval(t, xi), comp_->b);
      return -out;
    }
    case SymbolKind::scaled: {
      const double c = scale_->factor;
      Vec y = xi;
      const double shrink = std::pow(c, -1.0 / gamma_);
      for (int i = 0; i < dim_; ++i) y[i] *= shrink;
      return c * scale_->base.eval(scale_->origin + c * t, y);
    }
    default:
      return eval_leaf(pieces_[piece].coeffs, xi);
  }
}

cplx SymbolSpec::eval(double t, const Vec& xi) const {
  return eval_at(piece_index(t), t, xi);
}

cplx SymbolSpec::eval_piece(std::size_t piece, const Vec& xi) const {
  return eval_at(piece, piece_sample_time(piece), xi);
}

bool SymbolSpec::has_analytic_derivatives() const {
  return kind_ == SymbolKind::fractional || kind_ == SymbolKind::poly2m;
}

cplx SymbolSpec::fd_derivative(double t, const Vec& xi, const MultiIndex& alpha) const {
  int axis = -1;
  for (int i = 0; i < dim_; ++i)
    if (alpha.e[static_cast<std::size_t>(i)] > 0) {
      axis = i;
      break;
    }
  if (axis < 0) return eval(t, xi);
  const double h = 1e-4 * xi.norm();
  Vec plus = xi, minus = xi;
  plus[axis] += h;
  minus[axis] -= h;
  MultiIndex rest = alpha;
  if (alpha.e[static_cast<std::size_t>(axis)] >= 2) {
    rest.e[static_cast<std::size_t>(axis)] -= 2;
    return (fd_derivative(t, plus, rest) - 2.0 * fd_derivative(t, xi, rest) +
            fd_derivative(t, minus, rest)) /
           (h * h);
  }
  rest.e[static_cast<std::size_t>(axis)] -= 1;
  return (fd_derivative(t, plus, rest) - fd_derivative(t, minus, rest)) / (2.0 * h);
}

cplx SymbolSpec::derivative(double t, const Vec& xi, const MultiIndex& alpha) const {
  if (alpha.order() > 2) throw DomainError("derivatives are supported up to order 2");
  if (alpha.order() == 0) return eval(t, xi);
  const std::size_t piece = piece_index(t);
  if (kind_ == SymbolKind::fractional) {
    const cplx a = std::get<cplx>(pieces_[piece].coeffs);
    const double r = xi.norm();
    int i = -1, j = -1;
    for (int k = 0; k < dim_; ++k)
      for (int c = 0; c < alpha.e[static_cast<std::size_t>(k)]; ++c) (i < 0 ? i : j) = k;
    if (j < 0) return -a * gamma_ * std::pow(r, gamma_ - 2.0) * xi[i];
    double d = (gamma_ - 2.0) * std::pow(r, gamma_ - 4.0) * xi[i] * xi[j];
    if (i == j) d += std::pow(r, gamma_ - 2.0);
    return -a * gamma_ * d;
  }
  if (kind_ == SymbolKind::poly2m) {
    cplx acc{0.0, 0.0};
    for (const auto& term : std::get<std::vector<PolyTerm>>(pieces_[piece].coeffs)) {
      std::array<int, kMaxDim> mu{};
      for (int k = 0; k < dim_; ++k)
        mu[static_cast<std::size_t>(k)] =
            term.alpha.e[static_cast<std::size_t>(k)] + term.beta.e[static_cast<std::size_t>(k)];
      acc += term.a * monomial_derivative(xi, mu, alpha);
    }
    return -acc;
  }
  return fd_derivative(t, xi, alpha);
}

SymbolSpec SymbolSpec::with_permuted_schedule(std::span<const std::size_t> perm) const {
  if (kind_ == SymbolKind::composed || kind_ == SymbolKind::scaled)
    throw DomainError("schedule permutation needs a leaf symbol");
  if (perm.size() != pieces_.size()) throw DomainError("permutation size mismatch");
  SymbolSpec out = *this;
  for (std::size_t i = 0; i < perm.size(); ++i) out.pieces_[i].coeffs = pieces_.at(perm[i]).coeffs;
  return out;
}

SymbolSpec SymbolSpec::frozen(std::size_t i) const {
  if (kind_ == SymbolKind::composed || kind_ == SymbolKind::scaled)
    throw DomainError("freezing needs a leaf symbol");
  SymbolSpec out = *this;
  out.pieces_ = {TimePiece{t_begin(), t_end(), pieces_.at(i).coeffs}};
  return out;
}

// ---------------------------------------------------------------------------
// Builders

SymbolSpec make_fractional(std::vector<TimePiece> a_profile, double gamma, int dim) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be positive");
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3");
  check_schedule(a_profile);
  double kappa = kInf;
  for (std::size_t i = 0; i < a_profile.size(); ++i) {
    const cplx* a = std::get_if<cplx>(&a_profile[i].coeffs);
    if (!a) throw ValidationError("fractional piece " + std::to_string(i) + " needs a coefficient a");
    if (!(a->real() > 0.0))
      throw ValidationError("fractional piece " + std::to_string(i) + ": Re a must be positive");
    kappa = std::min({kappa, a->real(), 1.0 / std::abs(*a)});
  }
  SymbolSpec s;
  s.kind_ = SymbolKind::fractional;
  s.gamma_ = gamma;
  s.kappa_ = kappa;
  s.dim_ = dim;
  s.pieces_ = std::move(a_profile);
  return s;
}

SymbolSpec make_fractional(cplx a, double gamma, int dim) {
  return make_fractional(constant_schedule(a), gamma, dim);
}

SymbolSpec make_poly2m(std::vector<TimePiece> coeffs_profile, int m, int dim) {
  if (m < 1) throw ValidationError("poly2m order m must be >= 1");
  if (dim < 1 || dim > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3");
  check_schedule(coeffs_profile);
  SymbolSpec s;
  s.kind_ = SymbolKind::poly2m;
  s.gamma_ = 2.0 * m;
  s.dim_ = dim;
  s.poly_m_ = m;
  double kappa = kInf;
  const std::array<double, 1> unit{1.0};
  for (std::size_t i = 0; i < coeffs_profile.size(); ++i) {
    const auto* terms = std::get_if<std::vector<PolyTerm>>(&coeffs_profile[i].coeffs);
    if (!terms || terms->empty())
      throw ValidationError("poly2m piece " + std::to_string(i) + " has no coefficients");
    for (const auto& term : *terms) {
      if (term.alpha.dim != dim || term.beta.dim != dim || term.alpha.order() != m ||
          term.beta.order() != m)
        throw ValidationError("poly2m coefficient indices must satisfy |alpha| = |beta| = m");
    }
    const auto st = sphere_stats(dim, 4096, unit, s.gamma_,
                                 [&](const Vec& xi) { return eval_poly(*terms, xi); });
    if (!(st.min_ellip > 0.0))
      throw ValidationError("poly2m piece " + std::to_string(i) +
                            ": coercivity fails at xi = " + fmt_vec(st.argmin) +
                            " (sum xi^a xi^b Re a = " + std::to_string(st.min_ellip) + ")");
    kappa = std::min(kappa, kappa_from(st));
  }
  s.kappa_ = kappa;
  s.pieces_ = std::move(coeffs_profile);
  return s;
}

SymbolSpec make_levy(std::vector<TimePiece> density_profile, double gamma, int dim) {
  if (!(gamma > 0.0 && gamma < 2.0))
    throw DomainError("Levy symbols are supported for gamma in (0, 2) only");
  if (dim != 1 && dim != 2) throw DomainError("Levy symbols are supported for d = 1, 2 only");
  check_schedule(density_profile);
  SymbolSpec s;
  s.kind_ = SymbolKind::levy;
  s.gamma_ = gamma;
  s.dim_ = dim;
  double kappa = kInf;
  const std::array<double, 1> unit{1.0};
  for (std::size_t i = 0; i < density_profile.size(); ++i) {
    const auto* m = std::get_if<LevyDensity>(&density_profile[i].coeffs);
    if (!m) throw ValidationError("levy piece " + std::to_string(i) + " needs a density");
    const std::string where = "levy piece " + std::to_string(i);
    // Nonnegativity, positivity somewhere, and the first-moment cancellation
    // on the sphere required at gamma = 1.
    double lo = kInf, hi = -kInf, total = 0.0;
    std::array<double, 2> moment{0.0, 0.0};
    if (dim == 1) {
      lo = std::min(m->plus, m->minus);
      hi = std::max(m->plus, m->minus);
      total = m->plus + m->minus;
      moment[0] = m->plus - m->minus;
    } else {
      const int n = 1024;
      for (int k = 0; k < n; ++k) {
        const double th = 2.0 * kPi * k / n;
        const double v = m->at_angle(th);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        total += v * 2.0 * kPi / n;
        moment[0] += std::cos(th) * v * 2.0 * kPi / n;
        moment[1] += std::sin(th) * v * 2.0 * kPi / n;
      }
    }
    if (lo < -1e-12 * std::max(1.0, hi))
      throw ValidationError(where + ": density must be nonnegative");
    if (!(hi > 0.0)) throw ValidationError(where + ": density must be positive somewhere");
    if (gamma == 1.0) {
      const double mom = std::hypot(moment[0], moment[1]);
      if (mom > 1e-9 * total)
        throw ValidationError(where + ": gamma = 1 needs int_{S} w m(w) dS = 0, got |.| = " +
                              std::to_string(mom));
    }
    const auto st = sphere_stats(dim, 256, unit, gamma,
                                 [&](const Vec& xi) { return eval_levy(*m, gamma, xi); });
    if (!(st.min_ellip > 0.0))
      throw ValidationError(where + ": ellipticity fails at xi = " + fmt_vec(st.argmin));
    kappa = std::min(kappa, kappa_from(st));
  }
  s.kappa_ = kappa;
  s.pieces_ = std::move(density_profile);
  return s;
}

namespace {

std::vector<TimePiece> merged_schedule(const SymbolSpec& a, const SymbolSpec* b) {
  double lo = a.t_begin(), hi = a.t_end();
  std::vector<double> cuts = a.breakpoints();
  if (b) {
    lo = std::max(lo, b->t_begin());
    hi = std::min(hi, b->t_end());
    auto more = b->breakpoints();
    cuts.insert(cuts.end(), more.begin(), more.end());
  }
  if (!(lo < hi)) throw ValidationError("composed factors have disjoint time windows");
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<TimePiece> out;
  double start = lo;
  for (double c : cuts) {
    if (c <= lo || c >= hi) continue;
    out.push_back(TimePiece{start, c, std::monostate{}});
    start = c;
  }
  out.push_back(TimePiece{start, hi, std::monostate{}});
  return out;
}

double composite_kappa(const SymbolSpec& s) {
  const int count = s.dim() == 1 ? 2 : (s.dim() == 2 ? 512 : 1024);
  const std::array<double, 3> radii{0.1, 1.0, 10.0};
  double kappa = kInf;
  for (std::size_t i = 0; i < s.pieces().size(); ++i) {
    const double t = s.piece_sample_time(i);
    const auto st = sphere_stats(s.dim(), count, radii, s.gamma(),
                                 [&](const Vec& xi) { return s.eval(t, xi); });
    if (!(st.min_ellip > 0.0))
      throw ValidationError("composite symbol fails ellipticity at t = " + std::to_string(t) +
                            ", xi = " + fmt_vec(st.argmin));
    kappa = std::min(kappa, kappa_from(st));
  }
  return kappa;
}

}  // namespace

SymbolSpec compose(const SymbolSpec& s1, double a, const SymbolSpec& s2, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("composition exponents must be positive");
  if (s1.dim() != s2.dim()) throw ValidationError("composed factors must share the dimension");
  SymbolSpec s;
  s.kind_ = SymbolKind::composed;
  s.dim_ = s1.dim();
  s.gamma_ = a * s1.gamma() + b * s2.gamma();
  s.pieces_ = merged_schedule(s1, &s2);
  s.comp_ = std::make_shared<const Composition>(Composition{s1, a, s2, b});
  s.kappa_ = composite_kappa(s);
  return s;
}

SymbolSpec power(const SymbolSpec& s1, double a) {
  if (!(a > 0.0)) throw ValidationError("power exponent must be positive");
  SymbolSpec s;
  s.kind_ = SymbolKind::composed;
  s.dim_ = s1.dim();
  s.gamma_ = a * s1.gamma();
  s.pieces_ = merged_schedule(s1, nullptr);
  s.comp_ = std::make_shared<const Composition>(Composition{s1, a, std::nullopt, 0.0});
  s.kappa_ = composite_kappa(s);
  return s;
}

SymbolSpec rescale(const SymbolSpec& base, double factor, double origin) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("scale factor must be positive");
  SymbolSpec s;
  s.kind_ = SymbolKind::scaled;
  s.dim_ = base.dim();
  s.gamma_ = base.gamma();
  s.kappa_ = base.kappa();
  for (const auto& p : base.pieces())
    s.pieces_.push_back(TimePiece{(p.t0 - origin) / factor, (p.t1 - origin) / factor, std::monostate{}});
  s.scale_ = std::make_shared<const Rescaling>(Rescaling{base, factor, origin});
  return s;
}

// ---------------------------------------------------------------------------
// Verification

EstimateReport verify_conditions(const SymbolSpec& s, std::span<const double> t_samples,
                                 std::span<const Vec> xi_lattice, double tol) {
  const int d = s.dim();
  const auto alphas = multi_indices_up_to(d, d / 2 + 1);
  const double gamma = s.gamma();

  struct Sample {
    std::vector<std::vector<Cell>> rows;
    double ellip = kInf;
    double deriv = 0.0;
    int bad = 0;
  };
  const std::size_t nx = xi_lattice.size();
  std::vector<Sample> samples(t_samples.size() * nx);

  parallel_for(samples.size(), [&](std::size_t idx) {
    const double t = t_samples[idx / nx];
    const Vec& xi = xi_lattice[idx % nx];
    Sample& out = samples[idx];
    const double r = xi.norm();
    auto prefix = [&] {
      std::vector<Cell> row{t};
      for (int i = 0; i < d; ++i) row.emplace_back(xi[i]);
      return row;
    };
    const cplx psi = s.eval(t, xi);
    const double e = -psi.real() / std::pow(r, gamma);
    {
      auto row = prefix();
      const bool ok = std::isfinite(e) && e >= s.kappa() * (1.0 - tol);
      row.insert(row.end(), {Cell{std::string("ellip")}, Cell{e}, Cell{s.kappa()},
                             Cell{std::int64_t{ok}}});
      out.rows.push_back(std::move(row));
      if (std::isfinite(e)) out.ellip = e;
      else ++out.bad;
    }
    for (const auto& alpha : alphas) {
      double ratio;
      try {
        ratio = std::abs(s.derivative(t, xi, alpha)) * std::pow(r, alpha.order() - gamma);
      } catch (const std::exception&) {
        ratio = std::numeric_limits<double>::quiet_NaN();
      }
      auto row = prefix();
      row.insert(row.end(), {Cell{alpha.str()}, Cell{ratio}, Cell{0.0},
                             Cell{std::int64_t{std::isfinite(ratio)}}});
      out.rows.push_back(std::move(row));
      if (std::isfinite(ratio)) out.deriv = std::max(out.deriv, ratio);
      else ++out.bad;
    }
  });

  EstimateReport rep;
  rep.check = "verify_conditions";
  rep.columns = {"t"};
  for (int i = 0; i < d; ++i) rep.columns.push_back("xi" + std::to_string(i + 1));
  rep.columns.insert(rep.columns.end(), {"alpha", "ratio", "bound", "pass"});

  double kappa_emp = kInf, deriv_sup = 0.0;
  int bad = 0;
  for (const auto& smp : samples) {
    kappa_emp = std::min(kappa_emp, smp.ellip);
    deriv_sup = std::max(deriv_sup, smp.deriv);
    bad += smp.bad;
  }
  for (auto& smp : samples)
    for (auto& row : smp.rows) {
      if (std::get<std::string>(row[static_cast<std::size_t>(d) + 1]) != "ellip")
        row[static_cast<std::size_t>(d) + 3] = deriv_sup;
      rep.rows.push_back(std::move(row));
    }

  rep.set("gamma", gamma);
  rep.set("kappa_declared", s.kappa());
  rep.set("kappa_empirical", kappa_emp);
  rep.set("kappa_inverse_empirical", deriv_sup);
  rep.set("kappa_effective", std::min(kappa_emp, deriv_sup > 0 ? 1.0 / deriv_sup : kInf));
  rep.set("max_derivative_order", d / 2 + 1);
  rep.set("samples", static_cast<double>(samples.size()));
  rep.set("failing_samples", bad);
  rep.tolerance("relative_kappa", tol);
  rep.require("ellipticity", kappa_emp >= s.kappa() * (1.0 - tol));
  rep.require("finite_stencils", bad == 0);
  return rep;
}

EstimateReport verify_conditions(const SymbolSpec& s, double tol) {
  std::vector<double> ts;
  for (std::size_t i = 0; i < s.pieces().size(); ++i) ts.push_back(s.piece_sample_time(i));
  std::vector<Vec> lattice;
  for (double r : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
    for (Vec w : sphere_samples(s.dim(), 64)) {
      for (int i = 0; i < s.dim(); ++i) w[i] *= r;
      lattice.push_back(w);
    }
  }
  return verify_conditions(s, ts, lattice, tol);
}

}  // namespace czkit
