#include "czkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "czkit/errors.hpp"
#include "czkit/fft.hpp"
#include "czkit/parallel.hpp"
#include "czkit/quadrature.hpp"

namespace czkit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNyquistSentinel = 1e-8;
// exp(-25) keeps the multiplier tail below the sentinel for the orders used.
constexpr double kDecayExponent = 25.0;

int next_pow2(double v) {
  int n = 16;
  while (n < v && n < (1 << 30)) n <<= 1;
  return n;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

cplx time_integral(const SymbolSpec& s, double a, double b, const Vec& xi) {
  if (!(a <= b)) throw DomainError("time_integral needs a <= b");
  if (a < s.t_begin() || b > s.t_end())
    throw DomainError("interval [" + fmt(a) + ", " + fmt(b) + "] leaves the coefficient schedule");
  cplx acc{0.0, 0.0};
  if (a == b) return acc;
  const auto& pieces = s.pieces();
  for (std::size_t p = s.piece_index(a); p < pieces.size(); ++p) {
    const double lo = std::max(a, pieces[p].t0), hi = std::min(b, pieces[p].t1);
    if (hi > lo) acc += (hi - lo) * s.eval_piece(p, xi);
    if (pieces[p].t1 >= b) break;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// SymbolTable

SymbolTable::SymbolTable(const SymbolSpec& s, const SpatialGrid& g) : s_(s), g_(g) {
  if (s.dim() != g.dim()) throw DomainError("symbol and grid dimensions differ");
  const std::size_t n = g.size();
  xi_.resize(n);
  weight_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    xi_[k] = g.freq(k);
    const double r = xi_[k].norm();
    weight_[k] = r == 0.0 ? 0.0 : std::pow(r, s.gamma());
  }
  psi_.assign(s.pieces().size(), std::vector<cplx>(n));
  for (std::size_t p = 0; p < psi_.size(); ++p) {
    auto& row = psi_[p];
    parallel_for(n, [&](std::size_t k) { row[k] = s_.eval_piece(p, xi_[k]); });
  }
}

std::vector<std::pair<std::size_t, double>> SymbolTable::overlaps(double a, double b) const {
  if (!(a <= b)) throw DomainError("time interval needs a <= b");
  if (a < s_.t_begin() || b > s_.t_end())
    throw DomainError("interval [" + fmt(a) + ", " + fmt(b) + "] leaves the coefficient schedule");
  std::vector<std::pair<std::size_t, double>> out;
  if (a == b) return out;
  const auto& pieces = s_.pieces();
  for (std::size_t p = s_.piece_index(a); p < pieces.size(); ++p) {
    const double lo = std::max(a, pieces[p].t0), hi = std::min(b, pieces[p].t1);
    if (hi > lo) out.emplace_back(p, hi - lo);
    if (pieces[p].t1 >= b) break;
  }
  return out;
}

void SymbolTable::integral(double a, double b, std::vector<cplx>& out) const {
  const auto ov = overlaps(a, b);
  out.assign(g_.size(), cplx{0.0, 0.0});
  for (const auto& [p, len] : ov) {
    const auto& row = psi_[p];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += len * row[k];
  }
}

// ---------------------------------------------------------------------------

void to_physical(const SpatialGrid& g, std::vector<cplx>& data) {
  const double scale = 1.0 / std::pow(g.extent(), g.dim());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= g.centring_sign(k) * scale;
  fft_backward(data, g.shape());
}

void to_spectral(const SpatialGrid& g, std::vector<cplx>& data) {
  fft_forward(data, g.shape());
  const double scale = g.cell_volume();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= g.centring_sign(k) * scale;
}

namespace {

// Fills `m` with the kernel multiplier and returns the Nyquist ratio.
double build_multiplier(const SymbolTable& tab, double t, double s, double lambda, KernelKind kind,
                        const Vec* shift, std::vector<cplx>& m) {
  tab.integral(s, t, m);
  const auto& g = tab.grid();
  const auto& w = tab.order_weight();
  const auto& xi = tab.frequencies();
  const double decay = lambda * (t - s);
  double peak = 0.0, nyq = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    cplx v = std::exp(m[k] - decay);
    if (kind == KernelKind::K) v *= w[k];
    if (shift) {
      double ph = 0.0;
      for (int a = 0; a < g.dim(); ++a) ph += xi[k][a] * (*shift)[a];
      v *= std::polar(1.0, -ph);
    }
    m[k] = v;
    const double a = std::abs(v);
    peak = std::max(peak, a);
    if (g.nyquist(k)) nyq = std::max(nyq, a);
  }
  return peak > 0.0 ? nyq / peak : 0.0;
}

double abs_sum(const std::vector<cplx>& v) {
  double acc = 0.0;
  for (const auto& c : v) acc += std::abs(c);
  return acc;
}

}  // namespace

KernelSlice kernel_slice(const SymbolTable& table, double t, double s, double lambda,
                         KernelKind kind, const Vec* shift) {
  KernelSlice ks{table.grid(), kind, t, s, lambda, table.symbol().gamma(), {}, 0.0, false};
  if (!(t > s)) return ks;
  std::vector<cplx> m;
  ks.nyquist_ratio = build_multiplier(table, t, s, lambda, kind, shift, m);
  ks.under_resolved = ks.nyquist_ratio > kNyquistSentinel;
  to_physical(table.grid(), m);
  ks.values = std::move(m);
  return ks;
}

KernelSlice kernel_slice(const SymbolSpec& sym, double t, double s, double lambda,
                         const SpatialGrid& grid, KernelKind kind) {
  if (!(t > s)) return KernelSlice{grid, kind, t, s, lambda, sym.gamma(), {}, 0.0, false};
  return kernel_slice(SymbolTable(sym, grid), t, s, lambda, kind);
}

double l1_norm(const KernelSlice& ks) {
  if (ks.is_zero()) return 0.0;
  return abs_sum(ks.values) * ks.grid.cell_volume();
}

double imag_ratio(const KernelSlice& ks) {
  double im = 0.0, mod = 0.0;
  for (const auto& v : ks.values) {
    im = std::max(im, std::abs(v.imag()));
    mod = std::max(mod, std::abs(v));
  }
  return mod > 0.0 ? im / mod : 0.0;
}

double moment_limit(int dim, double gamma, MomentRange range) {
  if (range == MomentRange::finite) return gamma;
  return std::min(gamma, static_cast<double>(dim / 2 + 1) - 0.5 * dim);
}

double moment(const KernelSlice& ks, double mu, MomentRange range) {
  const int d = ks.grid.dim();
  const double lim = moment_limit(d, ks.gamma, range);
  if (!(mu >= 0.0 && mu < lim)) {
    const std::string which = range == MomentRange::proof
                                  ? "0 <= mu < min(gamma, floor(d/2) + 1 - d/2) = " + fmt(lim)
                                  : "0 <= mu < gamma = " + fmt(lim);
    throw DomainError("moment exponent mu = " + fmt(mu) + " violates " + which);
  }
  if (ks.is_zero()) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < ks.values.size(); ++j)
    acc += std::pow(ks.grid.point(j).norm(), mu) * std::abs(ks.values[j]);
  return acc * ks.grid.cell_volume();
}

std::vector<cplx> scaled_profile(const SymbolSpec& sym, double t, double s, const SpatialGrid& g) {
  if (!(t > s)) return {};
  const double c = std::pow(t - s, -1.0 / sym.gamma());
  std::vector<cplx> out(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    Vec xi = g.freq(k);
    const double r = xi.norm();
    if (r == 0.0) {
      out[k] = 0.0;
      return;
    }
    Vec scaled = xi;
    for (int a = 0; a < g.dim(); ++a) scaled[a] *= c;
    out[k] = std::pow(r, sym.gamma()) * std::exp(time_integral(sym, s, t, scaled));
  });
  return out;
}

double scaled_profile_ratio(const SymbolSpec& sym, double t, double s, const SpatialGrid& g) {
  const auto F = scaled_profile(sym, t, s, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const double r = g.freq(k).norm();
    if (r == 0.0) continue;
    const double rg = std::pow(r, sym.gamma());
    const double bound = rg * std::exp(-sym.kappa() * rg);
    if (bound <= 0.0) continue;
    worst = std::max(worst, std::abs(F[k]) / bound);
  }
  return worst;
}

double operator_slice_norm(const SymbolTable& table, double t, double s) {
  if (!(t > s)) return 0.0;
  return l1_norm(kernel_slice(table, t, s, 0.0, KernelKind::K));
}

double operator_slice_norm(const SymbolSpec& sym, double t, double s, const SpatialGrid& g) {
  if (!(t > s)) return 0.0;
  return operator_slice_norm(SymbolTable(sym, g), t, s);
}

SpatialGrid kernel_grid(int dim, double gamma, double gap_min, double gap_max, double extent_widths,
                        int max_points) {
  const double L = extent_widths * std::pow(gap_max, 1.0 / gamma);
  const double xi_max = std::pow(kDecayExponent / gap_min, 1.0 / gamma);
  const int N = std::min(next_pow2(L * xi_max / kPi), max_points);
  return SpatialGrid(dim, L, N);
}

// ---------------------------------------------------------------------------
// Sweeps

EstimateReport l1_sweep(const SymbolSpec& sym, std::span<const double> gaps,
                        std::span<const double> lambdas, const SpatialGrid& g, double s0) {
  const SymbolTable tab(sym, g);
  EstimateReport rep;
  rep.check = "l1";
  rep.columns = {"t_minus_s", "lambda", "l1", "scaled", "nyquist_ratio", "pass"};
  double sup = 0.0, worst_rel = 0.0;
  int unresolved = 0;
  for (double gap : gaps) {
    double base = -1.0;
    for (double lam : lambdas) {
      const auto ks = kernel_slice(tab, s0 + gap, s0, lam, KernelKind::p_lambda);
      const double l1 = l1_norm(ks);
      const double scaled = l1 * std::exp(lam * gap);
      if (base < 0.0) base = scaled;
      const double rel = std::abs(scaled - base) / base;
      worst_rel = std::max(worst_rel, rel);
      unresolved += ks.under_resolved;
      sup = std::max(sup, scaled);
      rep.rows.push_back({gap, lam, l1, scaled, ks.nyquist_ratio,
                          std::int64_t{rel <= 1e-12 && !ks.under_resolved}});
    }
  }
  rep.set("sup_scaled_l1", sup);
  rep.set("max_relative_lambda_dependence", worst_rel);
  rep.set("under_resolved", unresolved);
  rep.tolerance("lambda_factorization", 1e-12);
  rep.require("factorization", worst_rel <= 1e-12);
  rep.require("resolved", unresolved == 0);
  return rep;
}

EstimateReport moment_sweep(const SymbolSpec& sym, double mu, std::span<const double> gaps,
                            const SpatialGrid& g, MomentRange range, double tol, double s0) {
  const SymbolTable tab(sym, g);
  EstimateReport rep;
  rep.check = "moment";
  rep.columns = {"t_minus_s", "moment", "l1", "nyquist_ratio"};
  std::vector<double> x, y;
  int unresolved = 0;
  for (double gap : gaps) {
    const auto ks = kernel_slice(tab, s0 + gap, s0, 0.0, KernelKind::K);
    const double mom = moment(ks, mu, range);
    unresolved += ks.under_resolved;
    x.push_back(gap);
    y.push_back(mom);
    rep.rows.push_back({gap, mom, l1_norm(ks), ks.nyquist_ratio});
  }
  const auto fit = fit_power_law(x, y);
  const double expected = mu / sym.gamma() - 1.0;
  rep.set("mu", mu);
  rep.set("fitted_slope", fit.slope);
  rep.set("expected_slope", expected);
  rep.set("max_log_residual", fit.max_residual);
  rep.set("under_resolved", unresolved);
  rep.tolerance("slope", tol);
  rep.require("slope_match", std::abs(fit.slope - expected) <= tol);
  rep.require("resolved", unresolved == 0);
  return rep;
}

EstimateReport opnorm_sweep(const SymbolSpec& sym, std::span<const double> gaps,
                            const SpatialGrid& g, double tol, double s0) {
  const SymbolTable tab(sym, g);
  EstimateReport rep;
  rep.check = "opnorm";
  rep.columns = {"t_minus_s", "norm", "norm_times_gap"};
  std::vector<double> x, y;
  for (double gap : gaps) {
    const double n = operator_slice_norm(tab, s0 + gap, s0);
    x.push_back(gap);
    y.push_back(n);
    rep.rows.push_back({gap, n, n * gap});
  }
  const auto fit = fit_power_law(x, y);
  rep.set("fitted_exponent", fit.slope);
  rep.set("expected_exponent", -1.0);
  rep.tolerance("exponent", tol);
  rep.require("exponent_match", std::abs(fit.slope + 1.0) <= tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Hormander

std::vector<PointPair> sample_pairs(const Filtration& f, const Cube& q, int count,
                                    std::uint64_t seed) {
  std::seed_seq seq{seed};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Box b = f.box(q);
  const int d = f.dim();
  auto draw = [&](double& t, Vec& x) {
    t = b.t0 + U(rng) * (b.t1 - b.t0);
    x = Vec(d);
    for (int j = 0; j < d; ++j) {
      const auto u = static_cast<std::size_t>(j);
      x[j] = b.lo[u] + U(rng) * (b.hi[u] - b.lo[u]);
    }
  };
  std::vector<PointPair> out(static_cast<std::size_t>(count));
  for (auto& p : out) {
    draw(p.s, p.y);
    draw(p.r, p.z);
  }
  return out;
}

SpatialGrid hormander_grid(const SymbolSpec& sym, const Filtration& f, const Cube& q,
                           const HormanderOptions& opt) {
  const double h = std::ldexp(1.0, static_cast<int>(-q.m));
  const double dp = f.time_side(q.m) / f.tau(q.m);
  const double L = opt.extent_factor * h;
  const double gap_min = opt.min_gap_fraction * dp;
  const double xi_max = std::pow(kDecayExponent / gap_min, 1.0 / sym.gamma());
  return SpatialGrid(f.dim(), L, std::min(next_pow2(L * xi_max / kPi), opt.max_points));
}

namespace {

// Per-pair workspace for the Hormander integrals.
class PairIntegrator {
 public:
  PairIntegrator(const SymbolTable& tab, const PointPair& pr, const Vec& corner, double h)
      : tab_(tab), g_(tab.grid()), pr_(pr) {
    const auto n = g_.size();
    phase_y_.resize(n);
    phase_z_.resize(n);
    const auto& xi = tab.frequencies();
    for (std::size_t k = 0; k < n; ++k) {
      double py = 0.0, pz = 0.0;
      for (int a = 0; a < g_.dim(); ++a) {
        py += xi[k][a] * (pr.y[a] - corner[a]);
        pz += xi[k][a] * (pr.z[a] - corner[a]);
      }
      phase_y_[k] = std::polar(1.0, -py);
      phase_z_[k] = std::polar(1.0, -pz);
    }
    inside_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Vec x = g_.point(j);
      bool in = true;
      for (int a = 0; a < g_.dim(); ++a) in = in && x[a] >= -2.0 * h && x[a] < 2.0 * h;
      inside_[j] = in;
    }
  }

  // Source factors exp(int_src^t psi) |xi|^gamma, zero when t <= src.
  void source(double t, double src, std::vector<cplx>& out) {
    if (!(t > src)) {
      out.assign(g_.size(), cplx{0.0, 0.0});
      return;
    }
    tab_.integral(src, t, out);
    const auto& w = tab_.order_weight();
    double peak = 0.0, nyq = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = w[k] * std::exp(out[k]);
      const double a = std::abs(out[k]);
      peak = std::max(peak, a);
      if (g_.nyquist(k)) nyq = std::max(nyq, a);
    }
    if (peak > 0.0 && nyq > kNyquistSentinel * peak) unresolved = true;
  }

  enum class Part { total, i1, i2, ks, kr };

  // Spatial integral at time t; exterior restricts to x outside the box.
  double integrand(double t, Part part, bool exterior) {
    const bool need_s = part != Part::kr, need_r = part == Part::total || part == Part::i2 || part == Part::kr;
    if (need_s) source(t, pr_.s, es_);
    if (need_r) source(t, pr_.r, er_);
    buf_.resize(g_.size());
    for (std::size_t k = 0; k < buf_.size(); ++k) {
      switch (part) {
        case Part::total: buf_[k] = es_[k] * phase_y_[k] - er_[k] * phase_z_[k]; break;
        case Part::i1: buf_[k] = es_[k] * (phase_y_[k] - phase_z_[k]); break;
        case Part::i2: buf_[k] = (es_[k] - er_[k]) * phase_z_[k]; break;
        case Part::ks: buf_[k] = es_[k] * phase_y_[k]; break;
        case Part::kr: buf_[k] = er_[k] * phase_z_[k]; break;
      }
    }
    to_physical(g_, buf_);
    double acc = 0.0;
    for (std::size_t j = 0; j < buf_.size(); ++j)
      if (!exterior || !inside_[j]) acc += std::abs(buf_[j]);
    return acc * g_.cell_volume();
  }

  double integrate(const QuadratureRule& rule, Part part, bool exterior) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * integrand(rule.nodes[i], part, exterior);
    return acc;
  }

  bool unresolved = false;

 private:
  const SymbolTable& tab_;
  const SpatialGrid& g_;
  PointPair pr_;
  std::vector<cplx> phase_y_, phase_z_, es_, er_, buf_;
  std::vector<char> inside_;
};

struct NearResult {
  double value = 0.0;
  double sliver = 0.0;
};

// Exterior integral over t in (a, b) with a graded rule towards a. The
// uncovered sliver next to a is estimated by its length times the
// integrand at the innermost node, or at a + gap_min when (a, b) is
// shorter than gap_min; the exterior mass grows with t - a at short gaps,
// so both overestimate, and neither samples an unresolved slice.
NearResult near_integral(PairIntegrator& pi, double a, double b, double gap_min, int max_panels,
                         int gl, PairIntegrator::Part part) {
  NearResult res;
  const double len = b - a;
  if (!(len > 0.0)) return res;
  const int panels = std::min(max_panels, static_cast<int>(std::floor(std::log2(len / gap_min))));
  if (panels < 1) {
    res.sliver = len * pi.integrand(a + gap_min, part, true);
    return res;
  }
  const auto rule = graded_towards_left(a, b, panels, gl);
  res.value = pi.integrate(rule.rule, part, true);
  const double innermost = *std::min_element(rule.rule.nodes.begin(), rule.rule.nodes.end());
  res.sliver = (rule.skipped_hi - rule.skipped_lo) * pi.integrand(innermost, part, true);
  return res;
}

}  // namespace

EstimateReport hormander_Q(const SymbolSpec& sym, const Filtration& f, const Cube& q,
                           std::span<const PointPair> pairs, const SpatialGrid& g,
                           const HormanderOptions& opt) {
  using Part = PairIntegrator::Part;
  const SymbolTable tab(sym, g);
  const double gamma = sym.gamma();
  const double h = std::ldexp(1.0, static_cast<int>(-q.m));
  const double dp = f.time_side(q.m) / f.tau(q.m);
  const Box box = f.box(q);
  const Box star = f.dilate(q);
  Vec corner(f.dim());
  for (int a = 0; a < f.dim(); ++a) corner[a] = box.lo[static_cast<std::size_t>(a)];
  const double t_far = star.t1;
  const double t_max = box.t0 + opt.tmax_factor * dp;
  const double gap_min = opt.min_gap_fraction * dp;
  const auto far_rule = geometric_panels(box.t0, t_far, t_max, opt.gl_points);

  struct Row {
    double total, far, near, i1, i2, i3, tail, sliver;
    bool unresolved;
  };
  std::vector<Row> rows(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t idx) {
    const PointPair& pr = pairs[idx];
    PairIntegrator pi(tab, pr, corner, h);
    Row row{};
    row.far = pi.integrate(far_rule, Part::total, false);
    row.i1 = pi.integrate(far_rule, Part::i1, false);
    row.i2 = pi.integrate(far_rule, Part::i2, false);
    const double lo = std::min(pr.s, pr.r), hi = std::max(pr.s, pr.r);
    // Decay beyond T_max: (t-s)^{-1-1/gamma} for spatial differences,
    // (t-s)^{-2} for temporal ones.
    const double i1_end = pi.integrand(t_max, Part::i1, false);
    const double i2_end = pi.integrand(t_max, Part::i2, false);
    const double tot_end = pi.integrand(t_max, Part::total, false);
    const double i1_tail = i1_end * (t_max - pr.s) * gamma;
    const double i2_tail = i2_end * (t_max - hi);
    row.tail = tot_end * (t_max - lo) * std::max(gamma, 1.0);
    row.i1 += i1_tail;
    row.i2 += i2_tail;

    // Near-time exterior: t in (lo, t_far), x outside the spatial box.
    NearResult first, second;
    if (hi > lo) first = near_integral(pi, lo, hi, gap_min, opt.near_panels, opt.gl_points, pr.s < pr.r ? Part::ks : Part::kr);
    second = near_integral(pi, hi, t_far, gap_min, opt.near_panels, opt.gl_points, Part::total);
    row.near = first.value + second.value;
    const auto ns = near_integral(pi, pr.s, t_far, gap_min, opt.near_panels, opt.gl_points, Part::ks);
    const auto nr = near_integral(pi, pr.r, t_far, gap_min, opt.near_panels, opt.gl_points, Part::kr);
    row.i3 = ns.value + ns.sliver + nr.value + nr.sliver;
    row.sliver = first.sliver + second.sliver;
    row.total = row.far + row.near + row.tail + row.sliver;
    row.unresolved = pi.unresolved;
    rows[idx] = row;
  });

  EstimateReport rep;
  rep.check = "hormander";
  rep.columns = {"pair", "total", "far", "near", "I1", "I2", "I3", "tail", "sliver", "resolved"};
  double mt = 0, m1 = 0, m2 = 0, m3 = 0, mtail = 0, msl = 0, mb = 0;
  int unresolved = 0;
  bool finite = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    rep.rows.push_back({static_cast<std::int64_t>(i), r.total, r.far, r.near, r.i1, r.i2, r.i3,
                        r.tail, r.sliver, std::int64_t{!r.unresolved}});
    mt = std::max(mt, r.total);
    m1 = std::max(m1, r.i1);
    m2 = std::max(m2, r.i2);
    m3 = std::max(m3, r.i3);
    mb = std::max(mb, r.i1 + r.i2 + r.i3);
    mtail = std::max(mtail, r.tail);
    msl = std::max(msl, r.sliver);
    unresolved += r.unresolved;
    finite = finite && std::isfinite(r.total) && std::isfinite(r.i1 + r.i2 + r.i3);
  }
  rep.set("level", static_cast<double>(q.m));
  rep.set("pairs", static_cast<double>(pairs.size()));
  rep.set("max_total", mt);
  rep.set("max_I1", m1);
  rep.set("max_I2", m2);
  rep.set("max_I3", m3);
  rep.set("max_split_bound", mb);
  rep.set("max_tail_estimate", mtail);
  rep.set("max_sliver_estimate", msl);
  rep.set("T_max", t_max);
  rep.set("grid_L", g.extent());
  rep.set("grid_N", g.points());
  rep.set("under_resolved", unresolved);
  rep.require("finite", finite);
  rep.require("resolved", unresolved == 0);
  return rep;
}

EstimateReport hormander_levels(const SymbolSpec& sym, int dim, std::span<const std::int64_t> levels,
                                int pairs, std::uint64_t seed, const HormanderOptions& opt) {
  const Filtration f(Order::from_double(sym.gamma()), dim);
  EstimateReport rep;
  rep.check = "hormander";
  rep.columns = {"level", "max_total", "max_I1", "max_I2", "max_I3", "max_tail", "max_sliver",
                 "grid_L", "grid_N", "resolved"};
  double lo = INFINITY, hi = 0.0;
  bool ok = true;
  for (std::int64_t m : levels) {
    Cube q;
    q.m = m;
    q.dim = dim;
    const auto pr = sample_pairs(f, q, pairs, seed);
    const auto g = hormander_grid(sym, f, q, opt);
    const auto r = hormander_Q(sym, f, q, pr, g, opt);
    const double mt = r.at("max_total");
    lo = std::min(lo, mt);
    hi = std::max(hi, mt);
    ok = ok && r.pass;
    rep.rows.push_back({m, mt, r.at("max_I1"), r.at("max_I2"), r.at("max_I3"),
                        r.at("max_tail_estimate"), r.at("max_sliver_estimate"), g.extent(),
                        static_cast<std::int64_t>(g.points()), std::int64_t{r.pass}});
  }
  rep.set("pairs", pairs);
  rep.set("envelope", hi);
  rep.set("min_level_max", lo);
  rep.set("level_spread", hi / lo - 1.0);
  rep.require("levels_pass", ok);
  rep.require("bounded", std::isfinite(hi));
  return rep;
}

// ---------------------------------------------------------------------------
// Assumption sweep

namespace {

struct SweepPoint {
  int cond;
  double scale;
  int variant;
  double u;
  double value = 0.0;
  double tail = 0.0;
  bool skipped = false;
  std::string reason;
};

double base_time(const SymbolSpec& s) { return std::isfinite(s.t_begin()) ? s.t_begin() : 0.0; }

std::vector<Vec> directions(int dim) {
  std::vector<Vec> out;
  if (dim == 1) {
    out.push_back(Vec{1.0});
    out.push_back(Vec{-1.0});
  } else {
    Vec e1(dim), diag(dim);
    e1[0] = 1.0;
    for (int a = 0; a < dim; ++a) diag[a] = 1.0 / std::sqrt(static_cast<double>(dim));
    out.push_back(e1);
    out.push_back(diag);
  }
  return out;
}

}  // namespace

EstimateReport assumption1_sweep(const SymbolSpec& sym, const SweepOptions& opt) {
  const double gamma = sym.gamma();
  const int d = sym.dim();
  const double s0 = base_time(sym);
  const double mu = opt.mu > 0.0 ? opt.mu : gamma;
  std::vector<double> us;
  for (int e = opt.log2_u_min; e <= opt.log2_u_max; ++e) us.push_back(std::ldexp(1.0, e));
  const double u_max = us.back(), u_min = us.front();
  const auto dirs = directions(d);

  std::vector<SweepPoint> pts;
  // Work items: one per (condition, scale, variant); each fills all u.
  struct Item {
    int cond;
    double scale;
    int variant;
  };
  std::vector<Item> items;
  for (double c : opt.scales) {
    for (int v = 0; v < 2; ++v) items.push_back({1, c, v});
    for (int v = 0; v < 2; ++v) items.push_back({2, c, v});
    items.push_back({3, c, 0});
  }
  std::vector<std::vector<SweepPoint>> results(items.size());

  parallel_for(items.size(), [&](std::size_t idx) {
    const Item it = items[idx];
    auto& out = results[idx];
    for (double u : us) out.push_back({it.cond, it.scale, it.variant, u, 0.0, 0.0, false, {}});
    const double A = it.scale;
    const double width = std::pow(A, 1.0 / gamma);
    try {
      if (it.cond == 1) {
        const double s = s0;
        const double a = s + A, T = s + opt.tmax_factor * A;
        if (T > sym.t_end()) throw DomainError("window shorter than the sweep horizon");
        const auto g = kernel_grid(d, gamma, A, T - s, 16.0, opt.max_points);
        if (4.0 * u_max * width > 0.25 * g.extent()) throw DomainError("shift exceeds the grid box");
        const SymbolTable tab(sym, g);
        const auto rule = geometric_panels(s, a, T, opt.gl_points);
        const Vec& e = dirs[static_cast<std::size_t>(it.variant)];
        for (auto& p : out) {
          Vec y(d), z(d);
          for (int k = 0; k < d; ++k) {
            y[k] = -0.5 * p.u * width * e[k];
            z[k] = 0.5 * p.u * width * e[k];
          }
          PairIntegrator pi(tab, PointPair{s, y, s, z}, Vec(d), 0.0);
          p.value = pi.integrate(rule, PairIntegrator::Part::total, false);
          p.tail = pi.integrand(T, PairIntegrator::Part::total, false) * (T - s) * gamma;
          p.value += p.tail;
        }
      } else if (it.cond == 2) {
        const double earliest = s0 + (it.variant == 1 ? 0.5 * A : 0.0);
        const double T_rel = opt.tmax_factor * A;
        if (earliest + u_max * A + T_rel > sym.t_end())
          throw DomainError("window shorter than the sweep horizon");
        const auto g = kernel_grid(d, gamma, A, T_rel + u_max * A, 16.0, opt.max_points);
        const SymbolTable tab(sym, g);
        for (auto& p : out) {
          const double s = earliest, r = earliest + p.u * A;
          const double b = r, a = b + A, T = b + T_rel;
          const auto rule = geometric_panels(b, a, T, opt.gl_points);
          PairIntegrator pi(tab, PointPair{s, Vec(d), r, Vec(d)}, Vec(d), 0.0);
          p.value = pi.integrate(rule, PairIntegrator::Part::total, false);
          p.tail = pi.integrand(T, PairIntegrator::Part::total, false) * (T - b);
          p.value += p.tail;
        }
      } else {
        const double s = s0, b = s + A;
        if (b > sym.t_end()) throw DomainError("window shorter than the sweep horizon");
        const double rho_max = width / u_min;
        const double gap_min = A * std::ldexp(1.0, -opt.near_panels);
        const double xi_max = std::pow(kDecayExponent / gap_min, 1.0 / gamma);
        const double L = 16.0 * rho_max;
        const SpatialGrid g(d, L, std::min(next_pow2(L * xi_max / kPi), opt.max_points));
        const SymbolTable tab(sym, g);
        const auto rule = graded_towards_left(s, b, opt.near_panels, opt.gl_points);
        std::vector<double> radius(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) radius[j] = g.point(j).norm();
        auto masses = [&](double t) {
          const auto ks = kernel_slice(tab, t, s, 0.0, KernelKind::K);
          std::vector<double> acc(us.size(), 0.0);
          // Cells straddling |x| = rho count by the fraction outside, so
          // the cutoff has no lattice ties and scales exactly.
          const double dx = g.dx();
          for (std::size_t j = 0; j < ks.values.size(); ++j) {
            const double a = std::abs(ks.values[j]);
            for (std::size_t i = 0; i < us.size(); ++i)
              acc[i] += a * std::clamp((radius[j] - width / us[i]) / dx + 0.5, 0.0, 1.0);
          }
          for (auto& v : acc) v *= g.cell_volume();
          return acc;
        };
        std::vector<double> total(us.size(), 0.0);
        double inner = INFINITY;
        std::vector<double> inner_vals;
        for (std::size_t i = 0; i < rule.rule.nodes.size(); ++i) {
          const auto acc = masses(rule.rule.nodes[i]);
          for (std::size_t k = 0; k < us.size(); ++k) total[k] += rule.rule.weights[i] * acc[k];
          if (rule.rule.nodes[i] < inner) {
            inner = rule.rule.nodes[i];
            inner_vals = acc;
          }
        }
        const double sliver = rule.skipped_hi - rule.skipped_lo;
        for (std::size_t k = 0; k < us.size(); ++k) {
          out[k].tail = sliver * inner_vals[k];
          out[k].value = total[k] + out[k].tail;
        }
      }
    } catch (const DomainError& e) {
      for (auto& p : out) {
        p.skipped = true;
        p.reason = e.what();
      }
    }
  });
  for (auto& r : results) pts.insert(pts.end(), r.begin(), r.end());

  EstimateReport rep;
  rep.check = "assumption1";
  rep.columns = {"condition", "scale", "variant", "u", "value", "tail_estimate", "used"};
  const char* names[] = {"", "i", "ii", "iii"};
  for (int cond = 1; cond <= 3; ++cond) {
    double peak = 0.0;
    for (const auto& p : pts)
      if (p.cond == cond && !p.skipped) peak = std::max(peak, p.value);
    std::vector<double> fx, fy;
    double worst_spread = 0.0;
    bool monotone = true;
    double prev_mean = -1.0;
    int used_configs = 0;
    for (double u : us) {
      double lo = INFINITY, hi = 0.0, sum = 0.0;
      int n = 0;
      for (auto& p : pts) {
        if (p.cond != cond || p.u != u || p.skipped) continue;
        if (!(p.value > opt.floor * peak)) {
          p.skipped = true;
          p.reason = "below floor";
          continue;
        }
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
        sum += p.value;
        ++n;
      }
      if (n == 0) continue;
      used_configs = std::max(used_configs, n);
      worst_spread = std::max(worst_spread, hi / lo - 1.0);
      const double mean = sum / n;
      if (prev_mean >= 0.0 && mean < prev_mean * (1.0 - 1e-9)) monotone = false;
      prev_mean = mean;
      if (u <= std::ldexp(1.0, opt.fit_log2_u_max)) {
        fx.push_back(u);
        fy.push_back(mean);
      }
    }
    const std::string key = std::string("cond_") + names[cond];
    rep.set(key + "_collapse_spread", worst_spread);
    rep.set(key + "_configurations", used_configs);
    rep.require(key + "_collapse", used_configs > 0 && worst_spread <= opt.collapse_tol);
    rep.require(key + "_monotone", monotone);
    if (fx.size() >= 2) {
      const double slope = fit_power_law(fx, fy).slope;
      rep.set(key + "_small_u_slope", slope);
      if (cond == 3) {
        const bool even = std::abs(gamma / 2.0 - std::round(gamma / 2.0)) < 1e-12;
        rep.set("cond_iii_mu", mu);
        if (even) {
          rep.note("condition (iii): gamma is an even integer, the kernel decays faster than any power; only slope >= mu is checked");
          rep.require(key + "_slope", slope >= mu - opt.slope_tol);
        } else {
          rep.require(key + "_slope", std::abs(slope - mu) <= opt.slope_tol);
        }
      } else {
        rep.require(key + "_slope", std::abs(slope - 1.0) <= opt.slope_tol);
      }
    } else {
      rep.note("condition (" + std::string(names[cond]) + "): fewer than two usable points in the fit window");
      rep.require(key + "_slope", false);
    }
  }
  int skipped = 0;
  for (const auto& p : pts) {
    if (p.skipped) {
      ++skipped;
      rep.note("skipped (" + std::string(names[p.cond]) + ") scale " + fmt(p.scale) + " variant " +
               std::to_string(p.variant) + " u " + fmt(p.u) + ": " + p.reason);
    }
    rep.rows.push_back({std::string(names[p.cond]), p.scale, std::int64_t{p.variant}, p.u, p.value,
                        p.tail, std::int64_t{!p.skipped}});
  }
  rep.set("gamma", gamma);
  rep.set("skipped", skipped);
  rep.tolerance("collapse", opt.collapse_tol);
  rep.tolerance("slope", opt.slope_tol);
  return rep;
}

}  // namespace czkit
