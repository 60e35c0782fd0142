#include "czkit/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "czkit/errors.hpp"
#include "czkit/kernels.hpp"
#include "czkit/parallel.hpp"
#include "czkit/quadrature.hpp"

namespace czkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::mt19937_64 member_rng(std::uint64_t seed, int member) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member)};
  return std::mt19937_64(seq);
}

// Complex normal coefficients on the central third of the lattice, in
// physical space. Zero mean mode excluded so G never sees a null input.
std::vector<cplx> band_limited_field(const SpatialGrid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<cplx> spec(g.size());
  const int cut = g.points() / 6;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto j = g.unflatten(k);
    bool inside = true, zero = true;
    for (int a = 0; a < g.dim(); ++a) {
      const int w = g.wavenumber(j[static_cast<std::size_t>(a)]);
      inside = inside && std::abs(w) < cut;
      zero = zero && w == 0;
    }
    const double re = nd(rng), im = nd(rng);
    if (inside && !zero) spec[k] = {re, im};
  }
  to_physical(g, spec);
  return spec;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> ud(std::log(lo), std::log(hi));
  return std::exp(ud(rng));
}

// Ratio num/den with the 0/0 convention of a skipped sample.
double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

struct TripleNorm {
  double ratio = 0.0;
  double lambda_ratio = 0.0;
};

TripleNorm triple_norm(const SymbolSpec& s, const GridFunction& f, double lambda,
                       const MixedNormSpec& spec) {
  const GridFunction u = solve_resolvent(s, f, lambda);
  const GridFunction ut = time_derivative(s, u, lambda);
  const GridFunction lu = frac_laplacian(u, s.gamma());
  const double nf = mixed_norm(f, spec);
  const double nu = mixed_norm(u, spec);
  const double num = mixed_norm(ut, spec) + mixed_norm(lu, spec) + lambda * nu;
  return {ratio(num, nf), ratio(lambda * nu, nf)};
}

}  // namespace

void MixedNormSpec::validate() const {
  if (!(p > 1.0 && std::isfinite(p))) throw ValidationError("mixed norm needs 1 < p < inf");
  if (!(q > 1.0 && std::isfinite(q))) throw ValidationError("mixed norm needs 1 < q < inf");
}

std::vector<double> time_weights(const SpaceTimeGrid& g) {
  std::vector<double> w(g.nt(), 0.0);
  for (std::size_t n = 0; n + 1 < g.nt(); ++n) w[n] = g.t[n + 1] - g.t[n];
  return w;
}

double spatial_norm(std::span<const cplx> v, const SpatialGrid& g, double p) {
  double acc = 0.0;
  if (p == 2.0) {
    for (const cplx& x : v) acc += std::norm(x);
    return std::sqrt(acc * g.cell_volume());
  }
  for (const cplx& x : v) acc += std::pow(std::abs(x), p);
  return std::pow(acc * g.cell_volume(), 1.0 / p);
}

double mixed_norm(const GridFunction& u, const MixedNormSpec& spec) {
  const auto w = time_weights(u.grid);
  std::vector<double> slice(u.grid.nt(), 0.0);
  parallel_for(u.grid.nt(), [&](std::size_t n) {
    if (w[n] > 0.0) slice[n] = spatial_norm(u.slice(n), u.grid.space, spec.p);
  });
  double acc = 0.0;
  for (std::size_t n = 0; n < slice.size(); ++n) acc += w[n] * std::pow(slice[n], spec.q);
  return std::pow(acc, 1.0 / spec.q);
}

double l1_norm(const GridFunction& u) {
  const auto w = time_weights(u.grid);
  double acc = 0.0;
  for (std::size_t n = 0; n < u.grid.nt(); ++n) {
    if (w[n] == 0.0) continue;
    double s = 0.0;
    for (const cplx& x : u.slice(n)) s += std::abs(x);
    acc += w[n] * s;
  }
  return acc * u.grid.space.cell_volume();
}

std::string to_string(Generator g) {
  switch (g) {
    case Generator::gaussian_field: return "gaussian_field";
    case Generator::bumps: return "bumps";
    case Generator::jumps: return "jumps";
  }
  return "?";
}

Generator parse_generator(const std::string& name) {
  if (name == "gaussian_field") return Generator::gaussian_field;
  if (name == "bumps") return Generator::bumps;
  if (name == "jumps") return Generator::jumps;
  throw ValidationError("unknown ensemble generator '" + name + "'");
}

void EnsembleSpec::validate() const {
  if (count < 1) throw ValidationError("ensemble count must be >= 1");
}

GridFunction ensemble_member(const EnsembleSpec& ens, int member, const SpaceTimeGrid& g) {
  if (g.nt() < 3) throw DomainError("ensemble needs at least three time nodes");
  auto rng = member_rng(ens.seed, member);
  GridFunction f = GridFunction::zeros(g, Role::f);
  const auto& sp = g.space;
  const std::size_t last = g.nt() - 1;  // f vanishes at nodes 0 and last

  switch (ens.generator) {
    case Generator::gaussian_field:
      for (std::size_t n = 1; n < last; ++n) {
        const auto field = band_limited_field(sp, rng);
        std::copy(field.begin(), field.end(), f.slice(n).begin());
      }
      break;
    case Generator::bumps: {
      const double L = sp.extent();
      Vec c(sp.dim());
      std::uniform_real_distribution<double> uc(-0.25 * L, 0.25 * L);
      for (int a = 0; a < sp.dim(); ++a) c[a] = uc(rng);
      const double sigma = 0.25 * log_uniform(rng, L / 32.0, L / 4.0);
      std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
      const cplx amp = std::polar(1.0, uphase(rng));
      const double cells_max = static_cast<double>(last - 1);
      const auto dur = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(log_uniform(rng, 1.0, std::max(cells_max, 1.0 + 1e-12)))),
          1, last - 1);
      std::uniform_int_distribution<std::size_t> ustart(1, last - dur);
      const std::size_t start = ustart(rng);
      std::vector<cplx> bump(sp.size());
      for (std::size_t k = 0; k < sp.size(); ++k) {
        const Vec x = sp.point(k);
        double r2 = 0.0;
        for (int a = 0; a < sp.dim(); ++a) {
          // nearest periodic image
          double dxa = x[a] - c[a];
          dxa -= L * std::nearbyint(dxa / L);
          r2 += dxa * dxa;
        }
        bump[k] = amp * std::exp(-0.5 * r2 / (sigma * sigma));
      }
      for (std::size_t n = start; n < start + dur; ++n)
        std::copy(bump.begin(), bump.end(), f.slice(n).begin());
      break;
    }
    case Generator::jumps: {
      const auto field = band_limited_field(sp, rng);
      std::uniform_int_distribution<int> ujumps(1, 8);
      const int jumps = ujumps(rng);
      std::uniform_int_distribution<std::size_t> unode(1, last - 1);
      std::vector<std::size_t> at;
      for (int i = 0; i < jumps; ++i) at.push_back(unode(rng));
      std::sort(at.begin(), at.end());
      std::normal_distribution<double> nd(0.0, 1.0);
      double h = nd(rng);
      std::size_t next = 0;
      for (std::size_t n = 1; n < last; ++n) {
        while (next < at.size() && at[next] <= n) {
          h = nd(rng);
          ++next;
        }
        auto sl = f.slice(n);
        for (std::size_t k = 0; k < sp.size(); ++k) sl[k] = h * field[k];
      }
      break;
    }
  }
  return f;
}

bool is_real_symbol(const SymbolSpec& s, const SpatialGrid& g) {
  const SymbolTable tab(s, g);
  for (std::size_t p = 0; p < s.pieces().size(); ++p) {
    double im = 0.0, mx = 0.0;
    for (const cplx& v : tab.piece(p)) {
      im = std::max(im, std::abs(v.imag()));
      mx = std::max(mx, std::abs(v));
    }
    if (im > 1e-14 * mx) return false;
  }
  return true;
}

bool has_positive_kernel(const SymbolSpec& s, const SpatialGrid& g) {
  switch (s.kind()) {
    case SymbolKind::levy: return true;
    case SymbolKind::fractional: return s.gamma() <= 2.0 && is_real_symbol(s, g);
    case SymbolKind::poly2m: return s.poly_order() == 1 && is_real_symbol(s, g);
    default: return false;
  }
}

EstimateReport apriori_ratio(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g,
                             double lambda, const MixedNormSpec& spec) {
  spec.validate();
  ens.validate();
  if (!(lambda >= 0.0)) throw DomainError("apriori_ratio needs lambda >= 0");
  g.check_alignment(s);

  EstimateReport rep;
  rep.check = "apriori";
  rep.columns = {"member", "ratio", "ratio_frozen", "ratio_permuted", "lambda_ratio"};

  const std::size_t pieces = s.pieces().size();
  const bool permutable = pieces >= 2 && (s.kind() == SymbolKind::fractional ||
                                          s.kind() == SymbolKind::poly2m ||
                                          s.kind() == SymbolKind::levy);
  std::vector<SymbolSpec> variants{s};
  if (permutable) {
    std::vector<std::size_t> perm(pieces);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = member_rng(ens.seed, -1);
    std::shuffle(perm.begin(), perm.end(), rng);
    variants.push_back(s.frozen(0));
    variants.push_back(s.with_permuted_schedule(perm));
    std::string text = "permutation:";
    for (auto p : perm) text += " " + std::to_string(p);
    rep.note(text);
  } else {
    rep.note("schedule has a single piece or a non-leaf kind: stability check skipped");
  }

  const std::size_t nv = variants.size();
  const auto count = static_cast<std::size_t>(ens.count);
  std::vector<TripleNorm> res(count * nv);
  parallel_for(count, [&](std::size_t i) {
    const GridFunction f = ensemble_member(ens, static_cast<int>(i), g);
    for (std::size_t v = 0; v < nv; ++v) res[i * nv + v] = triple_norm(variants[v], f, lambda, spec);
  });

  std::vector<double> r(count), rf(count), rp(count), lr(count);
  for (std::size_t i = 0; i < count; ++i) {
    r[i] = res[i * nv].ratio;
    lr[i] = res[i * nv].lambda_ratio;
    rf[i] = permutable ? res[i * nv + 1].ratio : r[i];
    rp[i] = permutable ? res[i * nv + 2].ratio : r[i];
    for (std::size_t v = 0; v < nv; ++v) lr[i] = std::max(lr[i], res[i * nv + v].lambda_ratio);
    rep.rows.push_back({static_cast<std::int64_t>(i), r[i], rf[i], rp[i], lr[i]});
  }

  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  rep.set("lambda", lambda);
  rep.set("p", spec.p);
  rep.set("q", spec.q);
  rep.set("members", static_cast<double>(count));
  rep.set("max_ratio", sorted.back());
  rep.set("median_ratio", sorted[count / 2]);
  rep.set("min_ratio", sorted.front());
  rep.set("mean_ratio", std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(count));
  const double mf = max_of(rf), mp = max_of(rp);
  rep.set("max_ratio_frozen", mf);
  rep.set("max_ratio_permuted", mp);
  rep.set("permuted_over_frozen", ratio(mp, mf));
  rep.set("max_lambda_ratio", max_of(lr));

  bool finite = true;
  for (const auto& t : res) finite = finite && std::isfinite(t.ratio);
  rep.require("finite", finite);
  if (permutable) {
    rep.tolerance("stability_factor", 2.0);
    const double q = ratio(mp, mf);
    rep.require("stability", q <= 2.0 && q >= 0.5);
  }
  if (lambda > 0.0 && is_real_symbol(s, g.space) && (spec.p == 2.0 || has_positive_kernel(s, g.space))) {
    rep.tolerance("lambda_ratio_bound", 1.0 + 1e-6);
    rep.require("lambda_bound", max_of(lr) <= 1.0 + 1e-6);
  }
  return rep;
}

EstimateReport resolvent_bounds(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g,
                                std::span<const double> lambdas, const MixedNormSpec& spec,
                                double tol) {
  spec.validate();
  ens.validate();
  if (lambdas.size() < 2) throw DomainError("resolvent_bounds needs two or more lambdas");
  for (double l : lambdas)
    if (!(l > 0.0)) throw DomainError("resolvent_bounds needs lambda > 0");
  g.check_alignment(s);

  EstimateReport rep;
  rep.check = "resolvent";
  rep.columns = {"lambda", "member", "sup_ratio", "mixed_ratio"};

  const std::size_t nl = lambdas.size();
  const auto count = static_cast<std::size_t>(ens.count);
  const MixedNormSpec pp{spec.p, spec.p};
  std::vector<double> sup(nl * count), mixed(nl * count);
  parallel_for(count, [&](std::size_t i) {
    const GridFunction f = ensemble_member(ens, static_cast<int>(i), g);
    const double fp = mixed_norm(f, pp), fm = mixed_norm(f, spec);
    for (std::size_t l = 0; l < nl; ++l) {
      const GridFunction u = solve_resolvent(s, f, lambdas[l]);
      double m = 0.0;
      for (std::size_t n = 0; n < g.nt(); ++n) m = std::max(m, spatial_norm(u.slice(n), g.space, spec.p));
      sup[l * count + i] = ratio(m, fp);
      mixed[l * count + i] = ratio(mixed_norm(u, spec), fm);
    }
  });

  const double t0 = g.t.front();
  std::vector<double> env_sup(nl), env_mixed(nl), l1_scaled(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t i = 0; i < count; ++i) {
      rep.rows.push_back({lambdas[l], static_cast<std::int64_t>(i), sup[l * count + i], mixed[l * count + i]});
      env_sup[l] = std::max(env_sup[l], sup[l * count + i]);
      env_mixed[l] = std::max(env_mixed[l], mixed[l * count + i]);
    }
    const auto ks = kernel_slice(s, t0 + 1.0, t0, lambdas[l], g.space, KernelKind::p_lambda);
    l1_scaled[l] = l1_norm(ks) * std::exp(lambdas[l]);
  }

  const std::vector<double> lam(lambdas.begin(), lambdas.end());
  const auto fs = fit_power_law(lam, env_sup);
  const auto fm = fit_power_law(lam, env_mixed);
  const double target_sup = -(spec.p - 1.0) / spec.p;
  double spread = 0.0;
  for (double v : l1_scaled) spread = std::max(spread, std::abs(v / l1_scaled.front() - 1.0));

  rep.set("p", spec.p);
  rep.set("q", spec.q);
  rep.set("members", static_cast<double>(count));
  for (std::size_t l = 0; l < nl; ++l) {
    const std::string tag = format_double(lambdas[l]);
    rep.set("env_sup@" + tag, env_sup[l]);
    rep.set("env_mixed@" + tag, env_mixed[l]);
    rep.set("l1_scaled@" + tag, l1_scaled[l]);
  }
  rep.set("sup_slope", fs.slope);
  rep.set("sup_slope_target", target_sup);
  rep.set("mixed_slope", fm.slope);
  rep.set("mixed_slope_target", -1.0);
  rep.set("l1_scaled_spread", spread);
  rep.tolerance("slope", tol);
  rep.tolerance("l1_scaled_spread", 1e-12);
  rep.require("sup_exponent", std::abs(fs.slope - target_sup) <= tol);
  rep.require("mixed_exponent", std::abs(fm.slope + 1.0) <= tol);
  rep.require("l1_factorization", spread <= 1e-12);
  return rep;
}

EstimateReport g_l2_bound(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g) {
  ens.validate();
  g.check_alignment(s);
  EstimateReport rep;
  rep.check = "gl2";
  rep.columns = {"member", "ratio"};
  const auto count = static_cast<std::size_t>(ens.count);
  const MixedNormSpec l2{2.0, 2.0};
  std::vector<double> r(count);
  parallel_for(count, [&](std::size_t i) {
    const GridFunction f = ensemble_member(ens, static_cast<int>(i), g);
    r[i] = ratio(mixed_norm(apply_G(s, f), l2), mixed_norm(f, l2));
  });
  for (std::size_t i = 0; i < count; ++i) rep.rows.push_back({static_cast<std::int64_t>(i), r[i]});

  const double mx = max_of(r);
  rep.set("members", static_cast<double>(count));
  rep.set("max_ratio", mx);
  bool finite = true;
  for (double v : r) finite = finite && std::isfinite(v);
  rep.require("finite", finite);

  if (s.kind() == SymbolKind::fractional && is_real_symbol(s, g.space)) {
    // Row and column sums of the per-mode kernel are at most 1 / min a.
    double amin = std::numeric_limits<double>::infinity();
    for (const auto& p : s.pieces()) amin = std::min(amin, std::get<cplx>(p.coeffs).real());
    const double bound = (1.0 / amin) * (1.0 + 1e-6);
    rep.set("bound", bound);
    rep.tolerance("relative", 1e-6);
    rep.require("contraction", mx <= bound);
  }
  return rep;
}

EstimateReport weak11_check(const SymbolSpec& s, const GridFunction& f,
                            std::span<const double> alpha_grid) {
  const GridFunction gf = apply_G(s, f);
  const auto w = time_weights(f.grid);
  const double dv = f.grid.space.cell_volume();
  const double nf = l1_norm(f);

  // Sorted (|Gf|, weight) pairs give every level-set measure by a suffix sum.
  std::vector<std::pair<double, double>> vals;
  double gmax = 0.0;
  for (std::size_t n = 0; n < f.grid.nt(); ++n) {
    if (w[n] == 0.0) continue;
    for (const cplx& v : gf.slice(n)) {
      vals.emplace_back(std::abs(v), w[n] * dv);
      gmax = std::max(gmax, std::abs(v));
    }
  }
  std::sort(vals.begin(), vals.end());
  std::vector<double> suffix(vals.size() + 1, 0.0);
  for (std::size_t i = vals.size(); i-- > 0;) suffix[i] = suffix[i + 1] + vals[i].second;

  EstimateReport rep;
  rep.check = "weak11";
  rep.columns = {"alpha", "measure", "ratio"};
  double sup = 0.0, arg = 0.0;
  for (double a : alpha_grid) {
    const auto it = std::upper_bound(vals.begin(), vals.end(), a,
                                     [](double x, const std::pair<double, double>& p) { return x < p.first; });
    const double meas = suffix[static_cast<std::size_t>(it - vals.begin())];
    const double rr = ratio(a * meas, nf);
    rep.rows.push_back({a, meas, rr});
    if (rr > sup) {
      sup = rr;
      arg = a;
    }
  }
  rep.set("l1_f", nf);
  rep.set("max_abs_Gf", gmax);
  rep.set("sup_ratio", sup);
  rep.set("argmax_alpha", arg);
  rep.require("finite", std::isfinite(sup));
  return rep;
}

SpaceTimeGrid refine(const SpaceTimeGrid& g) {
  const auto& sp = g.space;
  SpaceTimeGrid out{SpatialGrid(sp.dim(), sp.extent(), 2 * sp.points()), {}};
  for (std::size_t n = 0; n + 1 < g.nt(); ++n) {
    out.t.push_back(g.t[n]);
    out.t.push_back(0.5 * (g.t[n] + g.t[n + 1]));
  }
  out.t.push_back(g.t.back());
  return out;
}

GridFunction near_delta(const SpaceTimeGrid& g, const SpaceTimeGrid& coarse) {
  if (coarse.nt() < 9) throw DomainError("near_delta needs at least nine coarse nodes");
  const std::size_t n0 = (coarse.nt() - 1) / 8;
  const double ta = coarse.t[n0], tb = coarse.t[n0 + 1];
  const double sigma = 4.0 * coarse.space.dx();
  const int d = g.space.dim();
  const double norm = std::pow(2.0 * kPi * sigma * sigma, -0.5 * d) / (tb - ta);
  GridFunction f = GridFunction::zeros(g, Role::f);
  for (std::size_t n = 0; n + 1 < g.nt(); ++n) {
    if (g.t[n] < ta || g.t[n] >= tb) continue;
    auto sl = f.slice(n);
    for (std::size_t k = 0; k < g.space.size(); ++k) {
      const Vec x = g.space.point(k);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
      sl[k] = norm * std::exp(-0.5 * r2 / (sigma * sigma));
    }
  }
  return f;
}

EstimateReport weak11_refinement(const SymbolSpec& s, const SpaceTimeGrid& coarse, int refinements,
                                 double tol, int alphas) {
  if (refinements < 1 || alphas < 2) throw DomainError("weak11_refinement needs refinements >= 1, alphas >= 2");
  std::vector<SpaceTimeGrid> grids{coarse};
  for (int i = 0; i < refinements; ++i) grids.push_back(refine(grids.back()));
  for (const auto& g : grids) g.check_alignment(s);

  double gmax = 0.0;
  {
    const GridFunction gf = apply_G(s, near_delta(coarse, coarse));
    for (const cplx& v : gf.values) gmax = std::max(gmax, std::abs(v));
  }
  if (!(gmax > 0.0)) throw DomainError("weak11_refinement: G f vanishes on the coarse grid");
  std::vector<double> alpha(static_cast<std::size_t>(alphas));
  for (int i = 0; i < alphas; ++i)
    alpha[static_cast<std::size_t>(i)] = gmax * std::pow(1e-3, 1.0 - static_cast<double>(i) / (alphas - 1));

  EstimateReport rep;
  rep.check = "weak11";
  rep.columns = {"level", "N", "nodes", "alpha", "measure", "ratio"};
  std::vector<double> sups;
  for (std::size_t l = 0; l < grids.size(); ++l) {
    const auto sub = weak11_check(s, near_delta(grids[l], coarse), alpha);
    for (const auto& row : sub.rows)
      rep.rows.push_back({static_cast<std::int64_t>(l), static_cast<std::int64_t>(grids[l].space.points()),
                          static_cast<std::int64_t>(grids[l].nt()), row[0], row[1], row[2]});
    sups.push_back(sub.at("sup_ratio"));
    rep.set("sup_ratio@" + std::to_string(l), sups.back());
    rep.set("l1_f@" + std::to_string(l), sub.at("l1_f"));
  }
  double worst = 0.0;
  for (std::size_t l = 1; l < sups.size(); ++l) worst = std::max(worst, std::abs(sups[l] / sups[l - 1] - 1.0));
  rep.set("max_refinement_change", worst);
  rep.tolerance("refinement_change", tol);
  bool finite = true;
  for (double v : sups) finite = finite && std::isfinite(v) && v > 0.0;
  rep.require("finite", finite);
  rep.require("refinement_stable", worst <= tol);
  return rep;
}

}  // namespace czkit
