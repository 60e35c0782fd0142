#include <cmath>
#include <numbers>
#include <random>

#include "czkit/errors.hpp"
#include "czkit/kernels.hpp"
#include "doctest.h"

using namespace czkit;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_error(const KernelSlice& ks, double (*oracle)(double x, double tau), double tau) {
  double err = 0.0;
  for (std::size_t j = 0; j < ks.values.size(); ++j) {
    const double x = ks.grid.coord(static_cast<int>(j));
    err = std::max(err, std::abs(ks.values[j] - cplx{oracle(x, tau), 0.0}));
  }
  return err;
}

double heat(double x, double tau) { return std::exp(-x * x / (4.0 * tau)) / std::sqrt(4.0 * kPi * tau); }

// -d^2/dx^2 of the heat kernel.
double heat_K(double x, double tau) { return heat(x, tau) * (1.0 / (2.0 * tau) - x * x / (4.0 * tau * tau)); }

// Cauchy kernel periodised over period 32.
double cauchy_periodic(double x, double tau) {
  const double L = 32.0, w = 2.0 * kPi / L;
  return std::sinh(w * tau) / (L * (std::cosh(w * tau) - std::cos(w * x)));
}

}  // namespace

TEST_CASE("heat kernel matches the Gaussian") {
  const SpatialGrid g(1, 40.0, 4096);
  const auto heat_sym = make_fractional(cplx{1.0, 0.0}, 2.0, 1);
  for (double tau : {0.25, 1.0, 4.0}) {
    const auto ks = kernel_slice(heat_sym, 1.0 + tau, 1.0, 0.0, g);
    CHECK_FALSE(ks.under_resolved);
    CHECK(max_abs_error(ks, heat, tau) <= 1e-6);
    CHECK(imag_ratio(ks) < 1e-12);
    const auto kk = kernel_slice(heat_sym, 1.0 + tau, 1.0, 0.0, g, KernelKind::K);
    CHECK(max_abs_error(kk, heat_K, tau) <= 1e-6);
  }
  // p_lambda = e^{-lambda tau} p_0
  const auto p0 = kernel_slice(heat_sym, 2.0, 1.0, 0.0, g);
  const auto p3 = kernel_slice(heat_sym, 2.0, 1.0, 3.0, g);
  for (std::size_t j = 0; j < p0.values.size(); j += 97)
    CHECK(std::abs(p3.values[j] - std::exp(-3.0) * p0.values[j]) <= 1e-15);
}

TEST_CASE("Cauchy kernel matches the periodised closed form") {
  const SpatialGrid g(1, 32.0, 4096);
  const auto cauchy = make_fractional(cplx{1.0, 0.0}, 1.0, 1);
  for (double tau : {0.125, 0.5, 2.0}) {
    const auto ks = kernel_slice(cauchy, tau, 0.0, 0.0, g);
    CHECK(max_abs_error(ks, cauchy_periodic, tau) <= 1e-10);
  }
}

TEST_CASE("causal indicator") {
  const SpatialGrid g(1, 8.0, 64);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  CHECK(kernel_slice(s, 1.0, 1.0, 0.0, g).is_zero());
  CHECK(kernel_slice(s, 0.5, 1.0, 0.0, g).is_zero());
  CHECK(l1_norm(kernel_slice(s, 0.5, 1.0, 0.0, g)) == 0.0);
  CHECK(operator_slice_norm(s, 0.5, 1.0, g) == 0.0);
  CHECK(scaled_profile(s, 0.5, 1.0, g).empty());
}

TEST_CASE("L1 factorisation in lambda") {
  const SpatialGrid g(1, 64.0, 2048);
  std::vector<TimePiece> p{{0.0, 1.0, cplx{1.0, 0.3}}, {1.0, 4.0, cplx{2.0, -0.5}}};
  const auto s = make_fractional(p, 1.5, 1);
  const SymbolTable tab(s, g);
  const double base = l1_norm(kernel_slice(tab, 2.5, 0.5, 0.0, KernelKind::p_lambda));
  for (double lam : {0.5, 1.0, 4.0}) {
    const double l1 = l1_norm(kernel_slice(tab, 2.5, 0.5, lam, KernelKind::p_lambda));
    CHECK(l1 * std::exp(lam * 2.0) == doctest::Approx(base).epsilon(1e-12));
  }
  const std::vector<double> gaps{0.25, 0.5, 1.0}, lams{0.0, 1.0, 2.0};
  const auto rep = l1_sweep(s, gaps, lams, g, 0.5);
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 9);
}

TEST_CASE("heat moment closed form") {
  const SpatialGrid g(1, 80.0, 8192);
  const auto heat_sym = make_fractional(cplx{1.0, 0.0}, 2.0, 1);
  for (double mu : {0.0, 0.25, 0.45}) {
    for (double tau : {0.5, 2.0}) {
      const auto ks = kernel_slice(heat_sym, tau, 0.0, 0.0, g);
      // Riemann sum of the exact Gaussian: isolates the spectral inversion.
      double riemann = 0.0;
      for (int j = 0; j < g.points(); ++j) riemann += std::pow(std::abs(g.coord(j)), mu) * heat(g.coord(j), tau) * g.dx();
      CHECK(moment(ks, mu) == doctest::Approx(riemann).epsilon(1e-9));
      // The continuum value; the kink of |x|^mu at 0 costs O(dx^{1+mu}).
      const double exact = std::pow(4.0 * tau, mu / 2.0) * std::tgamma((1.0 + mu) / 2.0) / std::sqrt(kPi);
      CHECK(moment(ks, mu) == doctest::Approx(exact).epsilon(2.0 * std::pow(g.dx(), 1.0 + mu)));
    }
  }
  CHECK(moment_limit(1, 2.0, MomentRange::proof) == 0.5);
  CHECK(moment_limit(2, 2.0, MomentRange::proof) == 1.0);
  CHECK(moment_limit(3, 1.5, MomentRange::proof) == 0.5);
  CHECK(moment_limit(1, 1.5, MomentRange::finite) == 1.5);
  const auto ks = kernel_slice(heat_sym, 1.0, 0.0, 0.0, g);
  CHECK_THROWS_AS(moment(ks, 0.5), DomainError);
  CHECK_NOTHROW(moment(ks, 0.5, MomentRange::finite));
}

TEST_CASE("moment and operator-norm exponents for a fractional symbol") {
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  const std::vector<double> gaps{0.125, 0.25, 0.5, 1.0};
  const auto g = kernel_grid(1, 1.5, gaps.front(), gaps.back(), 256.0);
  const auto mom = moment_sweep(s, 0.4, gaps, g, MomentRange::proof);
  CHECK(mom.pass);
  CHECK(mom.at("fitted_slope") == doctest::Approx(0.4 / 1.5 - 1.0).epsilon(0.05));
  const auto op = opnorm_sweep(s, gaps, g);
  CHECK(op.pass);
  CHECK(op.at("fitted_exponent") == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("operator norm scales like 1/(t - s)") {
  // Self-similarity of a homogeneous symbol: ||K(tau)||_1 tau is constant
  // when the box scales with tau^{1/gamma}.
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  const SpatialGrid g(1, 256.0, 1 << 14);
  const double n1 = operator_slice_norm(s, 1.0, 0.0, g);
  const double c = 8.0;
  const double n8 = operator_slice_norm(s, c, 0.0, g.scaled(std::pow(c, 1.0 / 1.5)));
  CHECK(n8 * c == doctest::Approx(n1).epsilon(1e-10));
}

TEST_CASE("shift equivariance") {
  const SpatialGrid g(2, 16.0, 64);
  const auto s = make_fractional(cplx{1.0, 0.2}, 1.5, 2);
  const SymbolTable tab(s, g);
  const auto base = kernel_slice(tab, 1.0, 0.0, 0.5, KernelKind::K);
  const int sx = 5, sy = -3;
  const Vec shift{sx * g.dx(), sy * g.dx()};
  const auto moved = kernel_slice(tab, 1.0, 0.0, 0.5, KernelKind::K, &shift);
  double scale = 0.0;
  for (const auto& v : base.values) scale = std::max(scale, std::abs(v));
  const int N = g.points();
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const int si = ((i - sx) % N + N) % N, sj = ((j - sy) % N + N) % N;
      const auto a = moved.values[static_cast<std::size_t>(i * N + j)];
      const auto b = base.values[static_cast<std::size_t>(si * N + sj)];
      REQUIRE(std::abs(a - b) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("spectral transforms are inverse") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int d : {1, 2, 3}) {
    const SpatialGrid g(d, 10.0, 16);
    std::vector<cplx> v(g.size());
    for (auto& x : v) x = {n01(rng), n01(rng)};
    auto w = v;
    to_spectral(g, w);
    to_physical(g, w);
    for (std::size_t j = 0; j < v.size(); ++j) CHECK(std::abs(w[j] - v[j]) <= 1e-13);
  }
  // The constant 1 has spectrum L^d at xi = 0 under the centred convention.
  const SpatialGrid g(1, 10.0, 16);
  std::vector<cplx> one(g.size(), cplx{1.0, 0.0});
  to_spectral(g, one);
  CHECK(std::abs(one[0] - cplx{10.0, 0.0}) <= 1e-13);
  for (std::size_t j = 1; j < one.size(); ++j) CHECK(std::abs(one[j]) <= 1e-13);
}

TEST_CASE("time integral over schedule pieces") {
  std::vector<TimePiece> p{{0.0, 1.0, cplx{1.0, 0.0}}, {1.0, 3.0, cplx{2.0, 0.0}}};
  const auto s = make_fractional(p, 2.0, 1);
  // -(0.5 * 1 + 1.5 * 2) |xi|^2 at xi = 2
  CHECK(std::abs(time_integral(s, 0.5, 2.5, Vec{2.0}) - cplx{-14.0, 0.0}) <= 1e-14);
  CHECK(time_integral(s, 1.0, 1.0, Vec{2.0}) == cplx{0.0, 0.0});
  const SymbolTable tab(s, SpatialGrid(1, 8.0, 16));
  CHECK_THROWS_AS(tab.overlaps(0.5, 3.5), DomainError);
  const auto ov = tab.overlaps(0.5, 2.5);
  REQUIRE(ov.size() == 2);
  CHECK(ov[0].second == 0.5);
  CHECK(ov[1].second == 1.5);
}

TEST_CASE("scaled profile is bounded by the kappa envelope") {
  const SpatialGrid g(1, 64.0, 1024);
  std::vector<TimePiece> p{{0.0, 1.0, cplx{1.0, 0.0}}, {1.0, 4.0, cplx{3.0, 0.5}}};
  const auto s = make_fractional(p, 1.5, 1);
  for (double tau : {0.5, 1.5, 3.0}) CHECK(scaled_profile_ratio(s, 0.5 + tau, 0.5, g) <= 1.0 + 1e-12);
}

TEST_CASE("Hormander integral is invariant across levels for gamma = 2") {
  const auto heat_sym = make_fractional(cplx{1.0, 0.0}, 2.0, 1);
  const std::vector<std::int64_t> levels{-1, 0, 1};
  const auto rep = hormander_levels(heat_sym, 1, levels, 4, 17);
  CHECK(rep.pass);
  CHECK(rep.at("level_spread") <= 1e-6);
  CHECK(std::isfinite(rep.at("envelope")));
}

TEST_CASE("sample_pairs lie in the cube and rescale with the level") {
  const Filtration f(Order::parse("1.5"), 2);
  std::vector<double> origin{0.0, 0.0};
  const Cube q0 = f.locate(0.0, origin, 0), q1 = f.locate(0.0, origin, 1);
  const auto a = sample_pairs(f, q0, 16, 9), b = sample_pairs(f, q1, 16, 9);
  REQUIRE(a.size() == 16);
  const Box bx = f.box(q0);
  for (const auto& pp : a) {
    CHECK(bx.contains(pp.s, pp.y.span()));
    CHECK(bx.contains(pp.r, pp.z.span()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].y[0] == doctest::Approx(0.5 * a[i].y[0]).epsilon(1e-14));
    CHECK(b[i].s == doctest::Approx(f.time_side(1) / f.time_side(0) * a[i].s).epsilon(1e-14));
  }
}
