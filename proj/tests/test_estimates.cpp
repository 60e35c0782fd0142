#include <cmath>
#include <numbers>
#include <random>

#include "czkit/errors.hpp"
#include "czkit/estimates.hpp"
#include "czkit/kernels.hpp"
#include "czkit/parallel.hpp"
#include "doctest.h"

using namespace czkit;

namespace {

constexpr double kPi = std::numbers::pi;

SpaceTimeGrid small_grid(double L = 16.0, int N = 64, double t1 = 4.0, int nodes = 17) {
  return SpaceTimeGrid::uniform(SpatialGrid(1, L, N), 0.0, t1, nodes);
}

// exp(i (xi x + tau t)) on every node.
GridFunction plane_wave(const SpaceTimeGrid& g, int k, double tau = 0.0) {
  auto f = GridFunction::zeros(g, Role::f);
  const double xi = 2.0 * kPi * k / g.space.extent();
  for (std::size_t n = 0; n < g.nt(); ++n)
    for (std::size_t j = 0; j < f.size(); ++j)
      f.slice(n)[j] = std::polar(1.0, xi * g.space.coord(static_cast<int>(j)) + tau * g.t[n]);
  return f;
}

}  // namespace

TEST_CASE("time weights") {
  const auto g = small_grid(8.0, 16, 1.0, 5);
  const auto w = time_weights(g);
  REQUIRE(w.size() == 5);
  for (int n = 0; n < 4; ++n) CHECK(w[static_cast<std::size_t>(n)] == 0.25);
  CHECK(w[4] == 0.0);
}

TEST_CASE("mixed norms") {
  // u = 1 on [-L/2, L/2)^d x [0, T): norm T^{1/q} L^{d/p}.
  for (int d : {1, 2}) {
    const auto g = SpaceTimeGrid::uniform(SpatialGrid(d, 4.0, 8), 0.0, 2.0, 9);
    auto u = GridFunction::zeros(g);
    for (auto& v : u.values) v = 1.0;
    for (double p : {1.5, 2.0, 3.0}) {
      for (double q : {1.5, 2.0, 4.0}) {
        const MixedNormSpec spec{p, q};
        CHECK(mixed_norm(u, spec) == doctest::Approx(std::pow(2.0, 1.0 / q) * std::pow(4.0, d / p)).epsilon(1e-14));
      }
    }
    CHECK(l1_norm(u) == doctest::Approx(2.0 * std::pow(4.0, d)).epsilon(1e-14));
  }
  CHECK_THROWS_AS((MixedNormSpec{1.0, 2.0}.validate()), ValidationError);
  CHECK_THROWS_AS((MixedNormSpec{2.0, INFINITY}.validate()), ValidationError);
  CHECK_NOTHROW((MixedNormSpec{1.01, 7.0}.validate()));
}

TEST_CASE("spatial Parseval") {
  const SpatialGrid g(2, 5.0, 16);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<cplx> v(g.size());
  for (auto& x : v) x = {n01(rng), n01(rng)};
  auto s = v;
  to_spectral(g, s);
  double spec = 0.0;
  for (const auto& x : s) spec += std::norm(x);
  CHECK(std::pow(spatial_norm(v, g, 2.0), 2.0) == doctest::Approx(spec / 25.0).epsilon(1e-12));
}

TEST_CASE("mixed norm of the plane-wave resolvent matches the closed form") {
  // f = e^{i xi x}: u(t_n) = (1 - e^{-a t_n}) / a e^{i xi x}, a = |xi|^gamma + lambda.
  const auto g = small_grid(16.0, 64, 4.0, 17);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  const int k = 2;
  const double lam = 0.5, a = std::pow(2.0 * kPi * k / 16.0, 1.5) + lam;
  const auto u = solve_resolvent(s, plane_wave(g, k), lam);
  for (double p : {1.5, 2.0, 3.0}) {
    for (double q : {1.5, 2.0, 3.0}) {
      double acc = 0.0;
      for (std::size_t n = 0; n + 1 < g.nt(); ++n) acc += 0.25 * std::pow((1.0 - std::exp(-a * g.t[n])) / a, q);
      const double oracle = std::pow(16.0, 1.0 / p) * std::pow(acc, 1.0 / q);
      CHECK(mixed_norm(u, MixedNormSpec{p, q}) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("ensemble members are reproducible and vanish at the ends") {
  const auto g = small_grid();
  for (auto gen : {Generator::gaussian_field, Generator::bumps, Generator::jumps}) {
    const EnsembleSpec ens{8, gen, 42};
    for (int i = 0; i < 8; ++i) {
      const auto a = ensemble_member(ens, i, g), b = ensemble_member(ens, i, g);
      CHECK(a.values == b.values);
      for (const auto& v : a.slice(0)) CHECK(v == cplx{0.0, 0.0});
      for (const auto& v : a.slice(g.nt() - 1)) CHECK(v == cplx{0.0, 0.0});
      CHECK(l1_norm(a) > 0.0);
    }
    const auto other = ensemble_member(EnsembleSpec{8, gen, 43}, 0, g);
    CHECK(other.values != ensemble_member(ens, 0, g).values);
    CHECK(ensemble_member(ens, 1, g).values != ensemble_member(ens, 0, g).values);
  }
  CHECK(parse_generator("bumps") == Generator::bumps);
  CHECK(to_string(Generator::jumps) == "jumps");
  CHECK_THROWS_AS(parse_generator("noise"), ValidationError);
  CHECK_THROWS_AS((EnsembleSpec{0, Generator::bumps, 0}.validate()), ValidationError);
}

TEST_CASE("Gaussian field members are band limited") {
  const auto g = small_grid(16.0, 64, 1.0, 5);
  const auto f = ensemble_member(EnsembleSpec{1, Generator::gaussian_field, 7}, 0, g);
  const auto fs = spectral(f);
  for (std::size_t n = 0; n < g.nt(); ++n) {
    for (std::size_t j = 0; j < g.space.size(); ++j) {
      const int k = g.space.wavenumber(static_cast<int>(j));
      if (k == 0 || std::abs(k) * 6 >= 64) CHECK(std::abs(fs[n * g.space.size() + j]) <= 1e-12);
    }
  }
}

TEST_CASE("symbol classification") {
  const SpatialGrid g(1, 16.0, 64);
  CHECK(is_real_symbol(make_fractional(cplx{1.0, 0.0}, 1.5, 1), g));
  CHECK_FALSE(is_real_symbol(make_fractional(cplx{1.0, 0.1}, 1.5, 1), g));
  CHECK(has_positive_kernel(make_fractional(cplx{1.0, 0.0}, 1.5, 1), g));
  CHECK(has_positive_kernel(make_fractional(cplx{1.0, 0.0}, 2.0, 1), g));
  CHECK_FALSE(has_positive_kernel(make_fractional(cplx{1.0, 0.0}, 3.0, 1), g));
  CHECK_FALSE(has_positive_kernel(make_fractional(cplx{1.0, 0.5}, 1.0, 1), g));
  CHECK(has_positive_kernel(make_levy(constant_schedule(LevyDensity::constant(1, 0.4)), 0.8, 1), g));
}

TEST_CASE("G on a single space-time mode") {
  // With f_n = e^{i tau t_n} e^{i xi x} the periodic regime has
  // |G f| / |f| = (1 - E) / |e^{i tau dt} - E|, E = e^{-r dt}, r = |xi|^gamma,
  // which tends to r / |i tau + r| as dt -> 0.
  const double gamma = 1.5, tau = 2.0;
  const int k = 2;
  const auto g = small_grid(16.0, 32, 40.0, 1601);
  const auto s = make_fractional(cplx{1.0, 0.0}, gamma, 1);
  const double r = std::pow(2.0 * kPi * k / 16.0, gamma), dt = 40.0 / 1600.0;
  const auto gf = apply_G(s, plane_wave(g, k, tau));
  const double E = std::exp(-r * dt);
  const double discrete = (1.0 - E) / std::abs(std::polar(1.0, tau * dt) - E);
  const double continuum = r / std::abs(cplx{r, tau});
  const std::size_t late = g.nt() - 2;
  CHECK(std::abs(gf.slice(late)[3]) == doctest::Approx(discrete).epsilon(1e-9));
  CHECK(discrete == doctest::Approx(continuum).epsilon(1e-2));
}

TEST_CASE("G annihilates spatially constant forcing") {
  const auto g = small_grid(8.0, 32, 2.0, 9);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  auto f = GridFunction::zeros(g, Role::f);
  for (std::size_t n = 1; n + 1 < g.nt(); ++n)
    for (auto& v : f.slice(n)) v = 1.0;
  const auto gf = apply_G(s, f);
  for (const auto& v : gf.values) CHECK(std::abs(v) <= 1e-13);
  const std::vector<double> alphas{1e-6, 1e-3, 1.0};
  const auto rep = weak11_check(s, f, alphas);
  CHECK(rep.at("sup_ratio") == 0.0);
}

TEST_CASE("weak11 level sets against brute force") {
  const auto g = small_grid(16.0, 64, 4.0, 17);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  const auto f = ensemble_member(EnsembleSpec{4, Generator::bumps, 5}, 2, g);
  const auto gf = apply_G(s, f);
  const auto w = time_weights(g);
  double gmax = 0.0;
  for (const auto& v : gf.values) gmax = std::max(gmax, std::abs(v));
  std::vector<double> alphas;
  for (int i = 1; i <= 10; ++i) alphas.push_back(gmax * i / 10.0);
  alphas.push_back(2.0 * gmax);
  const auto rep = weak11_check(s, f, alphas);
  const double nf = l1_norm(f);
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    double meas = 0.0;
    for (std::size_t n = 0; n < g.nt(); ++n)
      for (const auto& v : gf.slice(n))
        if (std::abs(v) > alphas[a]) meas += w[n] * g.space.dx();
    CHECK(std::get<double>(rep.rows[a][1]) == doctest::Approx(meas).epsilon(1e-12));
    CHECK(std::get<double>(rep.rows[a][2]) == doctest::Approx(alphas[a] * meas / nf).epsilon(1e-12));
  }
  // Above the maximum the level set is empty.
  CHECK(std::get<double>(rep.rows.back()[1]) == 0.0);
  CHECK(rep.at("max_abs_Gf") == gmax);

  // Scaling f by c and alpha by c leaves every ratio unchanged.
  auto f3 = f;
  for (auto& v : f3.values) v *= 3.0;
  std::vector<double> alphas3;
  for (double a : alphas) alphas3.push_back(3.0 * a);
  const auto rep3 = weak11_check(s, f3, alphas3);
  CHECK(rep3.at("sup_ratio") == doctest::Approx(rep.at("sup_ratio")).epsilon(1e-12));

  // Periodic translation by whole cells leaves the report unchanged.
  auto ft = f;
  for (std::size_t n = 0; n < g.nt(); ++n)
    for (int j = 0; j < 64; ++j) ft.slice(n)[static_cast<std::size_t>(j)] = f.slice(n)[static_cast<std::size_t>((j + 11) % 64)];
  CHECK(weak11_check(s, ft, alphas).at("sup_ratio") == doctest::Approx(rep.at("sup_ratio")).epsilon(1e-10));
}

TEST_CASE("near-delta forcing and refinement") {
  const auto coarse = small_grid(16.0, 64, 4.0, 17);
  const auto fine = refine(coarse);
  CHECK(fine.space.points() == 128);
  CHECK(fine.nt() == 33);
  CHECK(fine.t.back() == 4.0);
  for (const auto* g : {&coarse, &fine}) {
    const auto d = near_delta(*g, coarse);
    CHECK(l1_norm(d) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("a priori ratio on a real symbol") {
  const auto g = small_grid(16.0, 64, 4.0, 17);
  std::vector<TimePiece> p{{0.0, 2.0, cplx{1.0, 0.0}}, {2.0, 4.0, cplx{2.0, 0.0}}};
  const auto s = make_fractional(p, 1.5, 1);
  const EnsembleSpec ens{6, Generator::bumps, 1};
  const auto rep = apriori_ratio(s, ens, g, 1.0, MixedNormSpec{});
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 6);
  CHECK(rep.at("max_lambda_ratio") <= 1.0 + 1e-6);
  CHECK(rep.at("min_ratio") > 0.0);
  CHECK(rep.at("min_ratio") <= rep.at("median_ratio"));
  CHECK(rep.at("median_ratio") <= rep.at("max_ratio"));
}

TEST_CASE("reports do not depend on the thread count") {
  const auto g = small_grid(16.0, 64, 4.0, 17);
  const auto s = make_fractional(cplx{1.0, 0.2}, 1.5, 1);
  const EnsembleSpec ens{8, Generator::gaussian_field, 3};
  set_thread_count(1);
  const auto a = apriori_ratio(s, ens, g, 2.0, MixedNormSpec{3.0, 1.5}).to_json();
  const auto ga = g_l2_bound(s, ens, g).to_json();
  set_thread_count(4);
  const auto b = apriori_ratio(s, ens, g, 2.0, MixedNormSpec{3.0, 1.5}).to_json();
  const auto gb = g_l2_bound(s, ens, g).to_json();
  set_thread_count(0);
  CHECK(a.dump() == b.dump());
  CHECK(ga.dump() == gb.dump());
}

TEST_CASE("G is an L2 contraction for the heat-type symbol") {
  const auto g = small_grid(16.0, 64, 4.0, 17);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  for (auto gen : {Generator::gaussian_field, Generator::bumps, Generator::jumps}) {
    const auto rep = g_l2_bound(s, EnsembleSpec{6, gen, 9}, g);
    CHECK(rep.pass);
    CHECK(rep.at("bound") == doctest::Approx(1.0 + 1e-6).epsilon(1e-15));
    CHECK(rep.at("max_ratio") <= 1.0 + 1e-6);
  }
}

TEST_CASE("resolvent L1 factorisation") {
  const auto g = small_grid(32.0, 256, 8.0, 33);
  const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
  const std::vector<double> lams{1.0, 2.0, 4.0, 8.0};
  const auto rep = resolvent_bounds(s, EnsembleSpec{4, Generator::bumps, 2}, g, lams, MixedNormSpec{});
  CHECK(rep.at("l1_scaled_spread") <= 1e-12);
  CHECK(rep.at("mixed_slope") < 0.0);
}
