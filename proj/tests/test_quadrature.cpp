#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "czkit/parallel.hpp"
#include "czkit/quadrature.hpp"
#include "czkit/report.hpp"
#include "doctest.h"

using namespace czkit;

namespace {

double apply(const QuadratureRule& r, double (*f)(double)) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(r.nodes[i]);
  return acc;
}

}  // namespace

TEST_CASE("Gauss-Legendre is exact to degree 2n-1") {
  for (int n = 1; n <= 12; ++n) {
    const auto r = gauss_legendre(n, 0.0, 2.0);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * std::pow(r.nodes[i], k);
      CHECK(acc == doctest::Approx(std::pow(2.0, k + 1) / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("tanh-sinh handles endpoint singularities") {
  // 1/sqrt(1 - x^2) with 1 - |x| taken from the cancellation-free gap.
  auto integrate = [](const TanhSinhRule& r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] / std::sqrt(r.gap[i] * (2.0 - r.gap[i]));
    return acc;
  };
  // A wide span leaves no endpoint mass behind.
  CHECK(integrate(tanh_sinh(96, 4.0)) == doctest::Approx(std::numbers::pi).epsilon(1e-13));
  // The default span drops the mass within ~1e-17 of each end: about
  // 2 sqrt(2e-17) for this integrand.
  const double def = integrate(tanh_sinh(64));
  CHECK(def < std::numbers::pi);
  CHECK(std::numbers::pi - def < 2e-8);
}

TEST_CASE("graded and geometric panels cover their intervals") {
  const auto g = graded_towards_left(1.0, 3.0, 5, 6);
  CHECK(g.skipped_lo == 1.0);
  CHECK(g.skipped_hi == doctest::Approx(1.0 + 2.0 / 32.0));
  double w = 0.0;
  for (double x : g.rule.weights) w += x;
  CHECK(w == doctest::Approx(3.0 - g.skipped_hi).epsilon(1e-14));

  const auto geo = geometric_panels(0.0, 1.0, 10.0, 8);
  CHECK(apply(geo, [](double x) { return 1.0 / (x * x); }) == doctest::Approx(0.9).epsilon(1e-10));
  CHECK_THROWS(geometric_panels(1.0, 1.0, 2.0, 4));
}

TEST_CASE("line and power-law fits") {
  std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.max_residual < 1e-12);
  std::vector<double> u{1, 2, 4, 8}, v;
  for (double t : u) v.push_back(3.0 * std::pow(t, -0.75));
  CHECK(fit_power_law(u, v).slope == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("report formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  CHECK(std::stod(format_double(2.0 / 7.0)) == 2.0 / 7.0);

  EstimateReport r;
  r.check = "demo";
  r.columns = {"name", "value"};
  r.rows.push_back({std::string("a,b"), 1.5});
  r.rows.push_back({std::string("q\"x"), std::int64_t{3}});
  r.set("x", NAN);
  r.require("ok", true);
  r.require("bad", false);
  CHECK_FALSE(r.pass);
  CHECK(r.at("ok") == 1.0);
  CHECK(r.at("bad") == 0.0);
  CHECK_THROWS(r.at("missing"));
  std::ostringstream os;
  r.write_csv(os);
  CHECK(os.str() == "name,value\n\"a,b\",1.5\n\"q\"\"x\",3\n");
  const auto j = r.to_json();
  CHECK(j["summary"]["x"] == "nan");
  CHECK(j["pass"] == false);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  for (unsigned t : {1u, 2u, 5u}) {
    set_thread_count(t);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    // Nested calls run inline inside workers.
    std::vector<int> inner(64, 0);
    parallel_for(8, [&](std::size_t i) { parallel_for(8, [&](std::size_t j) { inner[i * 8 + j] = 1; }); });
    for (int h : inner) CHECK(h == 1);
  }
  set_thread_count(0);
}
