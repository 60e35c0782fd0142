#include "czkit/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace czkit {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
  QuadratureRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i), hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = mid - half * x;
    r.nodes[hi] = mid + half * x;
    r.weights[lo] = r.weights[hi] = half * w;
  }
  return r;
}

TanhSinhRule tanh_sinh(int half, double span) {
  TanhSinhRule r;
  const double h = span / half;
  const double c = 0.5 * std::numbers::pi;
  for (int k = -half; k <= half; ++k) {
    const double s = k * h;
    const double u = c * std::sinh(s);
    const double ch = std::cosh(u);
    // 1 - tanh|u| = 2 / (1 + e^{2|u|}).
    const double gap = 2.0 / (1.0 + std::exp(2.0 * std::abs(u)));
    r.nodes.push_back(std::tanh(u));
    r.weights.push_back(h * c * std::cosh(s) / (ch * ch));
    r.gap.push_back(gap);
  }
  return r;
}

GradedRule graded_towards_left(double a, double b, int panels, int points_per_panel) {
  GradedRule g;
  const auto base = gauss_legendre(points_per_panel);
  const double len = b - a;
  for (int p = 0; p < panels; ++p) {
    const double hi = a + len * std::ldexp(1.0, -p);
    const double lo = a + len * std::ldexp(1.0, -p - 1);
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      g.rule.nodes.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes[i]);
      g.rule.weights.push_back(0.5 * (hi - lo) * base.weights[i]);
    }
  }
  g.skipped_lo = a;
  g.skipped_hi = a + len * std::ldexp(1.0, -panels);
  return g;
}

QuadratureRule geometric_panels(double origin, double a, double b, int points_per_panel) {
  if (!(b > a) || !(a > origin)) throw std::invalid_argument("geometric panels need origin < a < b");
  QuadratureRule r;
  const auto base = gauss_legendre(points_per_panel);
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, origin + 2.0 * (lo - origin));
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      r.nodes.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * base.nodes[i]);
      r.weights.push_back(0.5 * (hi - lo) * base.weights[i]);
    }
    lo = hi;
  }
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.slope * x[i] + f.intercept)));
  return f;
}

LineFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (y[i] > 0.0 && x[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  return fit_line(lx, ly);
}

}  // namespace czkit
