#pragma once

#include <functional>
#include <span>
#include <vector>

namespace czkit {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Double-exponential (tanh-sinh) rule on (-1, 1) with 2*half+1 nodes.
/// Besides nodes and weights it carries 1-|x| computed without
/// cancellation, which matters for integrands singular at the endpoints.
struct TanhSinhRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> gap;  // 1 - |node|
};
TanhSinhRule tanh_sinh(int half, double span = 3.2);

/// Composite Gauss-Legendre rule on [a, b] whose panels shrink
/// geometrically (ratio 1/2) towards `a`. The innermost panel is
/// [a + (b-a) 2^{-panels}, a + (b-a) 2^{-panels+1}]; the sliver
/// [a, a + (b-a) 2^{-panels}] is not covered and is returned as `skipped`.
struct GradedRule {
  QuadratureRule rule;
  double skipped_lo = 0.0;
  double skipped_hi = 0.0;
};
GradedRule graded_towards_left(double a, double b, int panels, int points_per_panel);

/// Composite Gauss-Legendre rule on [a, b] with panels growing
/// geometrically (ratio 2) away from `a`; requires b > a and a > origin.
QuadratureRule geometric_panels(double origin, double a, double b, int points_per_panel);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x); entries with y <= 0 are
/// dropped.
LineFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace czkit
