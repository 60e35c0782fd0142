#pragma once

#include <complex>
#include <span>
#include <vector>

#include "grid.hpp"
#include "symbols.hpp"

namespace czkit {

enum class Role { u, f, residual };

/// Complex values on a space-time grid, time-major: values[n * size + j].
struct GridFunction {
  SpaceTimeGrid grid;
  Role role = Role::u;
  std::vector<cplx> values;

  static GridFunction zeros(const SpaceTimeGrid& g, Role role = Role::u);

  std::size_t size() const { return grid.space.size(); }
  std::span<cplx> slice(std::size_t n) { return {values.data() + n * size(), size()}; }
  std::span<const cplx> slice(std::size_t n) const { return {values.data() + n * size(), size()}; }
};

/// Spatial transforms of every time slice (physical <-> spectral, with the
/// centred-box normalisation of to_spectral / to_physical).
std::vector<cplx> spectral(const GridFunction& u);
GridFunction physical(const SpaceTimeGrid& g, std::vector<cplx> spec, Role role);

/// A(t_n) u(t_n) for every node: multiplier psi(t_n, xi).
GridFunction apply_A(const SymbolSpec& s, const GridFunction& u);

/// Multiplier |xi|^sigma; the xi = 0 mode is set to zero for every sigma.
GridFunction frac_laplacian(const GridFunction& u, double sigma);

struct SolveDiagnostics {
  /// True when lambda = 0 and the xi = 0 mode of f has nonzero time
  /// integral, so R_0 f carries a drifting mean.
  bool mean_drift = false;
  double mean_mode_integral = 0.0;
};

/// u = R_lambda f. Per mode: u_0 = 0, u_{n+1} = E u_n + phi f_n with
/// z = psi(cell n) - lambda, E = exp(z dt), phi = (E - 1) / z (dt at z = 0).
/// f is piecewise constant on the cells [t_n, t_{n+1}); f at the last node
/// is unused. Throws AlignmentError if a coefficient breakpoint lies inside
/// a cell.
GridFunction solve_resolvent(const SymbolSpec& s, const GridFunction& f, double lambda,
                             SolveDiagnostics* diag = nullptr);

enum class GPath { composed, direct };
/// G f = (-Delta)^{gamma/2} R_0 f, either composed from the two operators
/// or through the recurrence with multiplier |xi|^gamma phi.
GridFunction apply_G(const SymbolSpec& s, const GridFunction& f, GPath path = GPath::direct);

/// u_t at every node from the exact cell rule u_t(t_n) = z u_n + f_n,
/// with f recovered from u (f at the last node taken as 0).
GridFunction time_derivative(const SymbolSpec& s, const GridFunction& u, double lambda);

enum class TimeInterpolant { exponential, linear };
/// f = u_t - A u + lambda u.
/// exponential: u is read as the solution of the cell ODE with constant f
///   on each cell, so f_n = (u_{n+1} - E u_n) / phi and solve_resolvent
///   inverts it exactly.
/// linear: u is piecewise linear in t and f_n = (u_{n+1} - u_n)/dt - z u_n.
/// f at the last node is 0 in both cases.
GridFunction forward_apply(const SymbolSpec& s, const GridFunction& u, double lambda,
                           TimeInterpolant interp = TimeInterpolant::exponential);

/// (E, phi) for one cell: E = exp(z dt), phi = (E - 1)/z, phi = dt at z = 0.
std::pair<cplx, cplx> cell_propagator(cplx z, double dt);

}  // namespace czkit
