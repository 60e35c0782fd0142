#include "czkit/solver.hpp"

#include <cmath>

#include "czkit/errors.hpp"
#include "czkit/kernels.hpp"
#include "czkit/parallel.hpp"

namespace czkit {

namespace {

// expm1 for complex arguments without cancellation near 0.
cplx expm1c(cplx w) {
  const double a = w.real(), b = w.imag();
  const double sb2 = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * sb2 * sb2, std::exp(a) * std::sin(b)};
}

// psi per cell per mode: the cell's piece row of the symbol table.
std::vector<const std::vector<cplx>*> cell_rows(const SymbolSpec& s, const SymbolTable& tab,
                                                const SpaceTimeGrid& g) {
  g.check_alignment(s);
  std::vector<const std::vector<cplx>*> rows;
  for (std::size_t n = 0; n + 1 < g.nt(); ++n)
    rows.push_back(&tab.piece(s.piece_index(0.5 * (g.t[n] + g.t[n + 1]))));
  return rows;
}

}  // namespace

std::pair<cplx, cplx> cell_propagator(cplx z, double dt) {
  if (z == cplx{0.0, 0.0}) return {cplx{1.0, 0.0}, cplx{dt, 0.0}};
  const cplx em1 = expm1c(z * dt);
  return {em1 + 1.0, em1 / z};
}

GridFunction GridFunction::zeros(const SpaceTimeGrid& g, Role role) {
  return GridFunction{g, role, std::vector<cplx>(g.nt() * g.space.size())};
}

std::vector<cplx> spectral(const GridFunction& u) {
  std::vector<cplx> out = u.values;
  const auto& g = u.grid.space;
  parallel_for(u.grid.nt(), [&](std::size_t n) {
    std::vector<cplx> buf(out.begin() + static_cast<std::ptrdiff_t>(n * g.size()),
                          out.begin() + static_cast<std::ptrdiff_t>((n + 1) * g.size()));
    to_spectral(g, buf);
    std::copy(buf.begin(), buf.end(), out.begin() + static_cast<std::ptrdiff_t>(n * g.size()));
  });
  return out;
}

GridFunction physical(const SpaceTimeGrid& g, std::vector<cplx> spec, Role role) {
  const auto& sp = g.space;
  parallel_for(g.nt(), [&](std::size_t n) {
    std::vector<cplx> buf(spec.begin() + static_cast<std::ptrdiff_t>(n * sp.size()),
                          spec.begin() + static_cast<std::ptrdiff_t>((n + 1) * sp.size()));
    to_physical(sp, buf);
    std::copy(buf.begin(), buf.end(), spec.begin() + static_cast<std::ptrdiff_t>(n * sp.size()));
  });
  return GridFunction{g, role, std::move(spec)};
}

GridFunction apply_A(const SymbolSpec& s, const GridFunction& u) {
  const SymbolTable tab(s, u.grid.space);
  auto spec = spectral(u);
  const std::size_t M = u.size();
  for (std::size_t n = 0; n < u.grid.nt(); ++n) {
    const auto& row = tab.piece(s.piece_index(u.grid.t[n]));
    for (std::size_t k = 0; k < M; ++k) spec[n * M + k] *= row[k];
  }
  return physical(u.grid, std::move(spec), u.role);
}

GridFunction frac_laplacian(const GridFunction& u, double sigma) {
  if (!(sigma >= 0.0)) throw DomainError("frac_laplacian needs sigma >= 0");
  auto spec = spectral(u);
  const auto& g = u.grid.space;
  std::vector<double> w(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.freq(k).norm();
    w[k] = r == 0.0 ? 0.0 : std::pow(r, sigma);
  }
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= w[i % g.size()];
  return physical(u.grid, std::move(spec), u.role);
}

namespace {

// Runs the cell recurrence on spectral data; `weight` multiplies phi.
std::vector<cplx> recurrence(const SymbolSpec& s, const GridFunction& f, double lambda,
                             const std::vector<double>* weight, SolveDiagnostics* diag) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const SymbolTable tab(s, f.grid.space);
  const auto rows = cell_rows(s, tab, f.grid);
  const auto fh = spectral(f);
  const std::size_t M = f.size(), nt = f.grid.nt();
  std::vector<cplx> uh(fh.size());
  parallel_for(M, [&](std::size_t k) {
    cplx state{0.0, 0.0};
    const double w = weight ? (*weight)[k] : 1.0;
    for (std::size_t n = 0; n + 1 < nt; ++n) {
      const cplx z = (*rows[n])[k] - lambda;
      const auto [E, phi] = cell_propagator(z, f.grid.t[n + 1] - f.grid.t[n]);
      state = E * state + w * phi * fh[n * M + k];
      uh[(n + 1) * M + k] = state;
    }
  });
  if (diag) {
    cplx mean{0.0, 0.0};
    double scale = 0.0;
    for (std::size_t n = 0; n + 1 < nt; ++n) {
      const double w = f.grid.t[n + 1] - f.grid.t[n];
      mean += w * fh[n * M];
      double top = 0.0;
      for (std::size_t j = 0; j < M; ++j) top = std::max(top, std::abs(fh[n * M + j]));
      scale += w * top;
    }
    diag->mean_mode_integral = std::abs(mean);
    // Transform roundoff on mean-free data stays far below this.
    diag->mean_drift = lambda == 0.0 && std::abs(mean) > 1e-12 * scale;
  }
  return uh;
}

}  // namespace

GridFunction solve_resolvent(const SymbolSpec& s, const GridFunction& f, double lambda,
                             SolveDiagnostics* diag) {
  return physical(f.grid, recurrence(s, f, lambda, nullptr, diag), Role::u);
}

GridFunction apply_G(const SymbolSpec& s, const GridFunction& f, GPath path) {
  if (path == GPath::composed) return frac_laplacian(solve_resolvent(s, f, 0.0), s.gamma());
  const SymbolTable tab(s, f.grid.space);
  return physical(f.grid, recurrence(s, f, 0.0, &tab.order_weight(), nullptr), Role::u);
}

namespace {

std::vector<cplx> forward_spectral(const SymbolSpec& s, const std::vector<cplx>& uh,
                                   const SpaceTimeGrid& g, double lambda, TimeInterpolant interp) {
  const SymbolTable tab(s, g.space);
  const auto rows = cell_rows(s, tab, g);
  const std::size_t M = g.space.size(), nt = g.nt();
  std::vector<cplx> fh(uh.size());
  parallel_for(M, [&](std::size_t k) {
    for (std::size_t n = 0; n + 1 < nt; ++n) {
      const cplx z = (*rows[n])[k] - lambda;
      const double dt = g.t[n + 1] - g.t[n];
      const cplx u0 = uh[n * M + k], u1 = uh[(n + 1) * M + k];
      if (interp == TimeInterpolant::linear) {
        fh[n * M + k] = (u1 - u0) / dt - z * u0;
      } else {
        const auto [E, phi] = cell_propagator(z, dt);
        fh[n * M + k] = (u1 - E * u0) / phi;
      }
    }
  });
  return fh;
}

}  // namespace

GridFunction forward_apply(const SymbolSpec& s, const GridFunction& u, double lambda,
                           TimeInterpolant interp) {
  return physical(u.grid, forward_spectral(s, spectral(u), u.grid, lambda, interp), Role::f);
}

GridFunction time_derivative(const SymbolSpec& s, const GridFunction& u, double lambda) {
  const auto uh = spectral(u);
  auto fh = forward_spectral(s, uh, u.grid, lambda, TimeInterpolant::exponential);
  const SymbolTable tab(s, u.grid.space);
  const auto rows = cell_rows(s, tab, u.grid);
  const std::size_t M = u.size(), nt = u.grid.nt();
  // u_t(t_n) = z u_n + f_n on the cell to the right; the last node uses the
  // last cell with f = 0.
  for (std::size_t n = 0; n < nt; ++n) {
    const auto& row = *rows[std::min(n, nt - 2)];
    for (std::size_t k = 0; k < M; ++k) {
      const cplx z = row[k] - lambda;
      fh[n * M + k] = z * uh[n * M + k] + (n + 1 < nt ? fh[n * M + k] : cplx{0.0, 0.0});
    }
  }
  return physical(u.grid, std::move(fh), Role::u);
}

}  // namespace czkit
