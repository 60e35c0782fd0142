#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grid.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "symbols.hpp"

namespace czkit {

/// Exponents of L_q(R, L_p); both finite and > 1.
struct MixedNormSpec {
  double p = 2.0;
  double q = 2.0;

  /// Throws ValidationError unless 1 < p, q < inf.
  void validate() const;
};

/// Time quadrature weights: w_n = t_{n+1} - t_n, w_M = 0 (f and u are read
/// as constant on [t_n, t_{n+1})).
std::vector<double> time_weights(const SpaceTimeGrid& g);

/// (sum_j dx^d |v_j|^p)^{1/p}.
double spatial_norm(std::span<const cplx> v, const SpatialGrid& g, double p);

/// (sum_n w_n (sum_j dx^d |u(t_n, x_j)|^p)^{q/p})^{1/q}.
double mixed_norm(const GridFunction& u, const MixedNormSpec& spec);

/// sum_n w_n sum_j dx^d |u|.
double l1_norm(const GridFunction& u);

enum class Generator { gaussian_field, bumps, jumps };
std::string to_string(Generator g);
/// "gaussian_field", "bumps", "jumps"; ValidationError otherwise.
Generator parse_generator(const std::string& name);

/// Random forcing ensemble. Member i is a pure function of (seed, i, grid).
/// Every member vanishes at the first and last time node.
///  gaussian_field: iid complex normal modes with |k_j| < N/6 on every axis,
///    independent per interior node.
///  bumps: one Gaussian bump, width log-uniform in [L/32, L/4], centre in
///    the middle half of the box, times a time indicator of log-uniform
///    duration.
///  jumps: one band-limited spatial field times a piecewise-constant time
///    profile with 1 to 8 jumps.
struct EnsembleSpec {
  int count = 64;
  Generator generator = Generator::gaussian_field;
  std::uint64_t seed = 0;

  void validate() const;
};

GridFunction ensemble_member(const EnsembleSpec& ens, int member, const SpaceTimeGrid& g);

/// max |Im psi| <= 1e-14 max |psi| on the grid lattice for every piece.
bool is_real_symbol(const SymbolSpec& s, const SpatialGrid& g);

/// Kinds whose kernel p_0 is a probability density: real fractional with
/// gamma <= 2, Levy, real second-order polynomial symbols.
bool has_positive_kernel(const SymbolSpec& s, const SpatialGrid& g);

/// Per member: u = R_lambda f and the ratio
/// (||u_t|| + ||(-Delta)^{gamma/2} u|| + lambda ||u||) / ||f|| in L_q(L_p).
/// Runs the symbol, its piece-0 freeze and a seeded time permutation of its
/// schedule. Checks: every ratio finite; permuted max within a factor 2 of
/// the frozen max (when the schedule has two or more pieces); and
/// lambda ||u|| / ||f|| <= 1 + 1e-6 when psi is real and either p = 2 or
/// the kernel is positive.
EstimateReport apriori_ratio(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g,
                             double lambda, const MixedNormSpec& spec);

/// For each lambda: max over the ensemble of
///   sup_n ||u(t_n)||_{L_p} / ||f||_{L_p(space-time)}   (exponent -(p-1)/p)
///   ||u||_{L_q(L_p)} / ||f||_{L_q(L_p)}               (exponent -1)
/// and ||p_lambda(t0 + 1, t0)||_{L1} e^{lambda}, which must not depend on
/// lambda. Fits both exponents within `tol`.
EstimateReport resolvent_bounds(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g,
                                std::span<const double> lambdas, const MixedNormSpec& spec,
                                double tol = 0.1);

/// max over the ensemble of ||G f||_{L2} / ||f||_{L2}. For a real
/// fractional symbol -a(t)|xi|^gamma the check asserts the Schur bound
/// 1 / min a (times 1 + 1e-6); otherwise only finiteness.
EstimateReport g_l2_bound(const SymbolSpec& s, const EnsembleSpec& ens, const SpaceTimeGrid& g);

/// sup over alpha of alpha |{|Gf| > alpha}| / ||f||_{L1}. Rows: alpha,
/// measure, ratio.
EstimateReport weak11_check(const SymbolSpec& s, const GridFunction& f,
                            std::span<const double> alpha_grid);

/// Near-delta forcing: L1-normalised Gaussian of width 4 coarse cells at
/// the origin times the indicator of the coarse cell starting at node M/8.
GridFunction near_delta(const SpaceTimeGrid& g, const SpaceTimeGrid& coarse);

/// weak11_check of near_delta on `coarse` and on `refinements` successive
/// 2x refinements (space and time), with one alpha grid taken from the
/// coarse max |Gf|. Passes when consecutive sups differ by at most `tol`
/// relative.
EstimateReport weak11_refinement(const SymbolSpec& s, const SpaceTimeGrid& coarse,
                                 int refinements = 2, double tol = 0.2, int alphas = 48);

/// The grid twice as fine in space and time on the same window.
SpaceTimeGrid refine(const SpaceTimeGrid& g);

}  // namespace czkit
