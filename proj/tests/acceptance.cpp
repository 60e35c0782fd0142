// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "czkit/cli.hpp"
#include "czkit/estimates.hpp"
#include "czkit/kernels.hpp"
#include "czkit/parallel.hpp"
#include "czkit/partitions.hpp"
#include "czkit/solver.hpp"
#include "czkit/symbols.hpp"

using namespace czkit;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Collects failed sub-checks for one criterion.
struct Verdict {
  std::vector<std::string> failures;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

int run_criterion(int id, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) v.failures.push_back("runtime " + num(secs) + " s over budget " + num(budget_s) + " s");
  const bool pass = v.failures.empty();
  std::cout << "CRITERION " << id << ": " << (pass ? "PASS" : "FAIL") << " [" << std::fixed << std::setprecision(2)
            << secs << " s] " << std::defaultfloat << v.detail.str();
  for (const auto& f : v.failures) std::cout << " | failed: " << f;
  std::cout << std::endl;
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

void partitions(Verdict& v) {
  const std::vector<std::string> orders{"0.5", "1", "1.5", "2", "pi", "3.7"};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-100.0, 100.0);
  std::size_t points = 0, levels = 0;
  for (const auto& label : orders) {
    const Order g = Order::parse(label);
    const std::int64_t fl = g.floor();
    for (int d = 1; d <= 2; ++d) {
      const Filtration f(g, d);
      for (std::int64_t m = -12; m <= 12; ++m) {
        ++levels;
        const double tau = f.tau(m);
        v.expect(tau >= 1.0 && tau < 2.0, label + ": tau_" + std::to_string(m) + " outside [1,2)");
        const auto k = f.k(m);
        v.expect(k == fl || k == fl + 1, label + ": k_m out of range");
        v.expect(f.regularity_ratio(m) == std::ldexp(1.0, d + static_cast<int>(k)), label + ": regularity ratio");
        v.expect(f.regularity_ratio(m) <= std::ldexp(1.0, d + static_cast<int>(fl) + 1), label + ": regularity bound");
        if (label == "2") v.expect(f.time_side(m) == std::pow(4.0, static_cast<double>(-m)), "gamma=2 time side");
      }
      // Nestedness and locate consistency on random points.
      const int n_pts = 10000 / static_cast<int>(orders.size() * 2) + 1;
      for (int i = 0; i < n_pts; ++i) {
        ++points;
        const double t = U(rng);
        std::vector<double> x{U(rng), U(rng)};
        x.resize(static_cast<std::size_t>(d));
        const std::int64_t m = static_cast<std::int64_t>(rng() % 24) - 12;
        const Cube q = f.locate(t, x, m), qc = f.locate(t, x, m + 1);
        v.expect(f.parent(qc) == q, label + ": parent(locate(m+1)) != locate(m)");
        v.expect(f.box(q).contains(t, x) && f.box(qc).contains(t, x), label + ": box does not contain point");
        const auto kids = f.children(q);
        v.expect(std::find(kids.begin(), kids.end(), qc) != kids.end(), label + ": child missing");
      }
    }
  }
  v.detail << "orders=6 dims=2 levels=" << levels << " random_points=" << points;
}

// ---------------------------------------------------------------------------

double relative_l1(const KernelSlice& ks, const std::function<double(double)>& oracle, double tail_mass) {
  double err = 0.0, mass = 0.0;
  for (std::size_t j = 0; j < ks.values.size(); ++j) {
    const double o = oracle(ks.grid.coord(static_cast<int>(j)));
    err += std::abs(ks.values[j] - cplx{o, 0.0}) * ks.grid.dx();
    mass += std::abs(o) * ks.grid.dx();
  }
  return (err + tail_mass) / (mass + tail_mass);
}

void kernel_oracles(Verdict& v) {
  // Heat: p(tau, x) = (4 pi tau)^{-1/2} exp(-x^2 / (4 tau)); the tail
  // beyond |x| = 20 is below 1e-40 for tau <= 1.
  const SpatialGrid gh(1, 40.0, 4096);
  const auto heat = make_fractional(cplx{1.0, 0.0}, 2.0, 1);
  double worst_heat = 0.0;
  for (double tau : {0.25, 0.5, 1.0}) {
    const auto ks = kernel_slice(heat, 1.0 + tau, 1.0, 0.0, gh);
    const double e = relative_l1(ks, [tau](double x) { return std::exp(-x * x / (4.0 * tau)) / std::sqrt(4.0 * kPi * tau); }, 0.0);
    worst_heat = std::max(worst_heat, e);
  }
  v.expect(worst_heat <= 1e-6, "heat relative L1 error " + num(worst_heat));

  // Cauchy: p(tau, x) = tau / (pi (tau^2 + x^2)) on R. Its mass beyond
  // |x| = L/2, 1 - (2/pi) atan(L / (2 tau)), is charged to the error.
  const double L = 65536.0;
  const SpatialGrid gc(1, L, 1 << 19);
  const auto cauchy = make_fractional(cplx{1.0, 0.0}, 1.0, 1);
  double worst_cauchy = 0.0;
  for (double tau : {0.5, 1.0, 2.0}) {
    const auto ks = kernel_slice(cauchy, tau, 0.0, 0.0, gc);
    const double tail = 1.0 - 2.0 / kPi * std::atan(0.5 * L / tau);
    const double e = relative_l1(ks, [tau](double x) { return tau / (kPi * (tau * tau + x * x)); }, tail);
    worst_cauchy = std::max(worst_cauchy, e);
  }
  v.expect(worst_cauchy <= 1e-4, "Cauchy relative L1 error " + num(worst_cauchy));

  // L1 factorisation in lambda.
  const SpatialGrid gf(1, 64.0, 2048);
  std::vector<TimePiece> p{{0.0, 1.0, cplx{1.0, 0.4}}, {1.0, 4.0, cplx{2.0, -0.3}}};
  const auto s = make_fractional(p, 1.5, 1);
  const SymbolTable tab(s, gf);
  double worst_fact = 0.0;
  for (double gap : {0.5, 1.0, 2.5}) {
    const double base = l1_norm(kernel_slice(tab, 0.5 + gap, 0.5, 0.0, KernelKind::p_lambda));
    for (double lam : {0.5, 1.0, 2.0, 8.0}) {
      const double l1 = l1_norm(kernel_slice(tab, 0.5 + gap, 0.5, lam, KernelKind::p_lambda));
      worst_fact = std::max(worst_fact, std::abs(l1 - std::exp(-lam * gap) * base) / (std::exp(-lam * gap) * base));
    }
  }
  v.expect(worst_fact <= 1e-12, "L1 factorisation relative error " + num(worst_fact));
  v.detail << "heat_relL1=" << num(worst_heat) << " cauchy_relL1=" << num(worst_cauchy)
           << " factorisation=" << num(worst_fact);
}

// ---------------------------------------------------------------------------

void moment_law(Verdict& v) {
  const std::vector<double> gaps{0.125, 0.25, 0.5, 1.0, 2.0};
  for (double gamma : {1.0, 1.5, 2.0}) {
    const auto s = make_fractional(cplx{1.0, 0.0}, gamma, 1);
    const double mu = gamma / 2.0;
    const auto g = kernel_grid(1, gamma, gaps.front(), gaps.back(), 4096.0);
    const auto rep = moment_sweep(s, mu, gaps, g, MomentRange::finite, 0.05);
    const double slope = rep.at("fitted_slope"), target = mu / gamma - 1.0;
    v.expect(std::abs(slope - target) <= 0.05, "gamma=" + num(gamma) + " slope " + num(slope));
    v.expect(rep.at("under_resolved") == 0.0, "gamma=" + num(gamma) + " under-resolved");
    v.detail << "gamma=" << gamma << ":slope=" << num(slope) << "(target " << num(target) << ",N=" << g.points() << ") ";
  }
}

// ---------------------------------------------------------------------------

void hormander(Verdict& v) {
  const std::vector<std::int64_t> levels{-2, -1, 0, 1, 2};
  const std::uint64_t seed = 7;
  {
    const auto s = make_fractional(cplx{1.0, 0.0}, 2.0, 1);
    const auto rep = hormander_levels(s, 1, levels, 32, seed);
    const double spread = rep.at("level_spread");
    v.expect(rep.pass, "gamma=2 levels did not all resolve");
    v.expect(spread <= 0.25, "gamma=2 level spread " + num(spread));
    v.detail << "g2:envelope=" << num(rep.at("envelope")) << ",spread=" << num(spread) << " ";
  }
  {
    const auto s = make_fractional(cplx{1.0, 0.0}, 1.5, 1);
    const auto rep = hormander_levels(s, 1, levels, 32, seed);
    const double env = rep.at("envelope");
    v.expect(rep.pass, "gamma=1.5 levels did not all resolve");
    v.expect(std::isfinite(env) && env > 0.0, "gamma=1.5 envelope not finite");
    // q = 2 for gamma = 3/2: levels m and m + 2 are exact rescalings.
    double period = 0.0;
    for (std::size_t i = 0; i + 2 < rep.rows.size(); ++i) {
      const double a = std::get<double>(rep.rows[i][1]), b = std::get<double>(rep.rows[i + 2][1]);
      period = std::max(period, std::abs(a - b) / std::max(a, b));
    }
    v.expect(period <= 1e-6, "gamma=1.5 period-2 self-similarity " + num(period));
    v.detail << "g1.5:envelope=" << num(env) << ",spread=" << num(rep.at("level_spread")) << ",period2=" << num(period) << " ";
  }
  for (double gamma : {1.5, 2.0}) {
    const auto s = make_fractional(cplx{1.0, 0.0}, gamma, 1);
    SweepOptions opt;
    const auto rep = assumption1_sweep(s, opt);
    const double s1 = rep.at("cond_i_small_u_slope"), s3 = rep.at("cond_iii_small_u_slope");
    const double mu = rep.at("cond_iii_mu");
    v.expect(std::abs(s1 - 1.0) <= 0.1, "gamma=" + num(gamma) + " condition (i) exponent " + num(s1));
    const bool even = gamma == 2.0;
    // Gaussian tails beat every power: only the lower bound is meaningful.
    v.expect(even ? s3 >= mu - 0.1 : std::abs(s3 - mu) <= 0.1, "gamma=" + num(gamma) + " condition (iii) exponent " + num(s3));
    v.detail << "sweep g" << gamma << ":(i)=" << num(s1) << ",(iii)=" << num(s3) << "(mu " << num(mu) << ") ";
  }
}

// ---------------------------------------------------------------------------

GridFunction random_forcing(const SpaceTimeGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  auto f = GridFunction::zeros(g, Role::f);
  for (std::size_t n = 0; n + 1 < g.nt(); ++n)
    for (auto& v : f.slice(n)) v = {n01(rng), n01(rng)};
  return f;
}

void solver_exactness(Verdict& v) {
  const auto g = SpaceTimeGrid::uniform(SpatialGrid(1, 64.0, 1024), 0.0, 16.0, 65);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.3, 3.0), V(-1.0, 1.0);
  // Two-piece schedule with random complex coefficients, break on a node.
  std::vector<TimePiece> two{{-INFINITY, 6.0, cplx{U(rng), V(rng)}}, {6.0, INFINITY, cplx{U(rng), V(rng)}}};
  const std::vector<SymbolSpec> symbols{make_fractional(cplx{1.0, 0.0}, 1.5, 1), make_fractional(two, 1.5, 1),
                                        make_fractional(two, 0.7, 1)};
  const MixedNormSpec spec{2.0, 2.0};
  double worst = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto f = random_forcing(g, 10 + i);
    for (double lam : {0.0, 1.0}) {
      const auto back = forward_apply(symbols[i], solve_resolvent(symbols[i], f, lam), lam);
      auto diff = back;
      for (std::size_t j = 0; j < diff.values.size(); ++j) diff.values[j] -= f.values[j];
      worst = std::max(worst, mixed_norm(diff, spec) / mixed_norm(f, spec));
    }
  }
  v.expect(worst <= 1e-8, "round trip relative mixed norm " + num(worst));

  // Scalar ODE oracle per mode: RK4 with 2000 steps per cell.
  const auto& s = symbols[1];
  const double lam = 0.5;
  const auto f = random_forcing(g, 77);
  const auto fs = spectral(f), us = spectral(solve_resolvent(s, f, lam));
  const std::size_t M = g.space.size();
  double worst_mode = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t j = rng() % (M / 8);  // low modes evolve over the whole window
    const double xi = g.space.frequency(static_cast<int>(j));
    cplx y{0.0, 0.0};
    for (std::size_t n = 0; n + 1 < g.nt(); ++n) {
      const cplx z = s.eval(0.5 * (g.t[n] + g.t[n + 1]), Vec{xi}) - lam;
      const cplx fn = fs[n * M + j];
      const int steps = 2000;
      const double h = (g.t[n + 1] - g.t[n]) / steps;
      for (int k = 0; k < steps; ++k) {
        const cplx k1 = z * y + fn, k2 = z * (y + 0.5 * h * k1) + fn, k3 = z * (y + 0.5 * h * k2) + fn,
                   k4 = z * (y + h * k3) + fn;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      const cplx got = us[(n + 1) * M + j];
      worst_mode = std::max(worst_mode, std::abs(got - y) / std::max(1.0, std::abs(y)));
    }
  }
  v.expect(worst_mode <= 1e-8, "mode oracle error " + num(worst_mode));
  v.detail << "round_trip=" << num(worst) << " mode_oracle=" << num(worst_mode);
}

// ---------------------------------------------------------------------------

void estimate_suite(Verdict& v) {
  const auto g = SpaceTimeGrid::uniform(SpatialGrid(1, 64.0, 1024), 0.0, 16.0, 65);
  std::vector<TimePiece> pw{{-INFINITY, 4.0, cplx{1.0, 0.0}}, {4.0, 8.0, cplx{2.0, 0.0}},
                            {8.0, 12.0, cplx{0.6, 0.0}}, {12.0, INFINITY, cplx{1.4, 0.0}}};
  const auto s = make_fractional(pw, 1.5, 1);
  const EnsembleSpec ens{64, Generator::bumps, 0};

  for (double p : {2.0, 3.0}) {
    const MixedNormSpec spec{p, 2.0};
    const auto ap = apriori_ratio(s, ens, g, 1.0, spec);
    const double lr = ap.at("max_lambda_ratio"), stab = ap.at("permuted_over_frozen");
    v.expect(lr <= 1.0 + 1e-6, "p=" + num(p) + " lambda ratio " + num(lr));
    v.expect(stab >= 0.5 && stab <= 2.0, "p=" + num(p) + " permuted/frozen " + num(stab));
    v.detail << "apriori p=" << p << ":lambda_ratio=" << num(lr) << ",perm/frozen=" << num(stab) << " ";

    const std::vector<double> lams{1.0, 2.0, 4.0, 8.0};
    const auto rb = resolvent_bounds(s, ens, g, lams, spec, 0.1);
    const double ss = rb.at("sup_slope"), ms = rb.at("mixed_slope");
    v.expect(std::abs(ss + (p - 1.0) / p) <= 0.1, "p=" + num(p) + " sup exponent " + num(ss));
    v.expect(std::abs(ms + 1.0) <= 0.1, "p=" + num(p) + " mixed exponent " + num(ms));
    v.detail << "resolvent p=" << p << ":sup=" << num(ss) << ",mixed=" << num(ms) << " ";
  }

  double worst_gl2 = 0.0;
  for (double gamma : {0.5, 1.0, 1.5, 2.0}) {
    const auto h = make_fractional(cplx{1.0, 0.0}, gamma, 1);
    for (auto gen : {Generator::gaussian_field, Generator::bumps, Generator::jumps}) {
      const auto rep = g_l2_bound(h, EnsembleSpec{64, gen, 1}, g);
      worst_gl2 = std::max(worst_gl2, rep.at("max_ratio"));
    }
  }
  v.expect(worst_gl2 <= 1.0 + 1e-6, "G L2 ratio " + num(worst_gl2));
  v.detail << "gl2_max=" << num(worst_gl2);
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Map of relative path -> bytes for every file under dir.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

void determinism(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / ("czkit_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cfg = (root / "config.json").string();
  std::ofstream(cfg) << R"({"symbol": {"kind": "fractional", "gamma": 1.5, "dim": 1,
  "pieces": [{"t0": "-inf", "t1": 4, "a": 1.0}, {"t0": 4, "t1": 8, "a": [2.0, 0.3]},
             {"t0": 8, "t1": 12, "a": 0.6}, {"t0": 12, "t1": "inf", "a": 1.4}]},
 "ensemble": {"count": 16, "generator": "jumps", "seed": 11},
 "kernel": {"gaps": [0.25, 0.5, 1.0], "lambdas": [0, 1]}})";
  const std::string force = (root / "forcing.json").string();
  std::ofstream(force) << R"({"terms": [{"amplitude": 1.0,
  "spatial": {"type": "bump", "center": [0.5], "width": 2.0},
  "temporal": {"breaks": [0, 2, 6, 16], "values": [0, 1, 0.5]}}]})";

  const std::vector<std::vector<std::string>> commands{
      {"partition", "--gamma", "pi", "--dim", "2", "--levels", "-6..6", "--out", "partition.csv"},
      {"kernel", "--config", cfg, "--check", "l1", "--out-dir", "."},
      {"kernel", "--config", cfg, "--check", "opnorm", "--out-dir", "."},
      {"estimate", "--config", cfg, "--check", "apriori", "--out-dir", "."},
      {"estimate", "--config", cfg, "--check", "gl2", "--out-dir", "."},
      {"estimate", "--config", cfg, "--check", "resolvent", "--p", "3", "--out-dir", "."},
      {"verify-symbol", "--config", cfg, "--out-dir", "."},
      {"solve", "--config", cfg, "--f", force, "--lambda", "0.5", "--out", "u.bin"},
  };
  std::vector<std::vector<std::pair<std::string, std::string>>> runs;
  const std::vector<std::string> threads{"1", "4", "4", "0"};
  const fs::path cwd = fs::current_path();
  for (std::size_t r = 0; r < threads.size(); ++r) {
    const fs::path dir = root / ("run" + std::to_string(r));
    fs::create_directories(dir);
    fs::current_path(dir);
    for (const auto& c : commands) {
      std::vector<std::string> args{"czkit", "--threads", threads[r]};
      args.insert(args.end(), c.begin(), c.end());
      std::ostringstream out, err;
      const int code = run(args, out, err);
      if (r == 0) v.expect(code == kExitPass || code == kExitFail, c[0] + " exited with " + std::to_string(code) + ": " + err.str());
    }
    fs::current_path(cwd);
    runs.push_back(snapshot(dir));
  }
  std::size_t files = runs[0].size(), bytes = 0;
  for (const auto& [name, data] : runs[0]) bytes += data.size();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    v.expect(runs[r].size() == files, "run " + std::to_string(r) + " wrote a different file set");
    for (std::size_t i = 0; i < std::min(files, runs[r].size()); ++i)
      v.expect(runs[r][i] == runs[0][i], "run " + std::to_string(r) + " (threads " + threads[r] + ") differs in " + runs[0][i].first);
  }
  v.expect(files >= 20, "expected at least 20 output files, got " + std::to_string(files));
  fs::remove_all(root);
  v.detail << "runs=" << runs.size() << " threads=1,4,4,auto files=" << files << " bytes=" << bytes;
}

}  // namespace

int main() {
  int failed = 0;
  failed += run_criterion(1, 1.0, partitions);
  failed += run_criterion(2, 5.0, kernel_oracles);
  failed += run_criterion(3, 30.0, moment_law);
  failed += run_criterion(4, 300.0, hormander);
  failed += run_criterion(5, 0.0, solver_exactness);
  failed += run_criterion(6, 120.0, estimate_suite);
  failed += run_criterion(7, 0.0, determinism);
  std::cout << (failed == 0 ? "ALL CRITERIA PASS" : std::to_string(failed) + " CRITERIA FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
