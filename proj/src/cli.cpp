#include "czkit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "CLI11.hpp"
#include "czkit/config.hpp"
#include "czkit/errors.hpp"
#include "czkit/estimates.hpp"
#include "czkit/kernels.hpp"
#include "czkit/parallel.hpp"
#include "czkit/partitions.hpp"
#include "czkit/solver.hpp"
#include "czkit/symbols.hpp"

namespace czkit {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& data) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError(path + ": cannot open for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ConfigError(path + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError(path + ": rename failed");
  }
}

namespace {

double cell_number(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return 0.0;
}

std::size_t column(const EstimateReport& r, const std::string& name) {
  const auto it = std::find(r.columns.begin(), r.columns.end(), name);
  if (it == r.columns.end()) throw DomainError("report has no column " + name);
  return static_cast<std::size_t>(it - r.columns.begin());
}

// Two-column plot data; `groups` columns split the rows into blocks
// separated by a blank line and headed by a comment.
std::string plot_data(const EstimateReport& r, const std::string& x, const std::string& y,
                      const std::vector<std::string>& groups) {
  const std::size_t cx = column(r, x), cy = column(r, y);
  std::vector<std::size_t> cg;
  for (const auto& g : groups) cg.push_back(column(r, g));
  std::map<std::string, std::vector<std::pair<double, double>>> blocks;
  std::vector<std::string> order;
  for (const auto& row : r.rows) {
    std::string key;
    for (std::size_t i = 0; i < cg.size(); ++i)
      key += (i ? " " : "") + groups[i] + "=" + format_cell(row[cg[i]]);
    if (!blocks.count(key)) order.push_back(key);
    blocks[key].emplace_back(cell_number(row[cx]), cell_number(row[cy]));
  }
  std::ostringstream os;
  os << "# " << x << " " << y << "\n";
  bool first = true;
  for (const auto& key : order) {
    if (!first) os << "\n";
    first = false;
    if (!key.empty()) os << "# " << key << "\n";
    for (const auto& [a, b] : blocks[key]) os << format_double(a) << " " << format_double(b) << "\n";
  }
  return os.str();
}

std::string csv_text(const EstimateReport& r) {
  std::ostringstream os;
  r.write_csv(os);
  return os.str();
}

// check, key, value, tolerance, pass: one row per summary entry.
std::string summary_csv(const EstimateReport& r) {
  std::ostringstream os;
  os << "check,key,value,tolerance,pass\n";
  for (const auto& [k, v] : r.summary) {
    std::string tol;
    for (const auto& [tk, tv] : r.tolerances)
      if (tk == k) tol = format_double(tv);
    os << r.check << "," << k << "," << format_double(v) << "," << tol << "," << (r.pass ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string report_json(const EstimateReport& r, const ordered_json& config) {
  ordered_json j;
  j["toolkit"] = "czkit";
  j["version"] = kToolkitVersion;
  j["schema_version"] = kConfigSchemaVersion;
  j["config"] = config;
  j["report"] = r.to_json();
  return j.dump(2) + "\n";
}

void log_check(std::ostream& err, const EstimateReport& r) {
  err << "check " << r.check << ": " << (r.pass ? "PASS" : "FAIL") << "\n";
}

void write_report(const std::string& dir, const std::string& stem, const EstimateReport& r,
                  const ordered_json& config) {
  const fs::path d(dir);
  write_atomic((d / (stem + ".csv")).string(), csv_text(r));
  write_atomic((d / (stem + "_summary.csv")).string(), summary_csv(r));
  write_atomic((d / (stem + ".json")).string(), report_json(r, config));
}

std::pair<std::int64_t, std::int64_t> parse_levels(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto m = std::stoll(s);
      return {m, m};
    }
    std::size_t used = 0;
    const auto a = std::stoll(s.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(s);
    const std::string rest = s.substr(dots + 2);
    const auto b = std::stoll(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(s);
    if (a > b) throw ConfigError("--levels: empty range " + s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw ConfigError("--levels: expected A..B, got '" + s + "'");
  }
}

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw ConfigError("--locate: bad number '" + tok + "'");
    }
  }
  return out;
}

struct Globals {
  unsigned threads = 0;
};

int cmd_partition(const std::string& gamma_text, int dim, const std::string& levels,
                  const std::string& locate, std::optional<std::int64_t> level, const std::string& out_path,
                  std::ostream& out, std::ostream& err) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("--dim must be 1, 2 or 3");
  Order g;
  try {
    g = Order::parse(gamma_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("--gamma: ") + e.what());
  }
  const Filtration f(g, dim);
  std::string text;
  bool pass = true;
  if (!locate.empty()) {
    if (!level) throw ConfigError("--locate needs --level");
    const auto pt = parse_point(locate);
    if (static_cast<int>(pt.size()) != dim + 1) throw ConfigError("--locate needs t and " + std::to_string(dim) + " coordinates");
    const Cube q = f.locate(pt[0], std::span<const double>(pt).subspan(1), *level);
    const Box b = f.box(q);
    std::ostringstream os;
    os << "m,i0";
    for (int a = 0; a < dim; ++a) os << ",i" << a + 1;
    os << ",t0,t1";
    for (int a = 0; a < dim; ++a) os << ",lo" << a + 1 << ",hi" << a + 1;
    os << "\n" << q.m << "," << q.i0;
    for (int a = 0; a < dim; ++a) os << "," << q.idx[static_cast<std::size_t>(a)];
    os << "," << format_double(b.t0) << "," << format_double(b.t1);
    for (int a = 0; a < dim; ++a)
      os << "," << format_double(b.lo[static_cast<std::size_t>(a)]) << "," << format_double(b.hi[static_cast<std::size_t>(a)]);
    os << "\n";
    text = os.str();
  } else {
    const auto [lo, hi] = parse_levels(levels);
    if (lo < -Filtration::kMaxLevel || hi > Filtration::kMaxLevel)
      throw ConfigError("--levels must lie within +-" + std::to_string(Filtration::kMaxLevel));
    const auto rep = partition_trace(f, lo, hi);
    text = csv_text(rep);
    pass = rep.pass;
    log_check(err, rep);
  }
  if (out_path.empty()) out << text;
  else write_atomic(out_path, text);
  return pass ? kExitPass : kExitFail;
}

int cmd_kernel(const RunConfig& cfg, const std::string& check, const std::string& dir, std::ostream& err) {
  const auto& sym = cfg.symbol;
  const auto& kc = cfg.kernel;
  const auto grid = cfg.grid.build().space;
  EstimateReport rep;
  std::string plot;
  if (check == "l1") {
    rep = l1_sweep(sym, kc.gaps, kc.lambdas, grid, kc.s0);
    plot = plot_data(rep, "t_minus_s", "scaled", {"lambda"});
  } else if (check == "moment") {
    const double mu = kc.mu.value_or(0.5 * sym.gamma());
    rep = moment_sweep(sym, mu, kc.gaps, grid, kc.range, kc.fit_tol, kc.s0);
    plot = plot_data(rep, "t_minus_s", "moment", {});
  } else if (check == "opnorm") {
    rep = opnorm_sweep(sym, kc.gaps, grid, kc.fit_tol, kc.s0);
    plot = plot_data(rep, "t_minus_s", "norm", {});
  } else if (check == "hormander") {
    rep = hormander_levels(sym, sym.dim(), kc.levels, kc.pairs, kc.seed, kc.hormander);
    plot = plot_data(rep, "level", "max_total", {});
  } else if (check == "assumption1") {
    rep = assumption1_sweep(sym, kc.sweep);
    plot = plot_data(rep, "u", "value", {"condition", "scale", "variant"});
  } else {
    throw ConfigError("--check: unknown kernel check '" + check + "'");
  }
  write_report(dir, check, rep, cfg.resolved());
  write_atomic((fs::path(dir) / (check + "_plot.dat")).string(), plot);
  log_check(err, rep);
  return rep.pass ? kExitPass : kExitFail;
}

int cmd_estimate(RunConfig cfg, const std::string& check, std::optional<double> p, std::optional<double> q,
                 std::optional<double> lambda, std::optional<std::uint64_t> seed, const std::string& dir,
                 std::ostream& err) {
  if (p) cfg.estimate.norm.p = *p;
  if (q) cfg.estimate.norm.q = *q;
  if (lambda) {
    if (!(*lambda >= 0)) throw ConfigError("--lambda must be >= 0");
    cfg.estimate.lambda = *lambda;
  }
  if (seed) cfg.ensemble.seed = *seed;
  try {
    cfg.estimate.norm.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("--p/--q: ") + e.what());
  }
  const auto g = cfg.grid.build();
  const auto& e = cfg.estimate;
  EstimateReport rep;
  if (check == "apriori") {
    rep = apriori_ratio(cfg.symbol, cfg.ensemble, g, e.lambda, e.norm);
  } else if (check == "resolvent") {
    rep = resolvent_bounds(cfg.symbol, cfg.ensemble, g, e.lambdas, e.norm, e.slope_tol);
  } else if (check == "gl2") {
    rep = g_l2_bound(cfg.symbol, cfg.ensemble, g);
  } else if (check == "weak11") {
    rep = weak11_refinement(cfg.symbol, g, e.refinements, e.refinement_tol);
  } else {
    throw ConfigError("--check: unknown estimate check '" + check + "'");
  }
  write_report(dir, check, rep, cfg.resolved());
  log_check(err, rep);
  return rep.pass ? kExitPass : kExitFail;
}

int cmd_solve(const RunConfig& cfg, const std::string& forcing, double lambda, const std::string& out_path,
              std::ostream& err) {
  if (!(lambda >= 0)) throw ConfigError("--lambda must be >= 0");
  const auto g = cfg.grid.build();
  const GridFunction f = load_forcing(forcing, g);
  SolveDiagnostics diag;
  const GridFunction u = solve_resolvent(cfg.symbol, f, lambda, &diag);
  ordered_json side = grid_sidecar(u);
  side["lambda"] = lambda;
  side["mean_drift"] = diag.mean_drift;
  side["mean_mode_integral"] = diag.mean_mode_integral;
  side["config"] = cfg.resolved();
  write_atomic(out_path, encode_grid_function(u));
  write_atomic(out_path + ".json", side.dump(2) + "\n");
  if (diag.mean_drift) err << "note: lambda = 0 with nonzero mean forcing; the mean mode drifts\n";
  err << "solve: wrote " << out_path << "\n";
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, const std::string& dir, std::ostream& err) {
  const auto rep = verify_conditions(cfg.symbol, cfg.verify.tol);
  write_report(dir, "verify", rep, cfg.resolved());
  log_check(err, rep);
  return rep.pass ? kExitPass : kExitFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"czkit: filtrations, kernels, solvers and estimates for parabolic pseudo-differential equations"};
  app.set_version_flag("--version", std::string("czkit ") + kToolkitVersion + " (config schema " +
                                        std::to_string(kConfigSchemaVersion) + ")");
  app.require_subcommand(1);
  Globals glob;
  app.add_option("--threads", glob.threads, "Worker threads (0 = logical cores)");
  app.fallthrough();

  std::string gamma_text, levels = "-3..3", locate, out_path, config, check, dir = ".", forcing;
  int dim = 1;
  std::optional<std::int64_t> level;
  std::optional<double> p, q, lambda_opt;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  double lambda = 1.0;

  auto* part = app.add_subcommand("partition", "Filtration trace or cube lookup");
  part->add_option("--gamma", gamma_text, "Order: decimal, p/q, pi, e or sqrt2")->required();
  part->add_option("--dim", dim, "Spatial dimension");
  part->add_option("--levels", levels, "Level range A..B");
  part->add_flag("--trace", trace, "Print the level trace (default)");
  part->add_option("--locate", locate, "Point t,x1[,x2...]");
  part->add_option("--level", level, "Level for --locate");
  part->add_option("--out", out_path, "Output file (default stdout)");

  auto* kern = app.add_subcommand("kernel", "Kernel sweeps");
  kern->add_option("--config", config)->required();
  kern->add_option("--check", check)->required()->check(
      CLI::IsMember({"l1", "moment", "hormander", "assumption1", "opnorm"}));
  kern->add_option("--out-dir", dir, "Report directory");

  auto* solve = app.add_subcommand("solve", "Solve u_t = A u - lambda u + f");
  solve->add_option("--config", config)->required();
  solve->add_option("--f", forcing, "Forcing JSON")->required();
  solve->add_option("--lambda", lambda, "lambda >= 0");
  solve->add_option("--out", out_path, "Binary output")->required();

  auto* est = app.add_subcommand("estimate", "Ensemble estimates");
  est->add_option("--config", config)->required();
  est->add_option("--check", check)->required()->check(CLI::IsMember({"apriori", "resolvent", "gl2", "weak11"}));
  est->add_option("--p", p);
  est->add_option("--q", q);
  est->add_option("--lambda", lambda_opt);
  est->add_option("--seed", seed);
  est->add_option("--out-dir", dir, "Report directory");

  auto* ver = app.add_subcommand("verify-symbol", "Ellipticity and derivative conditions");
  ver->add_option("--config", config)->required();
  ver->add_option("--out-dir", dir, "Report directory");

  try {
    std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rev.begin(), rev.end());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    set_thread_count(glob.threads);
    if (part->parsed()) return cmd_partition(gamma_text, dim, levels, locate, level, out_path, out, err);
    const RunConfig cfg = load_config(config);
    if (kern->parsed()) return cmd_kernel(cfg, check, dir, err);
    if (solve->parsed()) return cmd_solve(cfg, forcing, lambda, out_path, err);
    if (est->parsed()) return cmd_estimate(cfg, check, p, q, lambda_opt, seed, dir, err);
    if (ver->parsed()) return cmd_verify(cfg, dir, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::domain_error& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace czkit
