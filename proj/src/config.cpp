#include "czkit/config.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "czkit/errors.hpp"

namespace czkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

// Strict view of one JSON object: every key must be consumed by a getter,
// otherwise finish() rejects it.
class Obj {
 public:
  Obj(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& k) {
    used_.insert(k);
    return j_.contains(k);
  }
  const ordered_json& at(const std::string& k) {
    used_.insert(k);
    if (!j_.contains(k)) fail(sub(k), "missing required field");
    return j_.at(k);
  }
  std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(sub(it.key()), "unknown key");
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(path, "expected a number");
}

double as_finite(const ordered_json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::int64_t as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t as_seed(const ordered_json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  fail(path, "expected a nonnegative integer");
}

std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

cplx as_complex(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2)
    return {as_finite(j[0], path + "[0]"), as_finite(j[1], path + "[1]")};
  fail(path, "expected a number or [re, im]");
}

std::vector<double> as_numbers(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_finite(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::int64_t> as_ints(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

MultiIndex as_multi_index(const ordered_json& j, int dim, const std::string& path) {
  const auto e = as_ints(j, path);
  if (static_cast<int>(e.size()) != dim) fail(path, "expected " + std::to_string(dim) + " entries");
  MultiIndex a;
  a.dim = dim;
  for (int i = 0; i < dim; ++i) {
    if (e[static_cast<std::size_t>(i)] < 0) fail(path, "entries must be nonnegative");
    a.e[static_cast<std::size_t>(i)] = static_cast<int>(e[static_cast<std::size_t>(i)]);
  }
  return a;
}

LevyDensity as_density(const ordered_json& j, int dim, double gamma, const std::string& path) {
  if (j.is_number()) return LevyDensity::constant(dim, as_finite(j, path));
  if (j.is_string()) {
    if (j.get<std::string>() == "fractional_laplacian")
      return LevyDensity::constant(dim, fractional_laplacian_constant(dim, gamma));
    fail(path, "expected a number, \"fractional_laplacian\" or an object");
  }
  Obj o(j, path);
  LevyDensity d;
  if (dim == 1) {
    d.plus = as_finite(o.at("plus"), o.sub("plus"));
    d.minus = as_finite(o.at("minus"), o.sub("minus"));
  } else {
    d.c0 = as_finite(o.at("c0"), o.sub("c0"));
    if (o.has("cos")) d.cos_coeffs = as_numbers(j.at("cos"), o.sub("cos"));
    if (o.has("sin")) d.sin_coeffs = as_numbers(j.at("sin"), o.sub("sin"));
  }
  o.finish();
  return d;
}

// Coefficients of one piece for the leaf kinds.
Coefficients as_coeffs(Obj& o, const ordered_json& j, SymbolKind kind, int dim, int m, double gamma) {
  switch (kind) {
    case SymbolKind::fractional: return as_complex(o.at("a"), o.sub("a"));
    case SymbolKind::poly2m: {
      const auto& terms = o.at("terms");
      if (!terms.is_array() || terms.empty()) fail(o.sub("terms"), "expected a nonempty array");
      std::vector<PolyTerm> out;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        Obj t(terms[i], o.sub("terms") + "[" + std::to_string(i) + "]");
        PolyTerm pt;
        pt.alpha = as_multi_index(t.at("alpha"), dim, t.sub("alpha"));
        pt.beta = as_multi_index(t.at("beta"), dim, t.sub("beta"));
        if (pt.alpha.order() != m || pt.beta.order() != m) fail(t.path(), "|alpha| and |beta| must equal m");
        pt.a = as_complex(t.at("a"), t.sub("a"));
        t.finish();
        out.push_back(pt);
      }
      return out;
    }
    case SymbolKind::levy: return as_density(o.at("density"), dim, gamma, o.sub("density"));
    default: break;
  }
  (void)j;
  fail(o.path(), "kind has no piece coefficients");
}

const char* coeff_key(SymbolKind kind) {
  switch (kind) {
    case SymbolKind::fractional: return "a";
    case SymbolKind::poly2m: return "terms";
    case SymbolKind::levy: return "density";
    default: return "";
  }
}

std::vector<TimePiece> as_schedule(Obj& o, const ordered_json& j, SymbolKind kind, int dim, int m,
                                   double gamma) {
  const std::string key = coeff_key(kind);
  const bool pieces = o.has("pieces");
  const bool constant = o.has(key);
  if (pieces == constant) fail(o.path(), "give exactly one of \"pieces\" and \"" + key + "\"");
  if (constant) return constant_schedule(as_coeffs(o, j, kind, dim, m, gamma));
  const auto& arr = j.at("pieces");
  if (!arr.is_array() || arr.empty()) fail(o.sub("pieces"), "expected a nonempty array");
  std::vector<TimePiece> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Obj p(arr[i], o.sub("pieces") + "[" + std::to_string(i) + "]");
    TimePiece tp;
    tp.t0 = as_number(p.at("t0"), p.sub("t0"));
    tp.t1 = as_number(p.at("t1"), p.sub("t1"));
    tp.coeffs = as_coeffs(p, arr[i], kind, dim, m, gamma);
    p.finish();
    out.push_back(std::move(tp));
  }
  return out;
}

SymbolKind as_kind(const std::string& s, const std::string& path) {
  for (auto k : {SymbolKind::fractional, SymbolKind::poly2m, SymbolKind::levy, SymbolKind::composed,
                 SymbolKind::scaled})
    if (to_string(k) == s) return k;
  fail(path, "unknown symbol kind '" + s + "'");
}

int as_dim(Obj& o) {
  const auto d = as_int(o.at("dim"), o.sub("dim"));
  if (d < 1 || d > kMaxDim) fail(o.sub("dim"), "dim must be 1, 2 or 3");
  return static_cast<int>(d);
}

template <class F>
void optional_field(Obj& o, const ordered_json& j, const std::string& k, F&& f) {
  if (o.has(k)) f(j.at(k), o.sub(k));
}

GridConfig parse_grid(const ordered_json& j) {
  Obj o(j, "grid");
  GridConfig g;
  optional_field(o, j, "dim", [&](const auto& v, const auto& p) {
    g.dim = static_cast<int>(as_int(v, p));
    if (g.dim < 1 || g.dim > kMaxDim) fail(p, "dim must be 1, 2 or 3");
  });
  optional_field(o, j, "L", [&](const auto& v, const auto& p) {
    g.L = as_finite(v, p);
    if (!(g.L > 0)) fail(p, "L must be positive");
  });
  optional_field(o, j, "N", [&](const auto& v, const auto& p) {
    const auto n = as_int(v, p);
    if (n < 2 || n > (1 << 24) || (n & (n - 1)) != 0) fail(p, "N must be a power of two >= 2");
    g.N = static_cast<int>(n);
  });
  optional_field(o, j, "t0", [&](const auto& v, const auto& p) { g.t0 = as_finite(v, p); });
  optional_field(o, j, "t1", [&](const auto& v, const auto& p) { g.t1 = as_finite(v, p); });
  optional_field(o, j, "nodes", [&](const auto& v, const auto& p) {
    const auto n = as_int(v, p);
    if (n < 3 || n > (1 << 20)) fail(p, "nodes must be in [3, 2^20]");
    g.nodes = static_cast<int>(n);
  });
  if (!(g.t1 > g.t0)) fail("grid", "t1 must exceed t0");
  o.finish();
  return g;
}

EnsembleSpec parse_ensemble(const ordered_json& j) {
  Obj o(j, "ensemble");
  EnsembleSpec e;
  optional_field(o, j, "count", [&](const auto& v, const auto& p) {
    const auto c = as_int(v, p);
    if (c < 1 || c > 100000) fail(p, "count must be in [1, 100000]");
    e.count = static_cast<int>(c);
  });
  optional_field(o, j, "generator", [&](const auto& v, const auto& p) {
    try {
      e.generator = parse_generator(as_string(v, p));
    } catch (const ValidationError& ex) {
      fail(p, ex.what());
    }
  });
  optional_field(o, j, "seed", [&](const auto& v, const auto& p) { e.seed = as_seed(v, p); });
  o.finish();
  return e;
}

EstimateConfig parse_estimate(const ordered_json& j) {
  Obj o(j, "estimate");
  EstimateConfig e;
  optional_field(o, j, "p", [&](const auto& v, const auto& p) { e.norm.p = as_finite(v, p); });
  optional_field(o, j, "q", [&](const auto& v, const auto& p) { e.norm.q = as_finite(v, p); });
  optional_field(o, j, "lambda", [&](const auto& v, const auto& p) {
    e.lambda = as_finite(v, p);
    if (e.lambda < 0) fail(p, "lambda must be >= 0");
  });
  optional_field(o, j, "lambdas", [&](const auto& v, const auto& p) {
    e.lambdas = as_numbers(v, p);
    if (e.lambdas.size() < 2) fail(p, "need two or more values");
    for (double l : e.lambdas)
      if (!(l > 0)) fail(p, "values must be positive");
  });
  optional_field(o, j, "slope_tol", [&](const auto& v, const auto& p) { e.slope_tol = as_finite(v, p); });
  optional_field(o, j, "refinements", [&](const auto& v, const auto& p) {
    const auto r = as_int(v, p);
    if (r < 1 || r > 4) fail(p, "refinements must be in [1, 4]");
    e.refinements = static_cast<int>(r);
  });
  optional_field(o, j, "refinement_tol", [&](const auto& v, const auto& p) { e.refinement_tol = as_finite(v, p); });
  o.finish();
  try {
    e.norm.validate();
  } catch (const ValidationError& ex) {
    fail("estimate", ex.what());
  }
  return e;
}

KernelConfig parse_kernel(const ordered_json& j) {
  Obj o(j, "kernel");
  KernelConfig k;
  auto positive_list = [](const ordered_json& v, const std::string& p) {
    auto xs = as_numbers(v, p);
    if (xs.empty()) fail(p, "expected a nonempty array");
    for (double x : xs)
      if (!(x > 0)) fail(p, "values must be positive");
    return xs;
  };
  optional_field(o, j, "gaps", [&](const auto& v, const auto& p) { k.gaps = positive_list(v, p); });
  optional_field(o, j, "lambdas", [&](const auto& v, const auto& p) {
    k.lambdas = as_numbers(v, p);
    for (double l : k.lambdas)
      if (l < 0) fail(p, "values must be >= 0");
  });
  // null selects the default gamma / 2, as written by resolved().
  optional_field(o, j, "mu", [&](const auto& v, const auto& p) {
    if (!v.is_null()) k.mu = as_finite(v, p);
  });
  optional_field(o, j, "moment_range", [&](const auto& v, const auto& p) {
    const auto s = as_string(v, p);
    if (s == "proof") k.range = MomentRange::proof;
    else if (s == "finite") k.range = MomentRange::finite;
    else fail(p, "expected \"proof\" or \"finite\"");
  });
  optional_field(o, j, "fit_tol", [&](const auto& v, const auto& p) { k.fit_tol = as_finite(v, p); });
  optional_field(o, j, "s0", [&](const auto& v, const auto& p) { k.s0 = as_finite(v, p); });
  optional_field(o, j, "levels", [&](const auto& v, const auto& p) {
    k.levels = as_ints(v, p);
    if (k.levels.empty()) fail(p, "expected a nonempty array");
    for (auto m : k.levels)
      if (m < -Filtration::kMaxLevel || m > Filtration::kMaxLevel) fail(p, "level out of range");
  });
  optional_field(o, j, "pairs", [&](const auto& v, const auto& p) {
    const auto n = as_int(v, p);
    if (n < 1 || n > 4096) fail(p, "pairs must be in [1, 4096]");
    k.pairs = static_cast<int>(n);
  });
  optional_field(o, j, "seed", [&](const auto& v, const auto& p) { k.seed = as_seed(v, p); });
  optional_field(o, j, "max_points", [&](const auto& v, const auto& p) {
    const auto n = as_int(v, p);
    if (n < 16 || n > (1 << 22) || (n & (n - 1)) != 0) fail(p, "max_points must be a power of two");
    k.hormander.max_points = static_cast<int>(n);
    k.sweep.max_points = static_cast<int>(n);
  });
  optional_field(o, j, "collapse_tol", [&](const auto& v, const auto& p) { k.sweep.collapse_tol = as_finite(v, p); });
  optional_field(o, j, "slope_tol", [&](const auto& v, const auto& p) { k.sweep.slope_tol = as_finite(v, p); });
  optional_field(o, j, "sweep_mu", [&](const auto& v, const auto& p) { k.sweep.mu = as_finite(v, p); });
  o.finish();
  return k;
}

VerifyConfig parse_verify(const ordered_json& j) {
  Obj o(j, "verify");
  VerifyConfig v;
  optional_field(o, j, "tol", [&](const auto& x, const auto& p) {
    v.tol = as_finite(x, p);
    if (!(v.tol >= 0 && v.tol < 1)) fail(p, "tol must be in [0, 1)");
  });
  o.finish();
  return v;
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON (" +
                      e.what() + ")");
  }
}

}  // namespace

SpaceTimeGrid GridConfig::build() const {
  return SpaceTimeGrid::uniform(SpatialGrid(dim, L, N), t0, t1, nodes);
}

SymbolSpec parse_symbol(const ordered_json& j, const std::string& where) {
  Obj o(j, where);
  const SymbolKind kind = as_kind(as_string(o.at("kind"), o.sub("kind")), o.sub("kind"));
  SymbolSpec out;
  try {
    switch (kind) {
      case SymbolKind::fractional: {
        const int dim = as_dim(o);
        const double gamma = as_finite(o.at("gamma"), o.sub("gamma"));
        out = make_fractional(as_schedule(o, j, kind, dim, 0, gamma), gamma, dim);
        break;
      }
      case SymbolKind::poly2m: {
        const int dim = as_dim(o);
        const auto m = as_int(o.at("m"), o.sub("m"));
        if (m < 1 || m > 4) fail(o.sub("m"), "m must be in [1, 4]");
        out = make_poly2m(as_schedule(o, j, kind, dim, static_cast<int>(m), 0.0), static_cast<int>(m), dim);
        break;
      }
      case SymbolKind::levy: {
        const int dim = as_dim(o);
        const double gamma = as_finite(o.at("gamma"), o.sub("gamma"));
        out = make_levy(as_schedule(o, j, kind, dim, 0, gamma), gamma, dim);
        break;
      }
      case SymbolKind::composed: {
        const SymbolSpec first = parse_symbol(o.at("first"), o.sub("first"));
        const double a = as_finite(o.at("a"), o.sub("a"));
        if (o.has("second") && !j.at("second").is_null()) {
          const SymbolSpec second = parse_symbol(j.at("second"), o.sub("second"));
          out = compose(first, a, second, as_finite(o.at("b"), o.sub("b")));
        } else {
          out = power(first, a);
        }
        break;
      }
      case SymbolKind::scaled: {
        const SymbolSpec base = parse_symbol(o.at("base"), o.sub("base"));
        const double c = as_finite(o.at("factor"), o.sub("factor"));
        const double origin = o.has("origin") ? as_finite(j.at("origin"), o.sub("origin")) : 0.0;
        out = rescale(base, c, origin);
        break;
      }
    }
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  o.finish();
  return out;
}

RunConfig parse_config(const std::string& text) {
  const ordered_json j = parse_json_text(text, "config");
  Obj o(j, "");
  RunConfig c;
  if (o.has("schema_version")) {
    const auto v = as_int(j.at("schema_version"), "schema_version");
    if (v != kConfigSchemaVersion) fail("schema_version", "unsupported version " + std::to_string(v));
  }
  c.symbol_json = o.at("symbol");
  if (o.has("grid")) c.grid = parse_grid(j.at("grid"));
  if (o.has("ensemble")) c.ensemble = parse_ensemble(j.at("ensemble"));
  if (o.has("estimate")) c.estimate = parse_estimate(j.at("estimate"));
  if (o.has("kernel")) c.kernel = parse_kernel(j.at("kernel"));
  if (o.has("verify")) c.verify = parse_verify(j.at("verify"));
  o.finish();
  c.symbol = parse_symbol(c.symbol_json, "symbol");
  if (c.symbol.dim() != c.grid.dim) fail("grid.dim", "does not match symbol dim");
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ordered_json RunConfig::resolved() const {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["symbol"] = symbol_json;
  j["grid"] = {{"dim", grid.dim}, {"L", grid.L},         {"N", grid.N},
               {"t0", grid.t0},   {"t1", grid.t1},       {"nodes", grid.nodes}};
  j["ensemble"] = {{"count", ensemble.count}, {"generator", to_string(ensemble.generator)},
                   {"seed", ensemble.seed}};
  j["estimate"] = {{"p", estimate.norm.p},
                   {"q", estimate.norm.q},
                   {"lambda", estimate.lambda},
                   {"lambdas", estimate.lambdas},
                   {"slope_tol", estimate.slope_tol},
                   {"refinements", estimate.refinements},
                   {"refinement_tol", estimate.refinement_tol}};
  ordered_json k;
  k["gaps"] = kernel.gaps;
  k["lambdas"] = kernel.lambdas;
  k["mu"] = kernel.mu ? ordered_json(*kernel.mu) : ordered_json(nullptr);
  k["moment_range"] = kernel.range == MomentRange::proof ? "proof" : "finite";
  k["fit_tol"] = kernel.fit_tol;
  k["s0"] = kernel.s0;
  k["levels"] = kernel.levels;
  k["pairs"] = kernel.pairs;
  k["seed"] = kernel.seed;
  k["max_points"] = kernel.hormander.max_points;
  k["collapse_tol"] = kernel.sweep.collapse_tol;
  k["slope_tol"] = kernel.sweep.slope_tol;
  k["sweep_mu"] = kernel.sweep.mu;
  j["kernel"] = k;
  j["verify"] = {{"tol", verify.tol}};
  return j;
}

// ---------------------------------------------------------------------------
// Forcing

GridFunction parse_forcing(const ordered_json& j, const SpaceTimeGrid& g, const std::string& base_dir) {
  Obj o(j, "forcing");
  if (o.has("file")) {
    std::filesystem::path p = as_string(j.at("file"), "forcing.file");
    o.finish();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const auto side_text = read_file(p.string() + ".json");
    const auto sidecar = parse_json_text(side_text, p.string() + ".json");
    return decode_grid_function(read_file(p.string()), sidecar, g);
  }
  const auto& terms = o.at("terms");
  o.finish();
  if (!terms.is_array() || terms.empty()) fail("forcing.terms", "expected a nonempty array");
  const auto& sp = g.space;
  GridFunction f = GridFunction::zeros(g, Role::f);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = "forcing.terms[" + std::to_string(i) + "]";
    Obj t(terms[i], tp);
    const cplx amp = t.has("amplitude") ? as_complex(terms[i].at("amplitude"), t.sub("amplitude")) : cplx{1.0, 0.0};

    // Spatial factor.
    std::vector<cplx> space(sp.size());
    {
      const auto& sj = t.at("spatial");
      Obj s(sj, t.sub("spatial"));
      const auto type = as_string(s.at("type"), s.sub("type"));
      if (type == "bump") {
        const auto c = as_numbers(s.at("center"), s.sub("center"));
        if (static_cast<int>(c.size()) != sp.dim()) fail(s.sub("center"), "wrong length");
        const double w = as_finite(s.at("width"), s.sub("width"));
        if (!(w > 0)) fail(s.sub("width"), "width must be positive");
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const Vec x = sp.point(k);
          double r2 = 0.0;
          for (int a = 0; a < sp.dim(); ++a) {
            double d = x[a] - c[static_cast<std::size_t>(a)];
            d -= sp.extent() * std::nearbyint(d / sp.extent());
            r2 += d * d;
          }
          space[k] = std::exp(-0.5 * r2 / (w * w));
        }
      } else if (type == "plane_wave") {
        const auto kk = as_ints(s.at("k"), s.sub("k"));
        if (static_cast<int>(kk.size()) != sp.dim()) fail(s.sub("k"), "wrong length");
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const Vec x = sp.point(k);
          double ph = 0.0;
          for (int a = 0; a < sp.dim(); ++a)
            ph += 2.0 * std::numbers::pi * static_cast<double>(kk[static_cast<std::size_t>(a)]) * x[a] / sp.extent();
          space[k] = std::polar(1.0, ph);
        }
      } else {
        fail(s.sub("type"), "expected \"bump\" or \"plane_wave\"");
      }
      s.finish();
    }

    // Temporal factor: values[i] on [breaks[i], breaks[i+1]), zero elsewhere.
    std::vector<double> breaks, values;
    {
      Obj tm(t.at("temporal"), t.sub("temporal"));
      breaks = as_numbers(tm.at("breaks"), tm.sub("breaks"));
      values = as_numbers(tm.at("values"), tm.sub("values"));
      if (breaks.size() != values.size() + 1) fail(tm.path(), "need one more break than values");
      for (std::size_t b = 1; b < breaks.size(); ++b)
        if (!(breaks[b] > breaks[b - 1])) fail(tm.sub("breaks"), "must be increasing");
      tm.finish();
    }
    t.finish();
    for (std::size_t n = 0; n + 1 < g.nt(); ++n) {
      const double tn = g.t[n];
      double h = 0.0;
      for (std::size_t b = 0; b < values.size(); ++b)
        if (tn >= breaks[b] && tn < breaks[b + 1]) h = values[b];
      if (h == 0.0) continue;
      auto sl = f.slice(n);
      for (std::size_t k = 0; k < sp.size(); ++k) sl[k] += amp * h * space[k];
    }
  }
  return f;
}

GridFunction load_forcing(const std::string& path, const SpaceTimeGrid& g) {
  const std::string text = read_file(path);
  const auto j = parse_json_text(text, path);
  try {
    return parse_forcing(j, g, std::filesystem::path(path).parent_path().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string encode_grid_function(const GridFunction& u) {
  std::string out(u.values.size() * 16, '\0');
  char* p = out.data();
  for (const cplx& v : u.values) {
    for (double x : {v.real(), v.imag()}) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(p, &bits, 8);
      p += 8;
    }
  }
  return out;
}

ordered_json grid_sidecar(const GridFunction& u) {
  const auto& sp = u.grid.space;
  ordered_json j;
  j["format"] = "f64le";
  j["layout"] = "time-major, spatial row-major, complex interleaved (re, im)";
  j["role"] = u.role == Role::u ? "u" : u.role == Role::f ? "f" : "residual";
  j["dim"] = sp.dim();
  j["L"] = sp.extent();
  j["N"] = sp.points();
  j["nodes"] = u.grid.nt();
  j["t"] = u.grid.t;
  std::vector<std::size_t> shape{u.grid.nt()};
  for (int a = 0; a < sp.dim(); ++a) shape.push_back(static_cast<std::size_t>(sp.points()));
  shape.push_back(2);
  j["shape"] = shape;
  j["x0"] = sp.coord(0);
  j["dx"] = sp.dx();
  return j;
}

GridFunction decode_grid_function(const std::string& bytes, const ordered_json& sidecar,
                                  const SpaceTimeGrid& g) {
  Obj o(sidecar, "sidecar");
  if (as_string(o.at("format"), "sidecar.format") != "f64le") fail("sidecar.format", "expected \"f64le\"");
  const auto dim = as_int(o.at("dim"), "sidecar.dim");
  const auto N = as_int(o.at("N"), "sidecar.N");
  const auto nodes = as_int(o.at("nodes"), "sidecar.nodes");
  const double L = as_finite(o.at("L"), "sidecar.L");
  for (const char* k : {"layout", "role", "t", "shape", "x0", "dx"}) o.has(k);
  // Run metadata that solve appends; decoding does not depend on it.
  for (const char* k : {"lambda", "mean_drift", "mean_mode_integral", "config"}) o.has(k);
  o.finish();
  if (dim != g.space.dim() || N != g.space.points() || nodes != static_cast<std::int64_t>(g.nt()) ||
      std::abs(L - g.space.extent()) > 1e-12 * g.space.extent())
    fail("sidecar", "grid metadata does not match the configured grid");
  GridFunction f = GridFunction::zeros(g, Role::f);
  if (bytes.size() != f.values.size() * 16) fail("forcing.file", "size does not match the grid");
  const char* p = bytes.data();
  for (cplx& v : f.values) {
    double xs[2];
    for (double& x : xs) {
      std::uint64_t bits;
      std::memcpy(&bits, p, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      x = std::bit_cast<double>(bits);
      p += 8;
    }
    v = {xs[0], xs[1]};
  }
  return f;
}

}  // namespace czkit
