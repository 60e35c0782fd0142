#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "estimates.hpp"
#include "grid.hpp"
#include "json.hpp"
#include "kernels.hpp"
#include "solver.hpp"
#include "symbols.hpp"

namespace czkit {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

struct GridConfig {
  int dim = 1;
  double L = 64.0;
  int N = 1024;
  double t0 = 0.0;
  double t1 = 16.0;
  int nodes = 65;

  SpaceTimeGrid build() const;
};

struct EstimateConfig {
  MixedNormSpec norm;
  double lambda = 1.0;
  std::vector<double> lambdas{1.0, 2.0, 4.0, 8.0};
  double slope_tol = 0.1;
  int refinements = 2;
  double refinement_tol = 0.2;
};

struct KernelConfig {
  std::vector<double> gaps{0.125, 0.25, 0.5, 1.0, 2.0};
  std::vector<double> lambdas{0.0, 0.5, 1.0, 2.0};
  /// Moment exponent; unset selects gamma / 2.
  std::optional<double> mu;
  MomentRange range = MomentRange::finite;
  double fit_tol = 0.05;
  double s0 = 0.0;
  std::vector<std::int64_t> levels{-2, -1, 0, 1, 2};
  int pairs = 32;
  std::uint64_t seed = 0;
  HormanderOptions hormander;
  SweepOptions sweep;
};

struct VerifyConfig {
  double tol = 1e-3;
};

/// A validated run configuration. Unknown keys anywhere are rejected;
/// absent sections take the defaults above.
struct RunConfig {
  ordered_json symbol_json;
  SymbolSpec symbol;
  GridConfig grid;
  EnsembleSpec ensemble;
  EstimateConfig estimate;
  KernelConfig kernel;
  VerifyConfig verify;

  /// Every field with defaults filled in, in a fixed key order.
  ordered_json resolved() const;
};

/// Throws ConfigError with "line:column" for syntax errors and the dotted
/// field path for schema errors; symbol validation failures surface as
/// ValidationError from the builders.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Symbol from its JSON form; `where` prefixes error paths.
SymbolSpec parse_symbol(const ordered_json& j, const std::string& where = "symbol");

/// Forcing file: a sum of separable terms, or a binary grid file with a
/// JSON sidecar. `base_dir` resolves a relative "file".
GridFunction parse_forcing(const ordered_json& j, const SpaceTimeGrid& g, const std::string& base_dir);
GridFunction load_forcing(const std::string& path, const SpaceTimeGrid& g);

/// Raw little-endian doubles (re, im interleaved, time-major) and the
/// metadata sidecar.
std::string encode_grid_function(const GridFunction& u);
ordered_json grid_sidecar(const GridFunction& u);
GridFunction decode_grid_function(const std::string& bytes, const ordered_json& sidecar,
                                  const SpaceTimeGrid& g);

}  // namespace czkit
