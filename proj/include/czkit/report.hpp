#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace czkit {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Shortest round-trip text form of a double ("nan", "inf", "-inf" for
/// non-finite values). Output is locale independent.
std::string format_double(double v);
std::string format_cell(const Cell& c);

/// Structured record of a verification run.
struct EstimateReport {
  std::string check;
  bool pass = true;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;

  void set(const std::string& key, double value);
  std::optional<double> find(const std::string& key) const;
  double at(const std::string& key) const;
  void tolerance(const std::string& key, double value);
  void note(std::string text) { notes.push_back(std::move(text)); }
  /// Folds a sub-check into the overall flag and records it in the summary
  /// as 0/1 under `key`.
  void require(const std::string& key, bool ok);

  void write_csv(std::ostream& os) const;
  nlohmann::ordered_json to_json() const;
};

}  // namespace czkit
