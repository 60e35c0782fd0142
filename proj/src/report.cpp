#include "czkit/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace czkit {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

void EstimateReport::set(const std::string& key, double value) {
  for (auto& [k, v] : summary)
    if (k == key) {
      v = value;
      return;
    }
  summary.emplace_back(key, value);
}

std::optional<double> EstimateReport::find(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  return std::nullopt;
}

double EstimateReport::at(const std::string& key) const {
  if (auto v = find(key)) return *v;
  throw std::out_of_range("report '" + check + "' has no summary key '" + key + "'");
}

void EstimateReport::tolerance(const std::string& key, double value) {
  for (auto& [k, v] : tolerances)
    if (k == key) {
      v = value;
      return;
    }
  tolerances.emplace_back(key, value);
}

void EstimateReport::require(const std::string& key, bool ok) {
  set(key, ok ? 1.0 : 0.0);
  pass = pass && ok;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

void EstimateReport::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(format_cell(row[i]));
    os << '\n';
  }
}

nlohmann::ordered_json EstimateReport::to_json() const {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["pass"] = pass;
  auto& s = j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary) s[k] = json_number(v);
  auto& t = j["tolerances"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : tolerances) t[k] = json_number(v);
  j["notes"] = notes;
  return j;
}

}  // namespace czkit
