#include "czkit/partitions.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>

#include "czkit/errors.hpp"

namespace czkit {

namespace {

using i128 = __int128;

constexpr long double kGuard = 1e-9L;

std::int64_t floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return static_cast<std::int64_t>(q);
}

}  // namespace

// ---------------------------------------------------------------------------
// Order

Order Order::rational(std::int64_t p, std::int64_t q) {
  if (q <= 0 || p <= 0) throw DomainError("order must be a positive rational p/q");
  const std::int64_t g = std::gcd(p, q);
  Order o;
  o.rational_ = true;
  o.p_ = p / g;
  o.q_ = q / g;
  o.value_ = static_cast<long double>(o.p_) / static_cast<long double>(o.q_);
  o.label_ = o.q_ == 1 ? std::to_string(o.p_) : std::to_string(o.p_) + "/" + std::to_string(o.q_);
  return o;
}

Order Order::parse(std::string_view text) {
  auto named = [&](long double v, const char* label) {
    Order o;
    o.rational_ = false;
    o.value_ = v;
    o.label_ = label;
    return o;
  };
  if (text == "pi" || text == "π") return named(std::numbers::pi_v<long double>, "pi");
  if (text == "e") return named(std::numbers::e_v<long double>, "e");
  if (text == "sqrt2" || text == "√2") return named(std::numbers::sqrt2_v<long double>, "sqrt2");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t p = 0, q = 0;
    auto a = text.substr(0, slash), b = text.substr(slash + 1);
    auto r1 = std::from_chars(a.data(), a.data() + a.size(), p);
    auto r2 = std::from_chars(b.data(), b.data() + b.size(), q);
    if (r1.ec != std::errc{} || r1.ptr != a.data() + a.size() || r2.ec != std::errc{} ||
        r2.ptr != b.data() + b.size())
      throw DomainError("cannot parse order '" + std::string(text) + "'");
    return rational(p, q);
  }

  std::int64_t num = 0, den = 1;
  bool dot = false, any = false;
  int digits = 0;
  for (char c : text) {
    if (c == '.' && !dot) {
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw DomainError("cannot parse order '" + std::string(text) + "'");
    any = true;
    if (num == 0 && c == '0' && !dot) continue;
    if (++digits > 17) throw DomainError("order '" + std::string(text) + "' has too many digits");
    num = num * 10 + (c - '0');
    if (dot) den *= 10;
  }
  if (!any) throw DomainError("cannot parse order '" + std::string(text) + "'");
  return rational(num, den);
}

Order Order::from_double(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("order must be positive and finite");
  char buf[128];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

std::int64_t Order::floor_times(std::int64_t m) const {
  if (rational_) return floor_div(static_cast<i128>(m) * p_, q_);
  const long double x = static_cast<long double>(m) * value_;
  const long double f = std::floor(x);
  if (m != 0 && (x - f < kGuard || f + 1 - x < kGuard))
    throw DomainError("m * gamma lies within the guard band of an integer");
  return static_cast<std::int64_t>(f);
}

int Order::compare(std::int64_t m, std::int64_t c) const {
  if (rational_) {
    const i128 v = static_cast<i128>(m) * p_ - static_cast<i128>(c) * q_;
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
  }
  if (m == 0) return c > 0 ? -1 : (c < 0 ? 1 : 0);
  const long double v = static_cast<long double>(m) * value_ - static_cast<long double>(c);
  if (std::abs(v) < kGuard) throw DomainError("m * gamma lies within the guard band of an integer");
  return v > 0 ? 1 : -1;
}

double Order::offset(std::int64_t m, std::int64_t c) const {
  if (rational_) {
    const i128 v = static_cast<i128>(m) * p_ - static_cast<i128>(c) * q_;
    return static_cast<double>(static_cast<long double>(v) / static_cast<long double>(q_));
  }
  return static_cast<double>(static_cast<long double>(m) * value_ - static_cast<long double>(c));
}

// ---------------------------------------------------------------------------

LevelState advance(const Order& gamma, const LevelState& s, Direction dir) {
  const std::int64_t fg = gamma.floor();
  LevelState out;
  if (dir == Direction::finer) {
    out.m = s.m + 1;
    out.k = static_cast<int>(gamma.compare(out.m, s.E + fg + 1) < 0 ? fg : fg + 1);
    out.E = s.E + out.k;
  } else {
    out.m = s.m - 1;
    out.k = static_cast<int>(gamma.compare(out.m, s.E - fg) >= 0 ? fg : fg + 1);
    out.E = s.E - out.k;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Box

double Box::volume() const {
  double v = t1 - t0;
  for (int j = 0; j < dim; ++j) v *= hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
  return v;
}

bool Box::contains(double t, std::span<const double> x) const {
  if (!(t >= t0 && t < t1)) return false;
  for (int j = 0; j < dim; ++j) {
    const auto u = static_cast<std::size_t>(j);
    if (!(x[u] >= lo[u] && x[u] < hi[u])) return false;
  }
  return true;
}

bool Box::contains_closure(const Box& inner) const {
  if (!(inner.t0 >= t0 && inner.t1 < t1)) return false;
  for (int j = 0; j < dim; ++j) {
    const auto u = static_cast<std::size_t>(j);
    if (!(inner.lo[u] >= lo[u] && inner.hi[u] < hi[u])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Filtration

Filtration::Filtration(Order gamma, int dim) : gamma_(std::move(gamma)), dim_(dim) {
  if (dim < 1 || dim > 3) throw DomainError("dimension must be 1, 2 or 3");
  E_.assign(2 * kMaxLevel + 1, 0);
  LevelState up, down;
  for (std::int64_t m = 1; m <= kMaxLevel; ++m) {
    up = advance(gamma_, up, Direction::finer);
    down = advance(gamma_, down, Direction::coarser);
    E_[static_cast<std::size_t>(kMaxLevel + m)] = up.E;
    E_[static_cast<std::size_t>(kMaxLevel - m)] = down.E;
  }
}

std::int64_t Filtration::E(std::int64_t m) const {
  if (m < -kMaxLevel || m > kMaxLevel)
    throw DomainError("level " + std::to_string(m) + " outside the supported range |m| <= 64");
  return E_[static_cast<std::size_t>(m + kMaxLevel)];
}

int Filtration::k(std::int64_t m) const { return static_cast<int>(E(m) - E(m - 1)); }

double Filtration::tau(std::int64_t m) const { return std::exp2(gamma_.offset(m, E(m))); }

double Filtration::time_side(std::int64_t m) const {
  return std::ldexp(1.0, static_cast<int>(-E(m)));
}

double Filtration::regularity_ratio(std::int64_t m) const { return std::ldexp(1.0, dim_ + k(m)); }

double Filtration::regularity_bound() const {
  return std::ldexp(1.0, dim_ + static_cast<int>(gamma_.floor()) + 1);
}

Cube Filtration::locate(double t, std::span<const double> x, std::int64_t m) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("point dimension mismatch");
  if (!std::isfinite(t)) throw DomainError("time must be finite");
  Cube q;
  q.m = m;
  q.dim = dim_;
  auto to_index = [](double v) {
    const double f = std::floor(v);
    if (!(std::abs(f) < 9.0e18)) throw DomainError("cube index overflows 64 bits");
    return static_cast<std::int64_t>(f);
  };
  q.i0 = to_index(std::ldexp(t, static_cast<int>(E(m))));
  for (int j = 0; j < dim_; ++j) {
    if (!std::isfinite(x[static_cast<std::size_t>(j)])) throw DomainError("point must be finite");
    q.idx[static_cast<std::size_t>(j)] = to_index(std::ldexp(x[static_cast<std::size_t>(j)], static_cast<int>(m)));
  }
  return q;
}

std::vector<Cube> Filtration::children(const Cube& q) const {
  const int kn = k(q.m + 1);
  const std::int64_t nt = std::int64_t{1} << kn;
  const std::int64_t ns = std::int64_t{1} << dim_;
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(nt * ns));
  for (std::int64_t a = 0; a < nt; ++a) {
    for (std::int64_t b = 0; b < ns; ++b) {
      Cube c;
      c.m = q.m + 1;
      c.dim = dim_;
      c.i0 = q.i0 * nt + a;
      for (int j = 0; j < dim_; ++j)
        c.idx[static_cast<std::size_t>(j)] = 2 * q.idx[static_cast<std::size_t>(j)] + ((b >> j) & 1);
      out.push_back(c);
    }
  }
  return out;
}

Cube Filtration::parent(const Cube& q) const {
  Cube p;
  p.m = q.m - 1;
  p.dim = dim_;
  p.i0 = q.i0 >> k(q.m);
  for (int j = 0; j < dim_; ++j) p.idx[static_cast<std::size_t>(j)] = q.idx[static_cast<std::size_t>(j)] >> 1;
  return p;
}

Box Filtration::box(const Cube& q) const {
  Box b;
  b.dim = dim_;
  const int e = static_cast<int>(E(q.m));
  b.t0 = std::ldexp(static_cast<double>(q.i0), -e);
  b.t1 = std::ldexp(static_cast<double>(q.i0 + 1), -e);
  for (int j = 0; j < dim_; ++j) {
    const auto u = static_cast<std::size_t>(j);
    b.lo[u] = std::ldexp(static_cast<double>(q.idx[u]), static_cast<int>(-q.m));
    b.hi[u] = std::ldexp(static_cast<double>(q.idx[u] + 1), static_cast<int>(-q.m));
  }
  return b;
}

Box Filtration::dilate(const Cube& q) const {
  const Box b = box(q);
  Box s;
  s.dim = dim_;
  const double scale_t = time_side(q.m) / tau(q.m);  // 2^{-m gamma}
  const double scale_x = std::ldexp(1.0, static_cast<int>(-q.m));
  s.t0 = b.t0;
  s.t1 = b.t0 + 4.0 * scale_t;
  for (int j = 0; j < dim_; ++j) {
    const auto u = static_cast<std::size_t>(j);
    s.lo[u] = b.lo[u] - 2.0 * scale_x;
    s.hi[u] = b.lo[u] + 2.0 * scale_x;
  }
  return s;
}

// ---------------------------------------------------------------------------
// TimeFiltration

double TimeFiltration::side(std::int64_t m) { return std::ldexp(1.0, static_cast<int>(-2 * m)); }

TimeInterval TimeFiltration::locate(double t, std::int64_t m) {
  if (!std::isfinite(t)) throw DomainError("time must be finite");
  return {m, static_cast<std::int64_t>(std::floor(std::ldexp(t, static_cast<int>(2 * m))))};
}

std::vector<TimeInterval> TimeFiltration::children(const TimeInterval& q) {
  std::vector<TimeInterval> out;
  for (std::int64_t a = 0; a < 4; ++a) out.push_back({q.m + 1, 4 * q.i + a});
  return out;
}

TimeInterval TimeFiltration::parent(const TimeInterval& q) { return {q.m - 1, q.i >> 2}; }

std::array<double, 2> TimeFiltration::bounds(const TimeInterval& q) {
  const double d = side(q.m);
  return {static_cast<double>(q.i) * d, static_cast<double>(q.i + 1) * d};
}

std::array<double, 2> TimeFiltration::dilate(const TimeInterval& q) {
  const double d = side(q.m);
  const double t0 = static_cast<double>(q.i) * d;
  return {t0 - 2.0 * d, t0 + 2.0 * d};
}

// ---------------------------------------------------------------------------

EstimateReport partition_trace(const Filtration& f, std::int64_t m_lo, std::int64_t m_hi) {
  if (m_lo > m_hi) throw DomainError("empty level range");
  EstimateReport rep;
  rep.check = "partition";
  rep.columns = {"m", "k_m", "E_m", "tau_m", "time_side", "regularity_ratio"};
  const std::int64_t fg = f.gamma().floor();
  bool tau_ok = true, k_ok = true, reg_ok = true;
  for (std::int64_t m = m_lo; m <= m_hi; ++m) {
    const std::int64_t e = f.E(m);
    const int k = f.k(m);
    // 0 <= m gamma - E < 1, decided in exact arithmetic for rationals.
    tau_ok = tau_ok && f.gamma().compare(m, e) >= 0 && f.gamma().compare(m, e + 1) < 0;
    k_ok = k_ok && (k == fg || k == fg + 1);
    reg_ok = reg_ok && f.regularity_ratio(m) <= f.regularity_bound();
    rep.rows.push_back({Cell{m}, Cell{std::int64_t{k}}, Cell{e}, Cell{f.tau(m)},
                        Cell{f.time_side(m)}, Cell{f.regularity_ratio(m)}});
  }
  rep.set("levels", static_cast<double>(m_hi - m_lo + 1));
  rep.set("regularity_bound", f.regularity_bound());
  rep.require("tau_in_unit_octave", tau_ok);
  rep.require("k_admissible", k_ok);
  rep.require("regularity", reg_ok);
  return rep;
}

}  // namespace czkit
