#include "czkit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "czkit/errors.hpp"

namespace czkit {

SpatialGrid::SpatialGrid(int dim, double L, int N) : dim_(dim), L_(L), N_(N) {
  if (dim < 1 || dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("grid extent L must be positive");
  if (N < 2 || (N & (N - 1)) != 0) throw DomainError("grid points N must be a power of two >= 2");
  size_ = 1;
  for (int i = 0; i < dim; ++i) {
    size_ *= static_cast<std::size_t>(N);
    shape_.push_back(N);
  }
}

double SpatialGrid::cell_volume() const { return std::pow(dx(), dim_); }

double SpatialGrid::frequency(int j) const {
  return 2.0 * std::numbers::pi * wavenumber(j) / L_;
}

std::array<int, 3> SpatialGrid::unflatten(std::size_t flat) const {
  std::array<int, 3> j{};
  for (int a = dim_ - 1; a >= 0; --a) {
    j[static_cast<std::size_t>(a)] = static_cast<int>(flat % static_cast<std::size_t>(N_));
    flat /= static_cast<std::size_t>(N_);
  }
  return j;
}

Vec SpatialGrid::point(std::size_t flat) const {
  const auto j = unflatten(flat);
  Vec x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = coord(j[static_cast<std::size_t>(a)]);
  return x;
}

Vec SpatialGrid::freq(std::size_t flat) const {
  const auto j = unflatten(flat);
  Vec xi(dim_);
  for (int a = 0; a < dim_; ++a) xi[a] = frequency(j[static_cast<std::size_t>(a)]);
  return xi;
}

bool SpatialGrid::nyquist(std::size_t flat) const {
  const auto j = unflatten(flat);
  for (int a = 0; a < dim_; ++a)
    if (j[static_cast<std::size_t>(a)] == N_ / 2) return true;
  return false;
}

double SpatialGrid::centring_sign(std::size_t flat) const {
  const auto j = unflatten(flat);
  int s = 0;
  for (int a = 0; a < dim_; ++a) s += j[static_cast<std::size_t>(a)];
  return (s & 1) ? -1.0 : 1.0;
}

SpaceTimeGrid SpaceTimeGrid::uniform(const SpatialGrid& space, double t0, double t1, int nodes) {
  if (nodes < 2) throw DomainError("need at least two time nodes");
  if (!(t1 > t0)) throw DomainError("time window must have t1 > t0");
  SpaceTimeGrid g{space, {}};
  g.t.resize(static_cast<std::size_t>(nodes));
  for (int n = 0; n < nodes; ++n) g.t[static_cast<std::size_t>(n)] = t0 + (t1 - t0) * n / (nodes - 1);
  g.t.back() = t1;
  return g;
}

void SpaceTimeGrid::check_alignment(const SymbolSpec& s) const {
  for (std::size_t n = 1; n < t.size(); ++n)
    if (!(t[n] > t[n - 1])) throw DomainError("time nodes must be strictly increasing");
  if (t.front() < s.t_begin() || t.back() > s.t_end())
    throw AlignmentError("time nodes leave the symbol's coefficient window");
  for (double b : s.breakpoints()) {
    auto it = std::upper_bound(t.begin(), t.end(), b);
    if (it == t.begin() || it == t.end()) continue;
    if (*(it - 1) != b)
      throw AlignmentError("coefficient breakpoint t = " + std::to_string(b) +
                           " lies strictly inside the time cell [" + std::to_string(*(it - 1)) +
                           ", " + std::to_string(*it) + ")");
  }
}

}  // namespace czkit
