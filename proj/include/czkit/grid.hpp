#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "symbols.hpp"

namespace czkit {

/// Periodic lattice on [-L/2, L/2)^d with N points per axis (N a power of
/// two). Node j has coordinate -L/2 + j L/N; mode j has wavenumber
/// k = j for j < N/2 and j - N otherwise, frequency 2 pi k / L.
class SpatialGrid {
 public:
  SpatialGrid(int dim, double L, int N);

  int dim() const { return dim_; }
  double extent() const { return L_; }
  int points() const { return N_; }
  std::size_t size() const { return size_; }
  const std::vector<int>& shape() const { return shape_; }

  double dx() const { return L_ / N_; }
  double cell_volume() const;
  double coord(int j) const { return -0.5 * L_ + j * dx(); }
  int wavenumber(int j) const { return j < N_ / 2 ? j : j - N_; }
  double frequency(int j) const;

  std::array<int, 3> unflatten(std::size_t flat) const;
  Vec point(std::size_t flat) const;
  Vec freq(std::size_t flat) const;
  /// True when some axis sits at the Nyquist index N/2.
  bool nyquist(std::size_t flat) const;
  /// (-1)^{sum j_i}: converts between a centred physical box and the
  /// FFT origin convention.
  double centring_sign(std::size_t flat) const;

  /// Same lattice with extent scaled by c.
  SpatialGrid scaled(double c) const { return SpatialGrid(dim_, L_ * c, N_); }

 private:
  int dim_;
  double L_;
  int N_;
  std::size_t size_;
  std::vector<int> shape_;
};

/// Spatial lattice plus time nodes t_0 < ... < t_M.
struct SpaceTimeGrid {
  SpatialGrid space;
  std::vector<double> t;

  static SpaceTimeGrid uniform(const SpatialGrid& space, double t0, double t1, int nodes);

  std::size_t nt() const { return t.size(); }
  /// Throws AlignmentError if a breakpoint of `s` lies strictly inside a
  /// cell (t_n, t_{n+1}), or if a cell leaves the symbol's window.
  void check_alignment(const SymbolSpec& s) const;
};

}  // namespace czkit
