#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "magscatter/errors.hpp"

namespace magscatter {

// Periodic box [-L/2, L/2)^dim sampled on n points per axis, n a power of
// two. Wavenumbers follow DFT storage order: index m on an axis carries the
// signed mode s(m) = m for m < n/2 and m - n otherwise, so the Nyquist slot
// m = n/2 holds s = -n/2.
class Grid {
 public:
  Grid(int dim, int n, double box_length);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return size_; }

  // Physical coordinate along one axis.
  double coord(int i) const { return -0.5 * length_ + spacing_ * i; }
  // Signed integer mode for storage index m.
  int signed_mode(int m) const { return m < n_ / 2 ? m : m - n_; }
  bool is_nyquist(int m) const { return m == n_ / 2; }
  // Wavenumber 2*pi*s(m)/L.
  double wavenumber(int m) const { return wavenumbers_[m]; }
  const std::vector<double>& wavenumber_table() const { return wavenumbers_; }
  const std::vector<double>& coord_table() const { return coords_; }

  // Decompose a flat row-major index into per-axis indices.
  std::array<int, 3> unravel(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % n_);
      flat /= n_;
    }
    return idx;
  }

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_;
  int n_;
  double length_;
  double spacing_;
  std::size_t size_;
  std::vector<double> wavenumbers_;
  std::vector<double> coords_;
};

}  // namespace magscatter
