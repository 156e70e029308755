#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "magscatter/grid.hpp"

namespace magscatter {

using Complex = std::complex<double>;

enum class Rep { Physical, Spectral };

// Complex scalar samples on a shared grid. In spectral representation the
// stored values are true Fourier-series coefficients of the centered box,
// f(x) = sum_m c_m exp(i k_m . x), in DFT storage order.
class ScalarField {
 public:
  ScalarField(std::shared_ptr<const Grid> grid, Rep rep = Rep::Physical);
  ScalarField(std::shared_ptr<const Grid> grid, std::vector<Complex> values,
              Rep rep);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  Rep rep() const { return rep_; }
  std::size_t size() const { return values_.size(); }

  const std::vector<Complex>& values() const { return values_; }
  std::vector<Complex>& values() { return values_; }
  Complex operator[](std::size_t i) const { return values_[i]; }
  Complex& operator[](std::size_t i) { return values_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(Complex c);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) {
    a += b;
    return a;
  }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) {
    a -= b;
    return a;
  }
  friend ScalarField operator*(Complex c, ScalarField f) {
    f *= c;
    return f;
  }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<Complex> values_;
  Rep rep_;
};

// dim scalar components sharing one grid and representation.
class VectorField {
 public:
  explicit VectorField(std::shared_ptr<const Grid> grid,
                       Rep rep = Rep::Physical);
  VectorField(std::vector<ScalarField> components);

  const Grid& grid() const { return components_.front().grid(); }
  std::shared_ptr<const Grid> grid_ptr() const {
    return components_.front().grid_ptr();
  }
  int dim() const { return static_cast<int>(components_.size()); }
  Rep rep() const { return components_.front().rep(); }

  const ScalarField& operator[](int a) const { return components_[a]; }
  ScalarField& operator[](int a) { return components_[a]; }

 private:
  std::vector<ScalarField> components_;
};

struct NormSpec {
  enum class Kind { Lebesgue, Sobolev, FractionalOmega };
  Kind kind = Kind::Lebesgue;
  double r = 2.0;   // Lebesgue exponent, may be infinity
  int k = 0;        // Sobolev derivative count
  double s = 0.0;   // fractional <omega>^s exponent (L^2 based)

  static NormSpec lebesgue(double r);
  static NormSpec sobolev(int k, double r);
  static NormSpec fractional_omega(double s);
};

// --- representation changes -------------------------------------------------

ScalarField transform(const ScalarField& f, Rep target);
ScalarField to_physical(const ScalarField& f);
ScalarField to_spectral(const ScalarField& f);
VectorField transform(const VectorField& v, Rep target);

// --- calculus ---------------------------------------------------------------

// Spectral derivative d^alpha; the Nyquist mode is zeroed on axes with odd
// order so real fields stay real. Result keeps the input representation.
ScalarField derivative(const ScalarField& f, const std::vector<int>& alpha);

// |k|^s multiplier; the zero mode maps to 0. For s < 0 the zero mode of f
// must vanish (NonZeroMeanError otherwise).
ScalarField omega_power(const ScalarField& f, double s);

ScalarField laplacian(const ScalarField& f);
std::vector<ScalarField> gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);

// --- norms and inner products -----------------------------------------------

double norm(const ScalarField& f, const NormSpec& spec);
double norm_l2(const ScalarField& f);
double norm_linf(const ScalarField& f);
double norm_l2(const VectorField& v);
double norm_linf(const VectorField& v);
double norm(const VectorField& v, const NormSpec& spec);
Complex inner(const ScalarField& f, const ScalarField& g);

// --- pointwise helpers --------------------------------------------------

ScalarField multiply(const ScalarField& f, const ScalarField& g);
// Apply fn(point coordinates, value) over physical samples.
ScalarField map_with_coords(
    const ScalarField& f,
    const std::function<Complex(const std::array<double, 3>&, Complex)>& fn);
ScalarField sample(std::shared_ptr<const Grid> grid,
                   const std::function<Complex(const std::array<double, 3>&)>& fn);
VectorField sample_vector(
    std::shared_ptr<const Grid> grid,
    const std::function<std::array<Complex, 3>(const std::array<double, 3>&)>& fn);

// Evaluate the truncated Fourier series of f at arbitrary points given as a
// tensor grid of per-axis coordinates (deterministic order, exact for
// band-limited fields up to wraparound; the series is L-periodic).
std::vector<Complex> evaluate_series_tensor(
    const ScalarField& f, const std::vector<std::vector<double>>& axis_points);

ScalarField gaussian_field(std::shared_ptr<const Grid> grid, double sigma,
                           double amplitude = 1.0,
                           std::array<double, 3> center = {0.0, 0.0, 0.0});

// Largest |x_a| over samples with |f| > rel_tol * max|f| (physical rep).
double support_radius(const ScalarField& f, double rel_tol = 1e-8);
double support_radius(const VectorField& v, double rel_tol = 1e-8);

// Quadrature volume of one sample, h^dim.
double cell_volume(const Grid& g);

}  // namespace magscatter
