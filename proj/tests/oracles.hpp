#pragma once

// Closed-form reference solutions used as independent oracles by the tests.
// Everything here is derived by hand from textbook formulas and kept free of
// the library's own spectral machinery.

#include <array>
#include <cmath>
#include <complex>

namespace oracles {

using Complex = std::complex<double>;

// Free evolution exp(i (t/2) Laplacian) of exp(-|x|^2 / (2 sigma^2)) in d
// dimensions: (1 + i t / sigma^2)^(-d/2) exp(-|x|^2 / (2 (sigma^2 + i t))).
inline Complex free_gaussian(double t, double sigma, int dim, double r2) {
  const Complex a(sigma * sigma, t);
  const Complex pref =
      std::pow(Complex(1.0, t / (sigma * sigma)), -0.5 * dim);
  return pref * std::exp(-0.5 * r2 / a);
}

// d/dx of exp(-x^2 / (2 sigma^2)).
inline double gaussian_dx(double x, double sigma) {
  return -x / (sigma * sigma) * std::exp(-0.5 * x * x / (sigma * sigma));
}

// L^2 norm of exp(-|x|^2 / (2 sigma^2)) over R^d: (pi sigma^2)^(d/4).
inline double gaussian_l2(double sigma, int dim) {
  return std::pow(M_PI * sigma * sigma, 0.25 * dim);
}

// L^1 norm over R^d: (2 pi sigma^2)^(d/2) / ... = (sqrt(2 pi) sigma)^d.
inline double gaussian_l1(double sigma, int dim) {
  return std::pow(std::sqrt(2.0 * M_PI) * sigma, dim);
}

// Exact solution of y' = c sqrt(y), y(t0) = y0.
inline double sqrt_ode(double c, double y0, double t0, double t) {
  const double s = std::sqrt(y0) + 0.5 * c * (t - t0);
  return s * s;
}

// Radial d'Alembert solution psi(t, r) = [g(r+t) + g(r-t)] / (2r) with
// g(s) = s phi(s), evaluated directly (r away from 0).
inline double radial_dalembert(double t, double r, double amp, double sigma) {
  auto g = [&](double s) {
    return s * amp * std::exp(-0.5 * s * s / (sigma * sigma));
  };
  return (g(r + t) + g(r - t)) / (2.0 * r);
}

// r -> 0 limit of the radial formula: phi(t) + t phi'(t).
inline double radial_dalembert_origin(double t, double amp, double sigma) {
  const double phi = amp * std::exp(-0.5 * t * t / (sigma * sigma));
  return phi + t * (-t / (sigma * sigma)) * phi;
}

}  // namespace oracles
