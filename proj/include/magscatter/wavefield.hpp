#pragma once

#include <array>
#include <optional>
#include <variant>

#include "magscatter/field.hpp"
#include "magscatter/trace.hpp"

namespace magscatter {

// Divergence-free data A+ = curl(phi e) with a Gaussian profile
// phi(rho) = amplitude * exp(-rho^2 / (2 sigma^2)) centered at `center`,
// and Adot+ = 0. The wave solution is evaluated anywhere in space-time from
// the radial d'Alembert formula psi(t, rho) = [g(rho+t) + g(rho-t)] / (2 rho),
// g(s) = s phi(s), so A(t, x) = q(t, rho) (x - center) x e with q = psi_r / rho.
struct CurlGaussian {
  double amplitude = 1.0;
  double sigma = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
  std::array<double, 3> axis{0.0, 0.0, 1.0};
};

// Grid-sampled pair (A+, Adot+), kept divergence-free and zero-mean.
struct GridPairData {
  VectorField a_plus;
  VectorField a_dot_plus;
};

struct WaveData {
  std::variant<CurlGaussian, GridPairData> source;
  bool moment_zero_mean = false;

  bool is_analytic() const {
    return std::holds_alternative<CurlGaussian>(source);
  }
  const CurlGaussian& curl_gaussian() const;
  const GridPairData& grid_pair() const;
};

struct WaveSnapshot {
  double t = 0.0;
  VectorField a;
  VectorField a_dot;
  ScalarField x_dot_a;
  std::optional<VectorField> pa;
};

// --- projection and propagation ----------------------------------------------

// Spectral Leray projection I - k k^T / |k|^2; the zero mode is removed.
VectorField leray_project(const VectorField& v);

// Exact discrete free-wave evolution of zero-mean grid data,
// A(t) = cos(|k| t) A+ + |k|^(-1) sin(|k| t) Adot+.
WaveSnapshot propagate_grid(const GridPairData& data, double t);

// --- analytic evaluation -----------------------------------------------------

struct WavePointValue {
  std::array<double, 3> a{};
  double x_dot_a = 0.0;
  std::array<double, 3> a_t{};                    // time derivative
  std::array<std::array<double, 3>, 3> grad_a{};  // grad_a[i][j] = d_j A_i
};

WavePointValue eval_analytic_point(const CurlGaussian& cg, double t,
                                   const std::array<double, 3>& x);

// Sample A(t) (and x.A) on a grid from the closed form.
WaveSnapshot eval_analytic(const WaveData& data, double t,
                           std::shared_ptr<const Grid> grid);

// Radial-quadrature Lebesgue norms over all of R^3 (no box truncation):
// j = number of time derivatives; field kind A or the contraction x.A.
enum class WaveField { A, XDotA };
double analytic_norm(const CurlGaussian& cg, double t, double r,
                     WaveField which = WaveField::A, int j = 0);

// --- dilation generator P = t d_t + x . grad ----------------------------------

// For grid data uses PA(t) = cos(wt)(x.grad A+) + w^{-1} sin(wt)((1 + x.grad) Adot+);
// raises WraparoundError when the data support touches the box boundary.
VectorField apply_generator_P(const WaveData& data, double t,
                              std::shared_ptr<const Grid> grid);

// --- moment conditions ---------------------------------------------------------

struct MomentReport {
  std::array<double, 3> int_a{};
  std::array<double, 3> int_a_dot{};
  std::array<std::array<double, 3>, 3> int_x_a_dot{};
  double tolerance = 0.0;
  bool pass = false;
  double max_abs() const;
};

MomentReport check_moments(const WaveData& data,
                           std::shared_ptr<const Grid> grid);

// --- decay measurement ----------------------------------------------------------

struct DecayRequest {
  int j = 0;                    // time-derivative order
  std::vector<int> alpha;      // space multiindex (grid data only)
  double r = 2.0;              // Lebesgue exponent
  WaveField which = WaveField::A;
  std::string label;
};

// Records ||d_t^j d_x^alpha A(t)||_r at the given times. Grid data must stay
// inside the wraparound window t <= L/2 - R_supp (unit wave speed).
std::vector<NormTrace> decay_profile(const WaveData& data,
                                     const std::vector<DecayRequest>& requests,
                                     const std::vector<double>& times,
                                     std::shared_ptr<const Grid> grid);

// Support radius used by wraparound guards: 6 sigma for Gaussian data,
// thresholded sample support for grid data.
double wave_support_radius(const WaveData& data);

}  // namespace magscatter
