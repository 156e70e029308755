#pragma once

#include "magscatter/field.hpp"
#include "magscatter/wavefield.hpp"

namespace magscatter {

// --- free Schroedinger group and its factorization ---------------------------

// U(t) = exp(i (t/2) Laplacian), spectral multiplier exp(-i t |k|^2 / 2).
ScalarField free_prop_U(const ScalarField& f, double t);

// M(t): pointwise multiplication by exp(i |x|^2 / (2t)).
ScalarField gauge_M(const ScalarField& f, double t);

enum class DilationKind { D, D0 };

// D0(t) f (x) = f(x / t) by trigonometric-series evaluation; D(t) adds the
// (it)^(-dim/2) prefactor (principal branch). Output samples whose target
// x/t leaves the box are zeroed; a support guard raises WraparoundError when
// the true field cannot be represented on the box.
ScalarField dilate_D(const ScalarField& f, double t,
                     DilationKind kind = DilationKind::D);

// Quadrature realization of the unitary Fourier transform
// (F f)(xi) = (2 pi)^(-dim/2) integral f(x) exp(-i xi . x) dx, sampled on
// target_grid (defaults to the input grid). sign = +1 gives the inverse.
ScalarField fourier_F(const ScalarField& f, int sign = -1);
ScalarField fourier_F(const ScalarField& f,
                      std::shared_ptr<const Grid> target_grid, int sign = -1);

struct FactorizationReport {
  double discrepancy = 0.0;       // L2 of U(t)f - M D F M f
  double relative = 0.0;          // discrepancy / ||f||_2
  double norm_lhs = 0.0;
  double norm_rhs = 0.0;
};

// Checks U(t) = M(t) D(t) F M(t) on a localized resolved field.
FactorizationReport factorization_check(const ScalarField& f, double t);

// --- the pseudoconformal inversion ------------------------------------------

struct TransformedPair {
  double t_u = 0.0;
  double t_w = 0.0;
  ScalarField u;
  ScalarField w;
};

// u(t) = M(t) D(t) conj(w(1/t)); these are inverse to each other.
TransformedPair u_to_w(const ScalarField& u, double t_u);
TransformedPair w_to_u(const ScalarField& w, double t_w);

// w_star(t) = conj(w(1/t)) (time relabeling + conjugation).
ScalarField w_star_from_w(const ScalarField& w);

// --- transported potential ---------------------------------------------------

struct BFields {
  VectorField b;
  ScalarField bcheck;
  double subtracted_bcheck_mean = 0.0;  // filled by poisson_h
};

// B(t, y) = -t^{-1} A(1/t, y/t) and Bcheck = t^{-1} (y . B), sampled on the
// w-grid. Requires the analytic wave-data variant since arguments leave any
// fixed grid.
BFields b_from_a(const WaveData& data, double t_w,
                 std::shared_ptr<const Grid> grid);

struct PoissonPair {
  VectorField h;
  ScalarField hcheck;
  double subtracted_bcheck_mean = 0.0;
};

// Solves Delta h = -2B and Delta hcheck = -2 Bcheck spectrally. Component
// means are subtracted before inversion (recorded in the result); the torus
// inverse Laplacian exists only on mean-zero data.
PoissonPair poisson_h(const VectorField& b, const ScalarField& bcheck);

// Norms of B / Bcheck via the exact change of variables
// ||B(t)||_r = t^(-1 + dim/r) ||A(1/t)||_r, evaluated by radial quadrature.
double b_norm_analytic(const WaveData& data, double t_w, double r);
double bcheck_norm_analytic(const WaveData& data, double t_w, double r);

// Raise WraparoundError when |f| at the box faces exceeds rel_tol * max|f|.
void check_boundary_tail(const ScalarField& f, double rel_tol);

}  // namespace magscatter
