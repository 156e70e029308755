#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "magscatter/field.hpp"
#include "magscatter/trace.hpp"

namespace magscatter {

// Unweighted least squares on (log t, log value) inside [t_min, t_max].
// Requires at least five strictly positive samples in the window.
RateFit fit_power_law(const NormTrace& trace, double t_min, double t_max);

// y' <= a0 y + sum_j a_j y^(alpha_j) with 0 <= alpha_j < alpha_1 < 1 for
// j >= 2; alpha_1 is the largest exponent and must come first.
struct GronwallInstance {
  std::vector<double> alphas;
  std::vector<std::function<double(double)>> coefficients;  // a_j, j = 1..n
  std::function<double(double)> a0;
  double y0 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
};

// The a-priori bound exp(A0) * { y0^(1-a1) + sum A_j^((1-a1)/(1-a_j)) }^(1/(1-a1))
// with A0 = |int a0|, A_j = (1-alpha_j) |int a_j|.
double gronwall_bound(const GronwallInstance& inst, double t);

// RK4 solution of the saturated comparison ODE
//   z' = sum_j a_j exp((alpha_j - 1) A0) z^(alpha_j),  z(t0) = y0,
// and of the saturated original ODE y' = a0 y + sum a_j y^(alpha_j).
struct SaturatedSolution {
  double z = 0.0;        // comparison variable
  double y = 0.0;        // saturated original variable
  double exp_a0 = 0.0;   // exp(A0(t))
};
SaturatedSolution solve_saturated_ode(const GronwallInstance& inst, double t,
                                      int steps = 10000);

// Static absorption bound: any y with y <= sum a_j y^(alpha_j) satisfies
// y <= C sum a_j^(1/(1-alpha_j)), C = max_j n^(1/(1-alpha_j)).
double absorption_bound(const std::vector<double>& a,
                        const std::vector<double>& alphas);

// Brute-force scan of the feasibility set {y : y <= sum a_j y^alpha_j}.
double absorption_feasible_max(const std::vector<double>& a,
                               const std::vector<double>& alphas,
                               double y_max, int points = 1000000);

// Adaptive Simpson quadrature used by the Gronwall bound.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-10);

struct DispersiveResult {
  NormTrace trace;        // ||U(t) f||_r
  NormTrace bound_ratio;  // ratio to (2 pi |t|)^(-delta(r)) ||f||_rbar
  RateFit fit;
};

// Free-group decay check against the dual-exponent dispersive bound,
// delta(r) = dim/2 - dim/r.
DispersiveResult dispersive_check(const ScalarField& f, double r,
                                  const std::vector<double>& times);

struct SobolevScanResult {
  double sigma = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
};

// Diagnostic: max over the family of ||omega^j u||_p /
// (||u||_q^(1-sigma) ||omega^k u||_r^sigma) with sigma from the exponent
// relation n/p - j = (1-sigma) n/q + sigma (n/r - k).
SobolevScanResult sobolev_ratio_scan(const std::vector<ScalarField>& family,
                                     int j, int k, double p, double q,
                                     double r);

}  // namespace magscatter
