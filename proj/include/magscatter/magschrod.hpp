#pragma once

#include <functional>
#include <map>
#include <optional>

#include "magscatter/field.hpp"
#include "magscatter/trace.hpp"

namespace magscatter {

// Time-dependent coefficients of i d_t v = K_eta v + f with
// K_eta = -(1/2)(1 - i eta) Delta_A + V. Null callables mean "identically 0".
// a_dot_of_t is optional and only consulted by the time-derivative checks.
struct PotentialTrack {
  std::function<VectorField(double)> a_of_t;
  std::function<ScalarField(double)> v_of_t;
  std::function<ScalarField(double)> f_of_t;
  std::function<VectorField(double)> a_dot_of_t;
  std::function<ScalarField(double)> v_dot_of_t;
};

struct SchrodState {
  double t = 0.0;
  ScalarField u;
};

struct IntegratorConfig {
  double dt = 1e-3;
  double eta = 0.0;
  // RK4 imaginary-axis margin: dt * max|k|^2 / 2 must not exceed this.
  double stability_guard = 0.7;
};

// One sampled set of coefficients. div_a is the spectral divergence of the
// sampled a; carrying it keeps the magnetic coupling exactly skew-adjoint on
// the grid (the continuum field is divergence free, its samples only nearly).
struct PotentialSample {
  std::optional<VectorField> a;
  std::optional<ScalarField> div_a;
  std::optional<ScalarField> v;
  std::optional<ScalarField> f;
};

PotentialSample sample_track(const PotentialTrack& track, double t);

// K_eta u; Delta_A expands as
//   Delta u - 2i a.grad u - i (div a) u - a^2 u.
ScalarField apply_K(const ScalarField& u, const PotentialSample& p, double eta);
ScalarField apply_K(const ScalarField& u, const VectorField& a,
                    const ScalarField& v, double eta);

// Covariant gradient norm ||grad u - i a u||_2^2.
double grad_a_norm_sq(const ScalarField& u, const PotentialSample& p);

struct Observer {
  std::string name;
  NormSpec spec;
};

struct EvolveRequest {
  std::vector<double> sample_times;    // trace/snapshot event times (hit exactly)
  std::vector<Observer> observers;     // norms recorded at sample times
  bool store_snapshots = false;        // keep full fields at sample times
  // Called at every event time; lets callers consume states without storage.
  std::function<void(const SchrodState&)> on_sample;
};

using ScalarSeries = std::vector<std::pair<double, double>>;

struct EvolveResult {
  SchrodState final_state;
  std::map<std::string, NormTrace> traces;
  std::vector<SchrodState> snapshots;
  ScalarSeries norm_sq;          // ||u(t)||_2^2 at every accepted step
  ScalarSeries source_integral;  // accumulated int 2 Im<v, f> dt
  ScalarSeries grad_integral;    // accumulated int ||grad_A v||_2^2 dt
};

// Explicit RK4 method of lines; integrates in either time direction
// (eta > 0 is forward-only). Potentials are sampled at stage times exactly.
EvolveResult evolve(const SchrodState& initial, const PotentialTrack& track,
                    const IntegratorConfig& cfg, double t_end,
                    const EvolveRequest& req = {});

struct IdentityReport {
  double lhs = 0.0;         // norm difference (+ eta term for dissipation)
  double rhs = 0.0;         // source integral
  double discrepancy = 0.0; // lhs - rhs
};

// Equality (f-driven L^2 identity): ||v(t2)||^2 - ||v(t1)||^2 = int 2 Im<v,f>.
IdentityReport l2_identity_check(const EvolveResult& run, double t1, double t2);

// Dissipation inequality: adds eta * int ||grad_A v||^2 to the left side;
// for smooth coefficients it holds as an equality up to integrator error.
IdentityReport eta_dissipation_check(const EvolveResult& run, double t1,
                                     double t2);

// Centered-difference residual i (u_next - u_prev) / (2 dt) - K u_mid - f.
ScalarField schrod_residual(const SchrodState& prev, const SchrodState& mid,
                            const SchrodState& next,
                            const PotentialTrack& track, double eta = 0.0);

// Memoizing wrapper: remembers the last few sampled times (RK4 revisits
// stage times across adjacent steps).
PotentialTrack memoize_track(const PotentialTrack& track, int capacity = 8);

}  // namespace magscatter
