#pragma once

#include <optional>

#include "magscatter/magschrod.hpp"
#include "magscatter/pctransform.hpp"
#include "magscatter/trace.hpp"
#include "magscatter/wavefield.hpp"

namespace magscatter {

// --- asymptotic states ---------------------------------------------------------

struct AsymptoticState {
  ScalarField w_plus;
  std::optional<double> annulus_eta;
  enum class Provenance { Raw, AnnulusMasked } provenance = Provenance::Raw;
};

AsymptoticState make_raw_state(ScalarField base);

// Multiplies by a C-infinity cutoff vanishing on | |x| - 1 | < eta and equal
// to one outside | |x| - 1 | > 2 eta. Applying it to an already-masked state
// with the same eta is a no-op.
AsymptoticState make_annular_state(const AsymptoticState& base, double eta);
AsymptoticState make_annular_state(const ScalarField& base, double eta);

// The cutoff itself, for support-condition diagnostics.
ScalarField annulus_mask(std::shared_ptr<const Grid> grid, double eta);

// --- the w-equation as a potential track -----------------------------------------

// (v, A, V, f) = (u, A, 0, 0): the original magnetic equation with the
// analytic wave field sampled on the grid at stage times.
PotentialTrack make_u_track(const WaveData& data,
                            std::shared_ptr<const Grid> grid);

// (v, A, V, f) = (w, B, -Bcheck, 0): coefficients of i d_t w = -(1/2) Delta_B w - Bcheck w.
// Samples are memoized so RK4 stage times are evaluated once.
PotentialTrack make_w_track(const WaveData& data,
                            std::shared_ptr<const Grid> grid);

// A = 0, V = B^2/2: coefficients of the modified-profile base equation.
PotentialTrack make_w0_track(const WaveData& data,
                             std::shared_ptr<const Grid> grid);

// --- remainder R(W) -----------------------------------------------------------

// Closed form for the simple profile W = U(t) conj(w_plus):
// R = -i B . grad W + (Bcheck - B^2/2) W.
ScalarField residual_R_simple(const ScalarField& w_plus, const BFields& b,
                              double t);

// Definition form R = i d_t W - K W for any profile, with d_t W from a
// centered stencil of aligned slices (3 slices: second order, 5: fourth).
ScalarField residual_R_stencil(const std::vector<SchrodState>& slices,
                               const BFields& b);

// --- direct construction (Prop 4.2 style) -----------------------------------------

struct WDirectRun {
  EvolveResult run;
  ScalarField w_plus_bar;  // conj(w_plus), the data at t0
};

// Solves the w-equation from w(t0) = conj(w_plus) up to t_end, recording
// ||w(t) - conj(w_plus)||_2 and ||w(t) - U(t) conj(w_plus)||_2 at the sample
// times plus any requested snapshots.
WDirectRun solve_w_direct(const AsymptoticState& state, const WaveData& data,
                          std::shared_ptr<const Grid> grid, double t0,
                          double t_end, const IntegratorConfig& cfg,
                          const std::vector<double>& sample_times,
                          bool store_snapshots = false);

// Traces computed from a w-direct run against the profile.
struct WRateTraces {
  NormTrace to_data;     // ||w(t) - conj(w_plus)||
  NormTrace to_profile;  // ||w(t) - U(t) conj(w_plus)||
};
WRateTraces w_rate_traces(const WDirectRun& run);

// --- q-equation (Prop 6.1 style) ---------------------------------------------------

enum class QInit { Zero, Resolvent };

struct QRun {
  EvolveResult run;
  double b_shift = 0.0;       // the constant b in the resolvent data
  double q0_norm = 0.0;       // ||q(t0)||_2
  double r_t0_norm = 0.0;     // ||R(t0)||_2
};

// Solves i d_t q = -(1/2) Delta_B q - Bcheck q - R(W) with the simple profile
// W = U(t) conj(w_plus) from t0 with zero or resolvent-prepared data.
QRun solve_q(const AsymptoticState& state, const WaveData& data,
             std::shared_ptr<const Grid> grid, double t0, double t_end,
             QInit init, const IntegratorConfig& cfg,
             const std::vector<double>& sample_times,
             bool store_snapshots = false);

// q0 = (1/t0 + b + K)^{-1} R(t0), K = -(1/2) Delta_B - Bcheck, solved by
// preconditioned conjugate gradients (free resolvent preconditioner).
ScalarField resolvent_init(const ScalarField& r_t0, const BFields& b,
                           double b_shift, double t0, double rel_tol = 1e-9,
                           int max_iter = 500);

// --- modified profile (Section 7 style) ----------------------------------------------

// Backward solve of the W0 equation from W0(1) = v1 down to t_to; snapshots
// at the requested times are delivered through on_slice in integration order.
EvolveResult solve_W0(const ScalarField& v1, const WaveData& data,
                      std::shared_ptr<const Grid> grid, double t_to,
                      const IntegratorConfig& cfg,
                      const std::vector<double>& slice_times,
                      const std::function<void(const SchrodState&)>& on_slice,
                      const std::vector<Observer>& observers = {},
                      const std::vector<double>& observer_times = {});

// W = (1 - i h . grad + hcheck) W0.
ScalarField apply_profile_correction(const ScalarField& w0,
                                     const VectorField& h,
                                     const ScalarField& hcheck);

struct ModifiedProfileGroup {
  double t = 0.0;
  std::vector<SchrodState> w_slices;  // 5 aligned W slices, ascending in t
  BFields b;
};

// Builds stencil groups of the corrected profile around each center time.
// w0_slices must hold 5 consecutive W0 slices per center, spaced stencil_dt.
std::vector<ModifiedProfileGroup> build_modified_profile(
    const std::vector<SchrodState>& w0_slices,
    const std::vector<double>& centers, double stencil_dt,
    const WaveData& data, std::shared_ptr<const Grid> grid);

ScalarField residual_R_modified(const ModifiedProfileGroup& group);

// --- map back to u (Prop 1.2 style) ---------------------------------------------------

struct UAsymptoticsResult {
  NormTrace deviation;     // ||utilde(t) - u_plus||_2 vs u-time
  NormTrace x2_deviation;  // || |x|^2 (utilde - u_plus) ||_2
};

// utilde(t_u) = F^{-1} conj( U(-t_w) w(t_w) ), u_plus = F^{-1} w_plus; the
// deviation norms are recorded against u-time 1/t_w on u_grid.
UAsymptoticsResult compare_asymptotics_u(const std::vector<SchrodState>& w_snapshots,
                                         const ScalarField& w_plus,
                                         std::shared_ptr<const Grid> u_grid);

}  // namespace magscatter
