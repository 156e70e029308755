#include "magscatter/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace magscatter {

namespace {

// C-infinity ramp: 0 for u <= 0, 1 for u >= 1.
double smooth_ramp(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

}  // namespace

AsymptoticState make_raw_state(ScalarField base) {
  return AsymptoticState{std::move(base), std::nullopt,
                         AsymptoticState::Provenance::Raw};
}

ScalarField annulus_mask(std::shared_ptr<const Grid> grid, double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ConfigError("annulus parameter must lie in (0, 1)");
  return sample(grid, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < grid->dim(); ++a) r2 += x[a] * x[a];
    const double u = std::abs(std::sqrt(r2) - 1.0);
    return Complex(smooth_ramp(u / eta - 1.0), 0.0);
  });
}

AsymptoticState make_annular_state(const AsymptoticState& base, double eta) {
  if (base.provenance == AsymptoticState::Provenance::AnnulusMasked &&
      base.annulus_eta && *base.annulus_eta == eta)
    return base;  // masking is idempotent
  return make_annular_state(base.w_plus, eta);
}

AsymptoticState make_annular_state(const ScalarField& base, double eta) {
  ScalarField mask = annulus_mask(base.grid_ptr(), eta);
  return AsymptoticState{multiply(base, mask), eta,
                         AsymptoticState::Provenance::AnnulusMasked};
}

// ---------------------------------------------------------------------------
// Potential tracks from the transported wave field
// ---------------------------------------------------------------------------

namespace {

// Shared per-track memo of B(t); one analytic sweep serves a, v and f.
struct BCache {
  WaveData data;
  std::shared_ptr<const Grid> grid;
  std::map<double, BFields> items;
  static constexpr std::size_t cap = 8;
  std::vector<double> order;

  BCache(WaveData d, std::shared_ptr<const Grid> g)
      : data(std::move(d)), grid(std::move(g)) {}

  const BFields& at(double t) {
    auto it = items.find(t);
    if (it != items.end()) return it->second;
    if (items.size() >= cap) {
      items.erase(order.front());
      order.erase(order.begin());
    }
    order.push_back(t);
    return items.emplace(t, b_from_a(data, t, grid)).first->second;
  }
};

}  // namespace

PotentialTrack make_u_track(const WaveData& data,
                            std::shared_ptr<const Grid> grid) {
  PotentialTrack track;
  WaveData d = data;
  track.a_of_t = [d, grid](double t) { return eval_analytic(d, t, grid).a; };
  track.a_dot_of_t = [d, grid](double t) {
    return eval_analytic(d, t, grid).a_dot;
  };
  return memoize_track(track);
}

PotentialTrack make_w_track(const WaveData& data,
                            std::shared_ptr<const Grid> grid) {
  auto cache = std::make_shared<BCache>(data, grid);
  PotentialTrack track;
  track.a_of_t = [cache](double t) { return cache->at(t).b; };
  track.v_of_t = [cache](double t) {
    ScalarField v = cache->at(t).bcheck;
    v *= Complex(-1.0, 0.0);
    return v;
  };
  return track;
}

PotentialTrack make_w0_track(const WaveData& data,
                             std::shared_ptr<const Grid> grid) {
  auto cache = std::make_shared<BCache>(data, grid);
  PotentialTrack track;
  track.v_of_t = [cache](double t) {
    const BFields& bf = cache->at(t);
    ScalarField v(bf.bcheck.grid_ptr(), Rep::Physical);
    for (std::size_t i = 0; i < v.size(); ++i) {
      double b2 = 0.0;
      for (int c = 0; c < 3; ++c) b2 += std::norm(bf.b[c][i]);
      v[i] = 0.5 * b2;
    }
    return v;
  };
  return track;
}

// ---------------------------------------------------------------------------
// Remainders
// ---------------------------------------------------------------------------

ScalarField residual_R_simple(const ScalarField& w_plus, const BFields& b,
                              double t) {
  ScalarField wbar = to_physical(w_plus);
  for (auto& v : wbar.values()) v = std::conj(v);
  ScalarField w = free_prop_U(wbar, t);
  auto grads = gradient(w);

  ScalarField out(w.grid_ptr(), Rep::Physical);
  const Complex mi(0.0, -1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Complex bdotgrad(0.0);
    double b2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      bdotgrad += b.b[c][i] * grads[c][i];
      b2 += std::norm(b.b[c][i]);
    }
    out[i] = mi * bdotgrad + (b.bcheck[i] - 0.5 * b2) * w[i];
  }
  return out;
}

ScalarField residual_R_stencil(const std::vector<SchrodState>& slices,
                               const BFields& b) {
  if (slices.size() != 3 && slices.size() != 5)
    throw MeshMismatchError("remainder stencil needs 3 or 5 slices");
  const std::size_t c = slices.size() / 2;
  const double dt = slices[1].t - slices[0].t;
  for (std::size_t i = 1; i < slices.size(); ++i)
    if (std::abs(slices[i].t - slices[i - 1].t - dt) > 1e-12)
      throw MeshMismatchError("remainder stencil slices are not uniformly spaced");

  const ScalarField& w = slices[c].u;
  ScalarField bcheck_neg = b.bcheck;
  bcheck_neg *= Complex(-1.0, 0.0);
  ScalarField kw = apply_K(w, b.b, bcheck_neg, 0.0);

  ScalarField out(w.grid_ptr(), Rep::Physical);
  const Complex ii(0.0, 1.0);
  if (slices.size() == 3) {
    ScalarField wp = to_physical(slices[2].u), wm = to_physical(slices[0].u);
    const double inv = 1.0 / (2.0 * dt);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = ii * (wp[i] - wm[i]) * inv - kw[i];
  } else {
    ScalarField w2p = to_physical(slices[4].u), wp = to_physical(slices[3].u);
    ScalarField wm = to_physical(slices[1].u), w2m = to_physical(slices[0].u);
    const double inv = 1.0 / (12.0 * dt);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = ii * (-w2p[i] + 8.0 * wp[i] - 8.0 * wm[i] + w2m[i]) * inv -
               kw[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct w construction
// ---------------------------------------------------------------------------

WDirectRun solve_w_direct(const AsymptoticState& state, const WaveData& data,
                          std::shared_ptr<const Grid> grid, double t0,
                          double t_end, const IntegratorConfig& cfg,
                          const std::vector<double>& sample_times,
                          bool store_snapshots) {
  if (!(t0 > 0.0 && t0 <= 0.125))
    throw ConfigError("solve_w_direct needs t0 in (0, 1/8]");
  ScalarField wbar = to_physical(state.w_plus);
  for (auto& v : wbar.values()) v = std::conj(v);

  PotentialTrack track = make_w_track(data, grid);
  EvolveRequest req;
  req.sample_times = sample_times;
  req.store_snapshots = store_snapshots;
  EvolveResult run = evolve(SchrodState{t0, wbar}, track, cfg, t_end, req);
  return WDirectRun{std::move(run), std::move(wbar)};
}

WRateTraces w_rate_traces(const WDirectRun& run) {
  WRateTraces out;
  out.to_data.name = "w_minus_data";
  out.to_profile.name = "w_minus_profile";
  for (const auto& snap : run.run.snapshots) {
    if (snap.t == run.run.norm_sq.front().first) continue;  // zero at data time
    out.to_data.add(snap.t, norm_l2(snap.u - run.w_plus_bar));
    out.to_profile.add(snap.t,
                       norm_l2(snap.u - free_prop_U(run.w_plus_bar, snap.t)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// q-equation
// ---------------------------------------------------------------------------

ScalarField resolvent_init(const ScalarField& r_t0, const BFields& b,
                           double b_shift, double t0, double rel_tol,
                           int max_iter) {
  const Grid& g = r_t0.grid();
  ScalarField bcheck_neg = b.bcheck;
  bcheck_neg *= Complex(-1.0, 0.0);
  const double shift = 1.0 / t0 + b_shift;

  auto op = [&](const ScalarField& x) {
    ScalarField y = apply_K(x, b.b, bcheck_neg, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += shift * x[i];
    return y;
  };
  // Free-resolvent preconditioner (shift + |k|^2/2)^{-1}.
  auto precond = [&](const ScalarField& x) {
    ScalarField s = to_spectral(x);
    const int n = g.n();
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::size_t rest = i;
      double k2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const double k = g.wavenumber(static_cast<int>(rest % n));
        rest /= n;
        k2 += k * k;
      }
      s[i] /= shift + 0.5 * k2;
    }
    return to_physical(s);
  };

  ScalarField rhs = to_physical(r_t0);
  const double rhs_norm = norm_l2(rhs);
  if (rhs_norm == 0.0) return ScalarField(r_t0.grid_ptr(), Rep::Physical);
  ScalarField x(r_t0.grid_ptr(), Rep::Physical);
  ScalarField r = rhs;
  ScalarField z = precond(r);
  ScalarField p = z;
  Complex rz = inner(r, z);
  for (int it = 0; it < max_iter; ++it) {
    if (norm_l2(r) <= rel_tol * rhs_norm) return x;
    ScalarField ap = op(p);
    const Complex alpha = rz / inner(p, ap);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    z = precond(r);
    const Complex rz_new = inner(r, z);
    const Complex beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  if (norm_l2(r) <= rel_tol * rhs_norm) return x;
  throw NonConvergenceError("resolvent CG did not reach tolerance in " +
                            std::to_string(max_iter) + " iterations");
}

QRun solve_q(const AsymptoticState& state, const WaveData& data,
             std::shared_ptr<const Grid> grid, double t0, double t_end,
             QInit init, const IntegratorConfig& cfg,
             const std::vector<double>& sample_times, bool store_snapshots) {
  if (!(t0 > 0.0 && t0 <= 0.125))
    throw ConfigError("solve_q needs t0 in (0, 1/8]");

  auto cache = std::make_shared<BCache>(data, grid);
  ScalarField w_plus = to_physical(state.w_plus);

  PotentialTrack track;
  track.a_of_t = [cache](double t) { return cache->at(t).b; };
  track.v_of_t = [cache](double t) {
    ScalarField v = cache->at(t).bcheck;
    v *= Complex(-1.0, 0.0);
    return v;
  };
  track.f_of_t = [cache, w_plus](double t) {
    ScalarField r = residual_R_simple(w_plus, cache->at(t), t);
    r *= Complex(-1.0, 0.0);
    return r;
  };

  const BFields b0 = b_from_a(data, t0, grid);
  ScalarField r0 = residual_R_simple(w_plus, b0, t0);

  double b_shift = 0.0;
  ScalarField q0(grid, Rep::Physical);
  if (init == QInit::Resolvent) {
    b_shift = norm_linf(b0.bcheck) + 1.0;
    q0 = resolvent_init(r0, b0, b_shift, t0);
  }
  const double q0_norm = norm_l2(q0);
  const double r0_norm = norm_l2(r0);

  EvolveRequest req;
  req.sample_times = sample_times;
  req.store_snapshots = store_snapshots;
  EvolveResult run =
      evolve(SchrodState{t0, std::move(q0)}, track, cfg, t_end, req);
  return QRun{std::move(run), b_shift, q0_norm, r0_norm};
}

// ---------------------------------------------------------------------------
// Modified profile
// ---------------------------------------------------------------------------

EvolveResult solve_W0(const ScalarField& v1, const WaveData& data,
                      std::shared_ptr<const Grid> grid, double t_to,
                      const IntegratorConfig& cfg,
                      const std::vector<double>& slice_times,
                      const std::function<void(const SchrodState&)>& on_slice,
                      const std::vector<Observer>& observers,
                      const std::vector<double>& observer_times) {
  if (!(t_to > 0.0 && t_to < 1.0))
    throw ConfigError("solve_W0 integrates backward from 1 to t_to in (0, 1)");
  PotentialTrack track = make_w0_track(data, grid);
  EvolveRequest req;
  req.sample_times = slice_times;
  req.sample_times.insert(req.sample_times.end(), observer_times.begin(),
                          observer_times.end());
  req.observers = observers;
  if (on_slice) {
    // deliver only the requested slice times, not observer times
    auto wanted = std::make_shared<std::vector<double>>(slice_times);
    req.on_sample = [on_slice, wanted](const SchrodState& s) {
      for (double t : *wanted)
        if (std::abs(t - s.t) < 1e-12) {
          on_slice(s);
          return;
        }
    };
  }
  return evolve(SchrodState{1.0, to_physical(v1)}, track, cfg, t_to, req);
}

ScalarField apply_profile_correction(const ScalarField& w0,
                                     const VectorField& h,
                                     const ScalarField& hcheck) {
  auto grads = gradient(w0);
  ScalarField w0p = to_physical(w0);
  ScalarField hc = to_physical(hcheck);
  VectorField hp = transform(h, Rep::Physical);
  ScalarField out(w0.grid_ptr(), Rep::Physical);
  const Complex mi(0.0, -1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Complex hdotgrad(0.0);
    for (int c = 0; c < hp.dim(); ++c) hdotgrad += hp[c][i] * grads[c][i];
    out[i] = w0p[i] + mi * hdotgrad + hc[i] * w0p[i];
  }
  return out;
}

std::vector<ModifiedProfileGroup> build_modified_profile(
    const std::vector<SchrodState>& w0_slices,
    const std::vector<double>& centers, double stencil_dt,
    const WaveData& data, std::shared_ptr<const Grid> grid) {
  auto find_slice = [&](double t) -> const SchrodState& {
    for (const auto& s : w0_slices)
      if (std::abs(s.t - t) < 1e-11) return s;
    throw MeshMismatchError("missing W0 slice at t = " + std::to_string(t));
  };

  std::vector<ModifiedProfileGroup> groups;
  for (double tc : centers) {
    ModifiedProfileGroup grp{tc, {}, b_from_a(data, tc, grid)};
    for (int o = -2; o <= 2; ++o) {
      const double ts = tc + o * stencil_dt;
      const SchrodState& w0 = find_slice(ts);
      BFields bs = (o == 0) ? grp.b : b_from_a(data, ts, grid);
      PoissonPair hp = poisson_h(bs.b, bs.bcheck);
      grp.w_slices.push_back(
          SchrodState{ts, apply_profile_correction(w0.u, hp.h, hp.hcheck)});
    }
    groups.push_back(std::move(grp));
  }
  return groups;
}

ScalarField residual_R_modified(const ModifiedProfileGroup& group) {
  return residual_R_stencil(group.w_slices, group.b);
}

// ---------------------------------------------------------------------------
// Back to u
// ---------------------------------------------------------------------------

UAsymptoticsResult compare_asymptotics_u(
    const std::vector<SchrodState>& w_snapshots, const ScalarField& w_plus,
    std::shared_ptr<const Grid> u_grid) {
  ScalarField u_plus = fourier_F(w_plus, u_grid, +1);

  // u-times 1/t_w ascend when w-times descend.
  std::vector<const SchrodState*> order;
  for (const auto& s : w_snapshots) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const SchrodState* a,
                                           const SchrodState* b) {
    return a->t > b->t;
  });

  UAsymptoticsResult out;
  out.deviation.name = "utilde_minus_uplus";
  out.x2_deviation.name = "x2_utilde_minus_uplus";
  for (const SchrodState* s : order) {
    const double t_u = 1.0 / s->t;
    ScalarField wt = free_prop_U(s->u, -s->t);
    for (auto& v : wt.values()) v = std::conj(v);
    ScalarField utilde = fourier_F(wt, u_grid, +1);
    ScalarField diff = utilde - u_plus;
    out.deviation.add(t_u, norm_l2(diff));
    ScalarField weighted =
        map_with_coords(diff, [&](const std::array<double, 3>& x, Complex v) {
          double x2 = 0.0;
          for (int a = 0; a < u_grid->dim(); ++a) x2 += x[a] * x[a];
          return x2 * v;
        });
    out.x2_deviation.add(t_u, norm_l2(weighted));
  }
  return out;
}

}  // namespace magscatter
