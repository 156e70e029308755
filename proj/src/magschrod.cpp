#include "magscatter/magschrod.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>

namespace magscatter {

PotentialSample sample_track(const PotentialTrack& track, double t) {
  PotentialSample p;
  if (track.a_of_t) {
    p.a = transform(track.a_of_t(t), Rep::Physical);
    p.div_a = to_physical(divergence(*p.a));
  }
  if (track.v_of_t) p.v = to_physical(track.v_of_t(t));
  if (track.f_of_t) p.f = to_physical(track.f_of_t(t));
  return p;
}

namespace {

void check_grids(const ScalarField& u, const PotentialSample& p) {
  if (p.a && p.a->grid() != u.grid())
    throw GridMismatchError("vector potential grid differs from state grid");
  if (p.v && p.v->grid() != u.grid())
    throw GridMismatchError("scalar potential grid differs from state grid");
  if (p.f && p.f->grid() != u.grid())
    throw GridMismatchError("source grid differs from state grid");
}

// Shared kernel: computes K_eta u and optionally ||grad_A u||^2 from one
// forward transform and dim+1 inverse transforms.
ScalarField k_kernel(const ScalarField& u, const PotentialSample& p,
                     double eta, double* grad_a_sq) {
  check_grids(u, p);
  const Grid& g = u.grid();
  ScalarField up = to_physical(u);
  ScalarField lap = to_physical(laplacian(u));
  std::vector<ScalarField> du;
  if (p.a || grad_a_sq) {
    for (auto& comp : gradient(u)) du.push_back(to_physical(comp));
  }

  ScalarField delta_a = std::move(lap);
  if (p.a) {
    const VectorField& a = *p.a;
    const ScalarField& diva = *p.div_a;
    for (std::size_t i = 0; i < delta_a.size(); ++i) {
      Complex adotgrad(0.0);
      double a2 = 0.0;
      for (int c = 0; c < g.dim(); ++c) {
        adotgrad += a[c][i] * du[c][i];
        a2 += std::real(a[c][i]) * std::real(a[c][i]);
      }
      delta_a[i] += Complex(0.0, -1.0) *
                        (2.0 * adotgrad + diva[i] * up[i]) -
                    a2 * up[i];
    }
  }

  if (grad_a_sq) {
    double acc = 0.0;
    for (std::size_t i = 0; i < up.size(); ++i) {
      for (int c = 0; c < g.dim(); ++c) {
        Complex gc = du[c][i];
        if (p.a) gc -= Complex(0.0, 1.0) * (*p.a)[c][i] * up[i];
        acc += std::norm(gc);
      }
    }
    *grad_a_sq = acc * cell_volume(g);
  }

  const Complex coef = -0.5 * Complex(1.0, -eta);
  ScalarField out(u.grid_ptr(), Rep::Physical);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = coef * delta_a[i];
    if (p.v) out[i] += (*p.v)[i] * up[i];
  }
  return out;
}

}  // namespace

ScalarField apply_K(const ScalarField& u, const PotentialSample& p,
                    double eta) {
  return k_kernel(u, p, eta, nullptr);
}

ScalarField apply_K(const ScalarField& u, const VectorField& a,
                    const ScalarField& v, double eta) {
  PotentialSample p;
  p.a = transform(a, Rep::Physical);
  p.div_a = to_physical(divergence(a));
  p.v = to_physical(v);
  return k_kernel(u, p, eta, nullptr);
}

double grad_a_norm_sq(const ScalarField& u, const PotentialSample& p) {
  double out = 0.0;
  k_kernel(u, p, 0.0, &out);
  return out;
}

PotentialTrack memoize_track(const PotentialTrack& track, int capacity) {
  struct VCache {
    std::deque<std::pair<double, VectorField>> items;
  };
  struct SCache {
    std::deque<std::pair<double, ScalarField>> items;
  };
  auto wrap_v = [capacity](std::function<VectorField(double)> fn) {
    if (!fn) return fn;
    auto cache = std::make_shared<VCache>();
    return std::function<VectorField(double)>([fn, cache, capacity](double t) {
      for (const auto& [tt, v] : cache->items)
        if (tt == t) return v;
      VectorField v = fn(t);
      cache->items.emplace_back(t, v);
      if (static_cast<int>(cache->items.size()) > capacity)
        cache->items.pop_front();
      return v;
    });
  };
  auto wrap_s = [capacity](std::function<ScalarField(double)> fn) {
    if (!fn) return fn;
    auto cache = std::make_shared<SCache>();
    return std::function<ScalarField(double)>([fn, cache, capacity](double t) {
      for (const auto& [tt, v] : cache->items)
        if (tt == t) return v;
      ScalarField v = fn(t);
      cache->items.emplace_back(t, v);
      if (static_cast<int>(cache->items.size()) > capacity)
        cache->items.pop_front();
      return v;
    });
  };
  PotentialTrack out;
  out.a_of_t = wrap_v(track.a_of_t);
  out.v_of_t = wrap_s(track.v_of_t);
  out.f_of_t = wrap_s(track.f_of_t);
  out.a_dot_of_t = track.a_dot_of_t;
  out.v_dot_of_t = track.v_dot_of_t;
  return out;
}

namespace {

double max_k2(const Grid& g) {
  const double kmax = M_PI * g.n() / g.length();
  return g.dim() * kmax * kmax;
}

struct StageCache {
  std::deque<std::pair<double, PotentialSample>> items;
  const PotentialTrack* track = nullptr;

  const PotentialSample& at(double t) {
    for (auto& [tt, s] : items)
      if (tt == t) return s;
    items.emplace_back(t, sample_track(*track, t));
    if (items.size() > 6) items.pop_front();
    return items.back().second;
  }
};

}  // namespace

EvolveResult evolve(const SchrodState& initial, const PotentialTrack& track,
                    const IntegratorConfig& cfg, double t_end,
                    const EvolveRequest& req) {
  if (!(cfg.dt > 0.0)) throw ConfigError("integrator dt must be positive");
  if (cfg.eta < 0.0 || cfg.eta > 1.0)
    throw ConfigError("eta must lie in [0, 1]");
  const Grid& g = initial.u.grid();
  if (cfg.dt * 0.5 * max_k2(g) > cfg.stability_guard)
    throw StabilityError("dt * max|k|^2 / 2 = " +
                         std::to_string(cfg.dt * 0.5 * max_k2(g)) +
                         " exceeds the stability guard");
  const bool backward = t_end < initial.t;
  if (backward && cfg.eta > 0.0)
    throw StabilityError("dissipative runs are forward-only");

  // Event times: requested samples plus the end point, ordered along the
  // integration direction; every event is hit exactly.
  std::vector<double> events = req.sample_times;
  events.push_back(t_end);
  std::sort(events.begin(), events.end());
  if (backward) std::reverse(events.begin(), events.end());
  const double dir = backward ? -1.0 : 1.0;
  for (double e : events)
    if (dir * (e - initial.t) < -1e-14)
      throw ConfigError("sample time outside the integration interval");

  StageCache cache;
  cache.track = &track;

  std::map<std::string, NormTrace> traces;
  std::vector<SchrodState> snapshots;
  ScalarSeries norm_sq, source_integral, grad_integral;
  ScalarField u = to_physical(initial.u);
  double t = initial.t;
  double i_src = 0.0, i_grad = 0.0;

  auto record_step = [&](double tt) {
    double n2 = 0.0;
    for (const auto& v : u.values()) n2 += std::norm(v);
    n2 *= cell_volume(g);
    norm_sq.emplace_back(tt, n2);
    source_integral.emplace_back(tt, i_src);
    grad_integral.emplace_back(tt, i_grad);
  };

  auto record_event = [&](double tt) {
    for (const auto& obs : req.observers) {
      auto& trace = traces[obs.name];
      trace.name = obs.name;
      // stored in integration order; reversed at the end for backward runs
      trace.samples.emplace_back(tt, norm(u, obs.spec));
    }
    if (req.store_snapshots) snapshots.push_back(SchrodState{tt, u});
    if (req.on_sample) req.on_sample(SchrodState{tt, u});
  };

  // Stage derivative: du/dt = -i (K_eta u + f); also the accumulator rates
  // d/dt I_src = 2 Im<u, f> and d/dt I_grad = ||grad_A u||^2.
  auto stage = [&](double ts, const ScalarField& us, ScalarField& dudt,
                   double& dsrc, double& dgrad) {
    const PotentialSample& p = cache.at(ts);
    double gsq = 0.0;
    ScalarField ku = k_kernel(us, p, cfg.eta, cfg.eta > 0.0 ? &gsq : nullptr);
    if (p.f) {
      Complex vf(0.0);
      ScalarField usp = to_physical(us);
      for (std::size_t i = 0; i < ku.size(); ++i) {
        ku[i] += (*p.f)[i];
        vf += std::conj(usp[i]) * (*p.f)[i];
      }
      dsrc = 2.0 * std::imag(vf * cell_volume(g));
    } else {
      dsrc = 0.0;
    }
    dgrad = cfg.eta * gsq;  // accumulates eta * int ||grad_A v||^2
    dudt = Complex(0.0, -1.0) * ku;
  };

  record_step(t);
  record_event(t);

  std::size_t ev = 0;
  // Skip events that coincide with the start.
  while (ev < events.size() && std::abs(events[ev] - t) < 1e-14) ++ev;

  for (; ev < events.size(); ++ev) {
    const double target = events[ev];
    if (std::abs(target - t) < 1e-14) continue;
    const int n_steps =
        std::max(1, static_cast<int>(std::ceil(std::abs(target - t) / cfg.dt -
                                               1e-12)));
    const double h = (target - t) / n_steps;
    for (int s = 0; s < n_steps; ++s) {
      ScalarField k1(u.grid_ptr()), k2(u.grid_ptr()), k3(u.grid_ptr()),
          k4(u.grid_ptr());
      double s1, s2, s3, s4, g1, g2, g3, g4;
      stage(t, u, k1, s1, g1);
      ScalarField u2 = u;
      for (std::size_t i = 0; i < u.size(); ++i) u2[i] += 0.5 * h * k1[i];
      stage(t + 0.5 * h, u2, k2, s2, g2);
      ScalarField u3 = u;
      for (std::size_t i = 0; i < u.size(); ++i) u3[i] += 0.5 * h * k2[i];
      stage(t + 0.5 * h, u3, k3, s3, g3);
      ScalarField u4 = u;
      for (std::size_t i = 0; i < u.size(); ++i) u4[i] += h * k3[i];
      stage(t + h, u4, k4, s4, g4);

      for (std::size_t i = 0; i < u.size(); ++i)
        u[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      i_src += (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
      i_grad += (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
      t = (s == n_steps - 1) ? target : t + h;
      record_step(t);
    }
    record_event(t);
  }

  if (backward)
    for (auto& [name, trace] : traces)
      std::reverse(trace.samples.begin(), trace.samples.end());

  return EvolveResult{SchrodState{t, std::move(u)}, std::move(traces),
                      std::move(snapshots), std::move(norm_sq),
                      std::move(source_integral), std::move(grad_integral)};
}

namespace {

double series_at(const ScalarSeries& s, double t, const char* what) {
  for (const auto& [tt, v] : s)
    if (std::abs(tt - t) < 1e-12) return v;
  throw ConfigError(std::string(what) + ": time " + std::to_string(t) +
                    " was not recorded during the run");
}

}  // namespace

IdentityReport l2_identity_check(const EvolveResult& run, double t1,
                                 double t2) {
  IdentityReport rep;
  rep.lhs = series_at(run.norm_sq, t2, "l2_identity_check") -
            series_at(run.norm_sq, t1, "l2_identity_check");
  rep.rhs = series_at(run.source_integral, t2, "l2_identity_check") -
            series_at(run.source_integral, t1, "l2_identity_check");
  rep.discrepancy = rep.lhs - rep.rhs;
  return rep;
}

IdentityReport eta_dissipation_check(const EvolveResult& run, double t1,
                                     double t2) {
  IdentityReport rep;
  const double dn = series_at(run.norm_sq, t2, "eta_dissipation_check") -
                    series_at(run.norm_sq, t1, "eta_dissipation_check");
  const double gi = series_at(run.grad_integral, t2, "eta_dissipation_check") -
                    series_at(run.grad_integral, t1, "eta_dissipation_check");
  rep.lhs = dn + gi;  // grad_integral already carries the eta factor
  rep.rhs = series_at(run.source_integral, t2, "eta_dissipation_check") -
            series_at(run.source_integral, t1, "eta_dissipation_check");
  rep.discrepancy = rep.lhs - rep.rhs;
  return rep;
}

ScalarField schrod_residual(const SchrodState& prev, const SchrodState& mid,
                            const SchrodState& next,
                            const PotentialTrack& track, double eta) {
  const double dt_f = next.t - mid.t;
  const double dt_b = mid.t - prev.t;
  if (std::abs(dt_f - dt_b) > 1e-12 * std::max(std::abs(dt_f), 1.0))
    throw MeshMismatchError("residual stencil needs uniform time spacing");
  PotentialSample p = sample_track(track, mid.t);
  ScalarField ku = k_kernel(mid.u, p, eta, nullptr);
  ScalarField un = to_physical(next.u);
  ScalarField up = to_physical(prev.u);
  ScalarField out(mid.u.grid_ptr(), Rep::Physical);
  const Complex ii(0.0, 1.0);
  const double inv = 1.0 / (2.0 * dt_f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = ii * (un[i] - up[i]) * inv - ku[i];
    if (p.f) out[i] -= (*p.f)[i];
  }
  return out;
}

}  // namespace magscatter
