#include "magscatter/wavefield.hpp"

#include <algorithm>
#include <cmath>

#include "magscatter/analysis.hpp"

namespace magscatter {

const CurlGaussian& WaveData::curl_gaussian() const {
  if (!is_analytic())
    throw AnalyticVariantRequiredError("wave data is grid-sampled, not analytic");
  return std::get<CurlGaussian>(source);
}

const GridPairData& WaveData::grid_pair() const {
  if (is_analytic())
    throw AnalyticVariantRequiredError("wave data is analytic, not grid-sampled");
  return std::get<GridPairData>(source);
}

// ---------------------------------------------------------------------------
// Leray projection and spectral wave propagation
// ---------------------------------------------------------------------------

VectorField leray_project(const VectorField& v) {
  const Grid& g = v.grid();
  const int dim = g.dim();
  std::vector<ScalarField> spec;
  for (int a = 0; a < dim; ++a) spec.push_back(to_spectral(v[a]));

  const int n = g.n();
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rest = i;
    double k[3] = {0, 0, 0}, k2 = 0.0;
    for (int a = dim - 1; a >= 0; --a) {
      k[a] = g.wavenumber(static_cast<int>(rest % n));
      rest /= n;
      k2 += k[a] * k[a];
    }
    if (k2 == 0.0) {
      for (int a = 0; a < dim; ++a) spec[a][i] = 0.0;
      continue;
    }
    Complex kdotv(0.0);
    for (int a = 0; a < dim; ++a) kdotv += k[a] * spec[a][i];
    for (int a = 0; a < dim; ++a) spec[a][i] -= k[a] * kdotv / k2;
  }
  VectorField out(std::move(spec));
  return v.rep() == Rep::Spectral ? out : transform(out, Rep::Physical);
}

namespace {

double spectral_zero_mode_mag(const VectorField& v) {
  double m = 0.0;
  for (int a = 0; a < v.dim(); ++a) m = std::max(m, std::abs(to_spectral(v[a])[0]));
  return m;
}

ScalarField contract_x(const VectorField& a) {
  const Grid& g = a.grid();
  VectorField phys = transform(a, Rep::Physical);
  ScalarField out(a.grid_ptr(), Rep::Physical);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.unravel(i);
    Complex acc(0.0);
    for (int ax = 0; ax < g.dim(); ++ax)
      acc += g.coord(idx[ax]) * phys[ax][i];
    out[i] = acc;
  }
  return out;
}

}  // namespace

WaveSnapshot propagate_grid(const GridPairData& data, double t) {
  const Grid& g = data.a_plus.grid();
  if (data.a_dot_plus.grid() != g)
    throw GridMismatchError("wave data components live on different grids");
  const double zm = std::max(spectral_zero_mode_mag(data.a_plus),
                             spectral_zero_mode_mag(data.a_dot_plus));
  if (zm > 1e-12)
    throw NonZeroMeanError("free-wave propagation requires zero-mean data");

  const int dim = g.dim(), n = g.n();
  VectorField a(data.a_plus.grid_ptr(), Rep::Spectral);
  VectorField a_dot(data.a_plus.grid_ptr(), Rep::Spectral);
  std::vector<ScalarField> ap, adp;
  for (int c = 0; c < dim; ++c) {
    ap.push_back(to_spectral(data.a_plus[c]));
    adp.push_back(to_spectral(data.a_dot_plus[c]));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rest = i;
    double k2 = 0.0;
    for (int ax = 0; ax < dim; ++ax) {
      const double k = g.wavenumber(static_cast<int>(rest % n));
      rest /= n;
      k2 += k * k;
    }
    const double w = std::sqrt(k2);
    const double c = std::cos(w * t);
    const double s = w > 0.0 ? std::sin(w * t) / w : 0.0;
    for (int comp = 0; comp < dim; ++comp) {
      a[comp][i] = c * ap[comp][i] + s * adp[comp][i];
      a_dot[comp][i] = -w * std::sin(w * t) * ap[comp][i] + c * adp[comp][i];
    }
  }
  VectorField a_phys = transform(a, Rep::Physical);
  WaveSnapshot snap{t, a_phys, transform(a_dot, Rep::Physical),
                    contract_x(a_phys), std::nullopt};
  return snap;
}

// ---------------------------------------------------------------------------
// Curl-Gaussian analytics
// ---------------------------------------------------------------------------

namespace {

// Derivatives of g(s) = s * phi(s), phi = amp exp(-s^2 / 2 sigma^2), via the
// recurrence phi^(k+1) = -(s phi^(k) + k phi^(k-1)) / sigma^2.
struct GDerivs {
  static constexpr int kMax = 9;
  double g[kMax + 1];
};

GDerivs g_derivs(const CurlGaussian& cg, double s) {
  const double inv_s2 = 1.0 / (cg.sigma * cg.sigma);
  double phi[GDerivs::kMax + 1];
  phi[0] = cg.amplitude * std::exp(-0.5 * s * s * inv_s2);
  phi[1] = -s * inv_s2 * phi[0];
  for (int k = 1; k < GDerivs::kMax; ++k)
    phi[k + 1] = -(s * phi[k] + k * phi[k - 1]) * inv_s2;
  GDerivs d;
  d.g[0] = s * phi[0];
  for (int k = 1; k <= GDerivs::kMax; ++k) d.g[k] = s * phi[k] + k * phi[k - 1];
  return d;
}

// Radial profile q(t, rho) = psi_r / rho and friends; A = q * ((x-c) x e).
struct RadialValues {
  double q = 0.0;          // psi_r / rho
  double q_t = 0.0;        // d_t q
  double q_tt = 0.0;
  double qr_over_r = 0.0;  // (d_rho q) / rho
};

RadialValues radial_values(const CurlGaussian& cg, double t, double rho) {
  RadialValues out;
  const double small = 0.01 * cg.sigma;
  if (rho < small) {
    // Even/odd symmetry of g collapses the d'Alembert combination to a series
    // in rho^2 around the axis.
    GDerivs d = g_derivs(cg, t);
    const double r2 = rho * rho, r4 = r2 * r2;
    out.q = d.g[3] / 3.0 + r2 * d.g[5] / 30.0 + r4 * d.g[7] / 840.0;
    out.q_t = d.g[4] / 3.0 + r2 * d.g[6] / 30.0 + r4 * d.g[8] / 840.0;
    out.q_tt = d.g[5] / 3.0 + r2 * d.g[7] / 30.0 + r4 * d.g[9] / 840.0;
    out.qr_over_r = d.g[5] / 15.0 + r2 * d.g[7] / 210.0;
    return out;
  }
  GDerivs p = g_derivs(cg, rho + t);  // outgoing argument
  GDerivs m = g_derivs(cg, rho - t);  // incoming argument
  const double inv_r = 1.0 / rho;
  const double inv_r2 = inv_r * inv_r, inv_r3 = inv_r2 * inv_r;
  const double inv_r4 = inv_r2 * inv_r2, inv_r5 = inv_r4 * inv_r;
  const double S0 = p.g[0] + m.g[0];
  const double S1 = p.g[1] + m.g[1];
  const double S2 = p.g[2] + m.g[2];
  const double S3 = p.g[3] + m.g[3];
  const double T1 = p.g[1] - m.g[1];
  const double T2 = p.g[2] - m.g[2];

  out.q = 0.5 * (S1 * inv_r2 - S0 * inv_r3);
  out.q_t = 0.5 * (T2 * inv_r2 - T1 * inv_r3);
  out.q_tt = 0.5 * (S3 * inv_r2 - S2 * inv_r3);
  out.qr_over_r = 0.5 * (S2 * inv_r3 - 3.0 * S1 * inv_r4 + 3.0 * S0 * inv_r5);
  return out;
}

inline std::array<double, 3> cross(const std::array<double, 3>& u,
                                   const std::array<double, 3>& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
          u[0] * v[1] - u[1] * v[0]};
}

}  // namespace

WavePointValue eval_analytic_point(const CurlGaussian& cg, double t,
                                   const std::array<double, 3>& x) {
  std::array<double, 3> d{x[0] - cg.center[0], x[1] - cg.center[1],
                          x[2] - cg.center[2]};
  const double rho = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const RadialValues rv = radial_values(cg, t, rho);
  const auto dxe = cross(d, cg.axis);

  WavePointValue out;
  for (int i = 0; i < 3; ++i) {
    out.a[i] = rv.q * dxe[i];
    out.a_t[i] = rv.q_t * dxe[i];
  }
  out.x_dot_a = x[0] * out.a[0] + x[1] * out.a[1] + x[2] * out.a[2];
  // d_j A_i = (q_r/rho) d_j (d x e)_i + q eps_{ijl} e_l
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.grad_a[i][j] = rv.qr_over_r * d[j] * dxe[i];
  out.grad_a[0][1] += rv.q * cg.axis[2];
  out.grad_a[0][2] -= rv.q * cg.axis[1];
  out.grad_a[1][0] -= rv.q * cg.axis[2];
  out.grad_a[1][2] += rv.q * cg.axis[0];
  out.grad_a[2][0] += rv.q * cg.axis[1];
  out.grad_a[2][1] -= rv.q * cg.axis[0];
  return out;
}

WaveSnapshot eval_analytic(const WaveData& data, double t,
                           std::shared_ptr<const Grid> grid) {
  const CurlGaussian& cg = data.curl_gaussian();
  if (grid->dim() != 3)
    throw ConfigError("curl-Gaussian wave data is three-dimensional");
  VectorField a(grid, Rep::Physical);
  VectorField a_dot(grid, Rep::Physical);
  ScalarField xa(grid, Rep::Physical);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    auto idx = grid->unravel(i);
    std::array<double, 3> x{grid->coord(idx[0]), grid->coord(idx[1]),
                            grid->coord(idx[2])};
    WavePointValue v = eval_analytic_point(cg, t, x);
    for (int c = 0; c < 3; ++c) {
      a[c][i] = v.a[c];
      a_dot[c][i] = v.a_t[c];
    }
    xa[i] = v.x_dot_a;
  }
  return WaveSnapshot{t, std::move(a), std::move(a_dot), std::move(xa),
                      std::nullopt};
}

// ---------------------------------------------------------------------------
// Radial-quadrature norms
// ---------------------------------------------------------------------------

namespace {

// 2 pi * int_0^pi sin^{r+1} = 2 pi sqrt(pi) Gamma(r/2 + 1) / Gamma(r/2 + 3/2)
double angular_sin(double r) {
  return 2.0 * M_PI * std::sqrt(M_PI) *
         std::exp(std::lgamma(0.5 * r + 1.0) - std::lgamma(0.5 * r + 1.5));
}
// 2 pi * int_0^pi |cos|^r sin = 4 pi / (r + 1)
double angular_cos(double r) { return 4.0 * M_PI / (r + 1.0); }

double radial_q(const CurlGaussian& cg, double t, double rho, int j) {
  RadialValues rv = radial_values(cg, t, rho);
  switch (j) {
    case 0: return rv.q;
    case 1: return rv.q_t;
    case 2: return rv.q_tt;
    default: throw ConfigError("analytic norms support j <= 2");
  }
}

}  // namespace

double analytic_norm(const CurlGaussian& cg, double t, double r,
                     WaveField which, int j) {
  const double lo = 0.0;
  const double hi = std::abs(t) + 10.0 * cg.sigma;
  const int n_pts = std::min(
      400000, std::max(4000, static_cast<int>(64.0 * (hi - lo) / cg.sigma)));
  const double drho = (hi - lo) / n_pts;

  const auto exc = cross(cg.axis, cg.center);  // e x c, for x.A contraction
  const double exc_mag =
      std::sqrt(exc[0] * exc[0] + exc[1] * exc[1] + exc[2] * exc[2]);

  if (std::isinf(r)) {
    // sup |field| = sup_rho rho |q| (A) or |e x c| sup rho |q| (x.A);
    // dense scan then golden-section refinement around the best cell.
    auto val = [&](double rho) { return rho * std::abs(radial_q(cg, t, rho, j)); };
    double best = 0.0, best_rho = lo;
    for (int i = 0; i <= n_pts; ++i) {
      const double rho = lo + i * drho;
      const double v = val(rho);
      if (v > best) {
        best = v;
        best_rho = rho;
      }
    }
    double a = std::max(lo, best_rho - drho), b = best_rho + drho;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = val(x1), f2 = val(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = val(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = val(x1);
      }
    }
    best = std::max(best, std::max(f1, f2));
    return which == WaveField::A ? best : exc_mag * best;
  }

  // trapezoid over the compactly supported radial profile
  double acc = 0.0;
  for (int i = 0; i <= n_pts; ++i) {
    const double rho = lo + i * drho;
    const double q = radial_q(cg, t, rho, j);
    const double term =
        std::pow(std::abs(q), r) * std::pow(rho, r + 2.0);
    acc += (i == 0 || i == n_pts) ? 0.5 * term : term;
  }
  acc *= drho;
  const double ang = which == WaveField::A ? angular_sin(r) : angular_cos(r);
  const double scale = which == WaveField::A ? 1.0 : exc_mag;
  return scale * std::pow(ang * acc, 1.0 / r);
}

// ---------------------------------------------------------------------------
// Dilation generator, moments, decay traces
// ---------------------------------------------------------------------------

double wave_support_radius(const WaveData& data) {
  if (data.is_analytic()) {
    const auto& cg = data.curl_gaussian();
    double cmax = 0.0;
    for (double c : cg.center) cmax = std::max(cmax, std::abs(c));
    return cmax + 6.0 * cg.sigma;
  }
  const auto& gp = data.grid_pair();
  return std::max(support_radius(gp.a_plus), support_radius(gp.a_dot_plus));
}

namespace {

ScalarField x_dot_grad(const ScalarField& f) {
  const Grid& g = f.grid();
  auto grads = gradient(f);
  ScalarField out(f.grid_ptr(), Rep::Physical);
  for (int a = 0; a < g.dim(); ++a) {
    ScalarField ga = to_physical(grads[a]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.unravel(i);
      out[i] += g.coord(idx[a]) * ga[i];
    }
  }
  return out;
}

void require_interior_support(const VectorField& v, const char* what) {
  const Grid& g = v.grid();
  if (support_radius(v) > 0.5 * g.length() - 2.0 * g.spacing())
    throw WraparoundError(std::string(what) +
                          ": data support touches the box boundary");
}

// Remove the (analytically zero, numerically tiny) spatial mean so the
// |k|^{-1} propagator factor stays defined.
VectorField zero_mean(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < v.dim(); ++a) {
    ScalarField s = to_spectral(v[a]);
    s[0] = 0.0;
    comps.push_back(to_physical(s));
  }
  return VectorField(std::move(comps));
}

}  // namespace

VectorField apply_generator_P(const WaveData& data, double t,
                              std::shared_ptr<const Grid> grid) {
  if (data.is_analytic()) {
    const auto& cg = data.curl_gaussian();
    VectorField out(grid, Rep::Physical);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      auto idx = grid->unravel(i);
      std::array<double, 3> x{grid->coord(idx[0]), grid->coord(idx[1]),
                              grid->coord(idx[2])};
      WavePointValue v = eval_analytic_point(cg, t, x);
      for (int c = 0; c < 3; ++c) {
        double xg = 0.0;
        for (int a = 0; a < 3; ++a) xg += x[a] * v.grad_a[c][a];
        out[c][i] = t * v.a_t[c] + xg;
      }
    }
    return out;
  }

  const auto& gp = data.grid_pair();
  require_interior_support(gp.a_plus, "apply_generator_P");
  require_interior_support(gp.a_dot_plus, "apply_generator_P");
  const int dim = grid->dim();
  std::vector<ScalarField> xa, xad;
  for (int c = 0; c < dim; ++c) {
    xa.push_back(x_dot_grad(gp.a_plus[c]));
    ScalarField s = x_dot_grad(gp.a_dot_plus[c]);
    s += to_physical(gp.a_dot_plus[c]);
    xad.push_back(std::move(s));
  }
  GridPairData pdata{zero_mean(VectorField(std::move(xa))),
                     zero_mean(VectorField(std::move(xad)))};
  return propagate_grid(pdata, t).a;
}

MomentReport check_moments(const WaveData& data,
                           std::shared_ptr<const Grid> grid) {
  VectorField a(grid, Rep::Physical), ad(grid, Rep::Physical);
  if (data.is_analytic()) {
    const auto& cg = data.curl_gaussian();
    for (std::size_t i = 0; i < grid->size(); ++i) {
      auto idx = grid->unravel(i);
      std::array<double, 3> x{grid->coord(idx[0]), grid->coord(idx[1]),
                              grid->coord(idx[2])};
      WavePointValue v = eval_analytic_point(cg, 0.0, x);
      for (int c = 0; c < 3; ++c) a[c][i] = v.a[c];  // Adot+ = 0 by construction
    }
  } else {
    a = transform(data.grid_pair().a_plus, Rep::Physical);
    ad = transform(data.grid_pair().a_dot_plus, Rep::Physical);
  }

  const Grid& g = *grid;
  const double vol = cell_volume(g);
  MomentReport rep;
  double boxvol = 1.0;
  for (int x = 0; x < g.dim(); ++x) boxvol *= g.length();
  rep.tolerance = 1e-10 * boxvol;
  for (int c = 0; c < g.dim(); ++c) {
    Complex ia(0.0), iad(0.0);
    Complex ixad[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.unravel(i);
      ia += a[c][i];
      iad += ad[c][i];
      for (int ax = 0; ax < g.dim(); ++ax)
        ixad[ax] += g.coord(idx[ax]) * ad[c][i];
    }
    rep.int_a[c] = std::abs(ia) * vol;
    rep.int_a_dot[c] = std::abs(iad) * vol;
    for (int ax = 0; ax < g.dim(); ++ax)
      rep.int_x_a_dot[ax][c] = std::abs(ixad[ax]) * vol;
  }
  rep.pass = rep.max_abs() < rep.tolerance;
  return rep;
}

double MomentReport::max_abs() const {
  double m = 0.0;
  for (double v : int_a) m = std::max(m, v);
  for (double v : int_a_dot) m = std::max(m, v);
  for (const auto& row : int_x_a_dot)
    for (double v : row) m = std::max(m, v);
  return m;
}

std::vector<NormTrace> decay_profile(const WaveData& data,
                                     const std::vector<DecayRequest>& requests,
                                     const std::vector<double>& times,
                                     std::shared_ptr<const Grid> grid) {
  std::vector<NormTrace> traces(requests.size());
  for (std::size_t q = 0; q < requests.size(); ++q)
    traces[q].name = requests[q].label;

  if (data.is_analytic()) {
    const auto& cg = data.curl_gaussian();
    for (double t : times)
      for (std::size_t q = 0; q < requests.size(); ++q) {
        const auto& req = requests[q];
        bool has_space = false;
        for (int o : req.alpha) has_space |= (o != 0);
        if (has_space)
          throw ConfigError("analytic decay traces support alpha = 0 only");
        traces[q].add(t, analytic_norm(cg, t, req.r, req.which, req.j));
      }
    return traces;
  }

  const auto& gp = data.grid_pair();
  const double window = 0.5 * grid->length() - wave_support_radius(data);
  for (double t : times) {
    if (t > window)
      throw WraparoundError("decay time " + std::to_string(t) +
                            " exceeds wraparound window " + std::to_string(window));
    WaveSnapshot snap = propagate_grid(gp, t);
    for (std::size_t q = 0; q < requests.size(); ++q) {
      const auto& req = requests[q];
      if (req.j > 1)
        throw ConfigError("grid decay traces support j <= 1");
      const VectorField& base = req.j == 0 ? snap.a : snap.a_dot;
      if (req.which == WaveField::XDotA) {
        ScalarField xa = req.j == 0 ? snap.x_dot_a : ScalarField(grid);
        if (req.j == 1) {
          VectorField ad = snap.a_dot;
          xa = ScalarField(grid, Rep::Physical);
          for (std::size_t i = 0; i < grid->size(); ++i) {
            auto idx = grid->unravel(i);
            Complex acc(0.0);
            for (int ax = 0; ax < grid->dim(); ++ax)
              acc += grid->coord(idx[ax]) * ad[ax][i];
            xa[i] = acc;
          }
        }
        ScalarField d = derivative(xa, req.alpha.empty()
                                           ? std::vector<int>(grid->dim(), 0)
                                           : req.alpha);
        traces[q].add(t, norm(d, NormSpec::lebesgue(req.r)));
      } else {
        std::vector<ScalarField> comps;
        for (int c = 0; c < grid->dim(); ++c)
          comps.push_back(derivative(base[c],
                                     req.alpha.empty()
                                         ? std::vector<int>(grid->dim(), 0)
                                         : req.alpha));
        traces[q].add(t, norm(VectorField(std::move(comps)),
                              NormSpec::lebesgue(req.r)));
      }
    }
  }
  return traces;
}

}  // namespace magscatter
