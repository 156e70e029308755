#include "magscatter/pctransform.hpp"

#include <algorithm>
#include <cmath>

namespace magscatter {

ScalarField free_prop_U(const ScalarField& f, double t) {
  const Grid& g = f.grid();
  ScalarField spec = to_spectral(f);
  const int n = g.n();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    std::size_t rest = i;
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const double k = g.wavenumber(static_cast<int>(rest % n));
      rest /= n;
      k2 += k * k;
    }
    spec[i] *= std::exp(Complex(0.0, -0.5 * t * k2));
  }
  return f.rep() == Rep::Spectral ? spec : to_physical(spec);
}

ScalarField gauge_M(const ScalarField& f, double t) {
  if (t == 0.0) throw ZeroTimeError("M(t) is undefined at t = 0");
  return map_with_coords(f, [&](const std::array<double, 3>& x, Complex v) {
    double x2 = 0.0;
    for (double c : x) x2 += c * c;
    return v * std::exp(Complex(0.0, 0.5 * x2 / t));
  });
}

ScalarField dilate_D(const ScalarField& f, double t, DilationKind kind) {
  if (t == 0.0) throw ZeroTimeError("dilation is undefined at t = 0");
  const Grid& g = f.grid();
  const double at = std::abs(t);
  const double half = 0.5 * g.length();

  const double supp = support_radius(f);
  if (supp * std::max(1.0, at) > half)
    throw WraparoundError("dilated support would leave the box");

  // Targets x_j / t form a tensor grid; out-of-box targets are genuine zeros
  // of the (interior-supported) field and are masked after evaluation.
  std::vector<double> pts(g.n());
  std::vector<bool> inside(g.n());
  for (int i = 0; i < g.n(); ++i) {
    pts[i] = g.coord(i) / t;
    inside[i] = std::abs(pts[i]) <= half;
  }
  if (at < 1.0 && supp > half - 2.0 * g.spacing())
    throw WraparoundError("contracting dilation needs interior support");

  std::vector<std::vector<double>> axis_points(g.dim(), pts);
  auto vals = evaluate_series_tensor(f, axis_points);

  Complex pref(1.0, 0.0);
  if (kind == DilationKind::D)
    pref = std::pow(Complex(0.0, t), Complex(-0.5 * g.dim(), 0.0));

  ScalarField out(f.grid_ptr(), Rep::Physical);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t rest = i;
    bool ok = true;
    for (int a = g.dim() - 1; a >= 0; --a) {
      ok = ok && inside[rest % g.n()];
      rest /= g.n();
    }
    out[i] = ok ? pref * vals[i] : Complex(0.0);
  }
  return out;
}

ScalarField fourier_F(const ScalarField& f, int sign) {
  return fourier_F(f, f.grid_ptr(), sign);
}

ScalarField fourier_F(const ScalarField& f,
                      std::shared_ptr<const Grid> target_grid, int sign) {
  const Grid& g = f.grid();
  const Grid& tg = *target_grid;
  if (tg.dim() != g.dim())
    throw GridMismatchError("Fourier target grid dimension mismatch");
  ScalarField phys = to_physical(f);

  // Quadrature transform: per-axis dense contraction with
  // E[p, j] = (h / sqrt(2 pi)) exp(sign * i xi_p x_j).
  const int n = g.n();
  const double fac = g.spacing() / std::sqrt(2.0 * M_PI);
  std::vector<Complex> cur = phys.values();
  std::array<std::size_t, 3> shape{1, 1, 1};
  for (int a = 0; a < g.dim(); ++a) shape[a] = n;

  for (int axis = g.dim() - 1; axis >= 0; --axis) {
    const int n_out = tg.n();
    std::vector<Complex> ev(static_cast<std::size_t>(n_out) * n);
    for (int p = 0; p < n_out; ++p)
      for (int j = 0; j < n; ++j)
        ev[static_cast<std::size_t>(p) * n + j] =
            fac * std::exp(Complex(0.0, sign * tg.coord(p) * g.coord(j)));

    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= shape[a];
    for (int a = axis + 1; a < g.dim(); ++a) inner *= shape[a];
    std::vector<Complex> next(outer * n_out * inner, Complex(0.0));
    for (std::size_t o = 0; o < outer; ++o)
      for (int p = 0; p < n_out; ++p) {
        Complex* dst = next.data() + (o * n_out + p) * inner;
        const Complex* row = ev.data() + static_cast<std::size_t>(p) * n;
        for (int j = 0; j < n; ++j) {
          const Complex w = row[j];
          const Complex* src = cur.data() + (o * n + j) * inner;
          for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
        }
      }
    cur.swap(next);
    shape[axis] = n_out;
  }
  return ScalarField(target_grid, std::move(cur), Rep::Physical);
}

FactorizationReport factorization_check(const ScalarField& f, double t) {
  ScalarField lhs = free_prop_U(f, t);
  ScalarField rhs = gauge_M(f, t);
  rhs = fourier_F(rhs);
  rhs = dilate_D(rhs, t, DilationKind::D);
  rhs = gauge_M(rhs, t);

  FactorizationReport rep;
  rep.norm_lhs = norm_l2(lhs);
  rep.norm_rhs = norm_l2(rhs);
  rep.discrepancy = norm_l2(to_physical(lhs) - rhs);
  rep.relative = rep.discrepancy / norm_l2(f);
  return rep;
}

namespace {

ScalarField conj_field(const ScalarField& f) {
  ScalarField out = to_physical(f);
  for (auto& v : out.values()) v = std::conj(v);
  return out;
}

}  // namespace

TransformedPair u_to_w(const ScalarField& u, double t_u) {
  if (t_u == 0.0) throw ZeroTimeError("pseudoconformal map undefined at t = 0");
  ScalarField m = gauge_M(u, -t_u);
  ScalarField d = dilate_D(m, 1.0 / t_u, DilationKind::D0);
  const Complex pref =
      std::pow(Complex(0.0, t_u), Complex(0.5 * u.grid().dim(), 0.0));
  d *= pref;
  ScalarField w = conj_field(d);
  return TransformedPair{t_u, 1.0 / t_u, to_physical(u), std::move(w)};
}

TransformedPair w_to_u(const ScalarField& w, double t_w) {
  if (t_w == 0.0) throw ZeroTimeError("pseudoconformal map undefined at t = 0");
  const double t_u = 1.0 / t_w;
  ScalarField u = dilate_D(conj_field(w), t_u, DilationKind::D);
  u = gauge_M(u, t_u);
  return TransformedPair{t_u, t_w, std::move(u), to_physical(w)};
}

ScalarField w_star_from_w(const ScalarField& w) { return conj_field(w); }

BFields b_from_a(const WaveData& data, double t_w,
                 std::shared_ptr<const Grid> grid) {
  const CurlGaussian& cg = data.curl_gaussian();
  if (!(t_w > 0.0)) throw ZeroTimeError("B(t) needs t > 0");
  VectorField b(grid, Rep::Physical);
  ScalarField bcheck(grid, Rep::Physical);
  const double inv_t = 1.0 / t_w;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    auto idx = grid->unravel(i);
    std::array<double, 3> y{grid->coord(idx[0]), grid->coord(idx[1]),
                            grid->coord(idx[2])};
    std::array<double, 3> x{y[0] * inv_t, y[1] * inv_t, y[2] * inv_t};
    WavePointValue v = eval_analytic_point(cg, inv_t, x);
    double ydotb = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double bc = -inv_t * v.a[c];
      b[c][i] = bc;
      ydotb += y[c] * bc;
    }
    bcheck[i] = inv_t * ydotb;
  }
  return BFields{std::move(b), std::move(bcheck), 0.0};
}

PoissonPair poisson_h(const VectorField& b, const ScalarField& bcheck) {
  auto invert = [](const ScalarField& src, double* mean_out) {
    ScalarField spec = to_spectral(src);
    if (mean_out) *mean_out = std::abs(spec[0]);
    spec[0] = 0.0;
    const Grid& g = src.grid();
    const int n = g.n();
    for (std::size_t i = 1; i < spec.size(); ++i) {
      std::size_t rest = i;
      double k2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const double k = g.wavenumber(static_cast<int>(rest % n));
        rest /= n;
        k2 += k * k;
      }
      spec[i] *= 2.0 / k2;
    }
    return to_physical(spec);
  };

  std::vector<ScalarField> comps;
  for (int a = 0; a < b.dim(); ++a) comps.push_back(invert(b[a], nullptr));
  double mean = 0.0;
  ScalarField hcheck = invert(bcheck, &mean);
  return PoissonPair{VectorField(std::move(comps)), std::move(hcheck), mean};
}

double b_norm_analytic(const WaveData& data, double t_w, double r) {
  const CurlGaussian& cg = data.curl_gaussian();
  const double pw = std::isinf(r) ? -1.0 : -1.0 + 3.0 / r;
  return std::pow(t_w, pw) * analytic_norm(cg, 1.0 / t_w, r, WaveField::A, 0);
}

double bcheck_norm_analytic(const WaveData& data, double t_w, double r) {
  const CurlGaussian& cg = data.curl_gaussian();
  const double pw = std::isinf(r) ? -1.0 : -1.0 + 3.0 / r;
  return std::pow(t_w, pw) *
         analytic_norm(cg, 1.0 / t_w, r, WaveField::XDotA, 0);
}

void check_boundary_tail(const ScalarField& f, double rel_tol) {
  ScalarField phys = to_physical(f);
  const Grid& g = f.grid();
  double global = 0.0;
  for (const auto& v : phys.values()) global = std::max(global, std::abs(v));
  if (global == 0.0) return;
  double edge = 0.0;
  for (std::size_t i = 0; i < phys.size(); ++i) {
    auto idx = g.unravel(i);
    bool boundary = false;
    for (int a = 0; a < g.dim(); ++a)
      boundary |= (idx[a] == 0 || idx[a] == g.n() - 1);
    if (boundary) edge = std::max(edge, std::abs(phys[i]));
  }
  if (edge > rel_tol * global)
    throw WraparoundError("field mass reaches the box boundary (ratio " +
                          std::to_string(edge / global) + ")");
}

}  // namespace magscatter
