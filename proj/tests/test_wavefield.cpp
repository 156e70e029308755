#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magscatter/analysis.hpp"
#include "magscatter/wavefield.hpp"
#include "oracles.hpp"

using namespace magscatter;

namespace {

std::shared_ptr<const Grid> grid3(int n = 16, double L = 16.0) {
  return std::make_shared<Grid>(3, n, L);
}

VectorField random_vector(std::shared_ptr<const Grid> g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorField v(g, Rep::Physical);
  for (int c = 0; c < g->dim(); ++c)
    for (auto& x : v[c].values()) x = Complex(nd(rng), nd(rng));
  return v;
}

CurlGaussian test_cg(double sigma = 1.0) {
  CurlGaussian cg;
  cg.amplitude = 1.3;
  cg.sigma = sigma;
  cg.axis = {0.0, 0.0, 1.0};
  return cg;
}

// Spectral curl of a sampled scalar profile times the axis, the oracle for
// the analytic evaluator at t = 0.
VectorField spectral_curl_axis(const ScalarField& psi,
                               const std::array<double, 3>& e) {
  auto g = psi.grid_ptr();
  auto d = [&](int axis) {
    std::vector<int> alpha(3, 0);
    alpha[axis] = 1;
    return derivative(psi, alpha);
  };
  ScalarField dx = d(0), dy = d(1), dz = d(2);
  std::vector<ScalarField> comps;
  comps.push_back(ScalarField(g, Rep::Physical));
  comps.push_back(ScalarField(g, Rep::Physical));
  comps.push_back(ScalarField(g, Rep::Physical));
  for (std::size_t i = 0; i < psi.size(); ++i) {
    // curl(psi e) = grad(psi) x e
    comps[0][i] = dy[i] * e[2] - dz[i] * e[1];
    comps[1][i] = dz[i] * e[0] - dx[i] * e[2];
    comps[2][i] = dx[i] * e[1] - dy[i] * e[0];
  }
  return VectorField(std::move(comps));
}

}  // namespace

TEST_CASE("Leray projection annihilates gradients") {
  auto g = grid3();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  ScalarField phi(g, Rep::Physical);
  for (auto& v : phi.values()) v = nd(rng);
  ScalarField sp = to_spectral(phi);
  sp[0] = 0.0;
  phi = to_physical(sp);
  auto grads = gradient(phi);
  VectorField gv(std::vector<ScalarField>{grads[0], grads[1], grads[2]});
  CHECK(norm_l2(leray_project(gv)) < 1e-10);
}

TEST_CASE("Leray projection leaves curl fields unchanged") {
  auto g = grid3(32, 24.0);
  ScalarField psi = gaussian_field(g, 2.0);
  VectorField curl = spectral_curl_axis(psi, {0.0, 0.0, 1.0});
  VectorField proj = leray_project(curl);
  double diff = 0.0;
  for (int c = 0; c < 3; ++c) diff += std::pow(norm_l2(proj[c] - curl[c]), 2);
  CHECK(std::sqrt(diff) / norm_l2(curl) < 1e-12);
}

TEST_CASE("Leray projection is an orthogonal idempotent") {
  auto g = grid3();
  VectorField v = random_vector(g, 17);
  VectorField p1 = leray_project(v);
  VectorField p2 = leray_project(p1);
  double diff = 0.0, ortho = 0.0;
  for (int c = 0; c < 3; ++c) {
    diff += std::pow(norm_l2(p2[c] - p1[c]), 2);
    ortho += std::real(inner(p1[c], v[c] - p1[c]));
  }
  CHECK(std::sqrt(diff) < 1e-12 * norm_l2(v));
  CHECK(std::abs(ortho) < 1e-10);
  CHECK(norm_l2(divergence(p1)) < 1e-10);
}

TEST_CASE("grid propagation: transverse eigenmode rotates as cos") {
  auto g = grid3(16, 16.0);
  const double k = g->wavenumber(2);
  VectorField ap(g, Rep::Physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    auto idx = g->unravel(i);
    ap[2][i] = std::sin(k * g->coord(idx[0]));
  }
  GridPairData data{ap, VectorField(g, Rep::Physical)};
  const double t = 0.7;
  WaveSnapshot snap = propagate_grid(data, t);
  double worst = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i)
    worst = std::max(worst,
                     std::abs(snap.a[2][i] - std::cos(k * t) * ap[2][i]));
  CHECK(worst < 1e-12);
  CHECK(norm_l2(snap.a[0]) < 1e-12);
}

TEST_CASE("grid propagation: identity at t = 0 and energy conservation") {
  auto g = grid3();
  VectorField ap = leray_project(random_vector(g, 23));
  VectorField adp = leray_project(random_vector(g, 24));
  GridPairData data{ap, adp};

  WaveSnapshot zero = propagate_grid(data, 0.0);
  double d0 = 0.0;
  for (int c = 0; c < 3; ++c) d0 += std::pow(norm_l2(zero.a[c] - ap[c]), 2);
  CHECK(std::sqrt(d0) < 1e-12);

  auto energy = [&](const WaveSnapshot& s) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (int ax = 0; ax < 3; ++ax) {
        std::vector<int> al(3, 0);
        al[ax] = 1;
        e += std::pow(norm_l2(derivative(s.a[c], al)), 2);
      }
      e += std::pow(norm_l2(s.a_dot[c]), 2);
    }
    return e;
  };
  const double e1 = energy(propagate_grid(data, 0.5));
  const double e2 = energy(propagate_grid(data, 3.0));
  CHECK(std::abs(e1 - e2) / e1 < 1e-12);
}

TEST_CASE("grid propagation rejects nonzero-mean data") {
  auto g = grid3();
  VectorField ap(g, Rep::Physical);
  for (auto& v : ap[0].values()) v = 1.0;
  GridPairData data{ap, VectorField(g, Rep::Physical)};
  CHECK_THROWS_AS(propagate_grid(data, 1.0), NonZeroMeanError);
}

TEST_CASE("grid propagation satisfies the two-step semigroup split") {
  auto g = grid3();
  GridPairData data{leray_project(random_vector(g, 31)),
                    leray_project(random_vector(g, 32))};
  const double t1 = 0.4, t2 = 0.9;
  WaveSnapshot first = propagate_grid(data, t1);
  GridPairData mid{first.a, first.a_dot};
  WaveSnapshot second = propagate_grid(mid, t2);
  WaveSnapshot direct = propagate_grid(data, t1 + t2);
  double diff = 0.0;
  for (int c = 0; c < 3; ++c)
    diff += std::pow(norm_l2(second.a[c] - direct.a[c]), 2);
  CHECK(std::sqrt(diff) < 1e-11);
}

TEST_CASE("x . A of a divergence-free wave solution obeys the wave equation") {
  auto g = grid3(32, 32.0);
  ScalarField psi = gaussian_field(g, 1.5);
  VectorField ap = spectral_curl_axis(psi, {0.0, 0.0, 1.0});
  GridPairData data{ap, VectorField(g, Rep::Physical)};

  const double t = 2.0, dt = 1e-3;
  ScalarField xa_m = propagate_grid(data, t - dt).x_dot_a;
  WaveSnapshot mid = propagate_grid(data, t);
  ScalarField xa_p = propagate_grid(data, t + dt).x_dot_a;

  ScalarField dtt(g, Rep::Physical);
  for (std::size_t i = 0; i < g->size(); ++i)
    dtt[i] = (xa_p[i] - 2.0 * mid.x_dot_a[i] + xa_m[i]) / (dt * dt);
  ScalarField lap = laplacian(mid.x_dot_a);
  // residual = (dt^2/12) d_t^4 (x.A) + O(dt^4); d_t^4 = Delta^2 here
  const double remainder =
      dt * dt / 12.0 * norm_l2(laplacian(laplacian(mid.x_dot_a)));
  CHECK(norm_l2(dtt - lap) < 2.0 * remainder + 1e-9);
  CHECK(norm_l2(dtt - lap) < 1e-3 * norm_l2(lap));
}

TEST_CASE("analytic evaluator matches the spectral curl at t = 0") {
  auto g = grid3(64, 24.0);
  CurlGaussian cg = test_cg(1.0);
  ScalarField psi = gaussian_field(g, cg.sigma, cg.amplitude);
  VectorField oracle = spectral_curl_axis(psi, cg.axis);

  WaveData data{cg, true};
  WaveSnapshot snap = eval_analytic(data, 0.0, g);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < g->size(); ++i)
      worst = std::max(worst, std::abs(snap.a[c][i] - oracle[c][i]));
  CHECK(worst < 1e-8);
}

TEST_CASE("analytic evaluator: r -> 0 limit follows the Taylor oracle") {
  CurlGaussian cg = test_cg(1.3);
  for (double t : {0.5, 1.0, 2.7}) {
    const double origin =
        oracles::radial_dalembert_origin(t, cg.amplitude, cg.sigma);
    const double near =
        oracles::radial_dalembert(t, 0.02 * cg.sigma, cg.amplitude, cg.sigma);
    CHECK(std::abs(origin - near) < 1e-3 * std::abs(origin) + 1e-12);

    // A_y at (r, 0, 0) with axis z equals -psi_r; compare both branches
    // against a centered difference of the oracle profile.
    auto psi_r = [&](double r) {
      const double h = 1e-6;
      return (oracles::radial_dalembert(t, r + h, cg.amplitude, cg.sigma) -
              oracles::radial_dalembert(t, r - h, cg.amplitude, cg.sigma)) /
             (2.0 * h);
    };
    for (double r : {0.005 * cg.sigma, 0.02 * cg.sigma}) {
      auto v = eval_analytic_point(cg, t, {r, 0.0, 0.0});
      CHECK(std::abs(v.a[1] + psi_r(r)) < 1e-5);
      CHECK(std::abs(v.a[0]) < 1e-14);
      CHECK(std::abs(v.a[2]) < 1e-14);
    }
    // continuity across the branch switch at r = 0.01 sigma
    auto lo = eval_analytic_point(cg, t, {0.0099999 * cg.sigma, 0.0, 0.0});
    auto hi = eval_analytic_point(cg, t, {0.0100001 * cg.sigma, 0.0, 0.0});
    CHECK(std::abs(lo.a[1] - hi.a[1]) < 1e-9);
  }
}

TEST_CASE("analytic evaluator: divergence vanishes on the grid") {
  auto g = grid3(32, 24.0);
  WaveData data{test_cg(1.0), true};
  WaveSnapshot snap = eval_analytic(data, 1.5, g);
  CHECK(norm_l2(divergence(snap.a)) < 1e-6 * std::max(1.0, norm_l2(snap.a)));
  double worst = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    auto idx = g->unravel(i);
    Complex acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += g->coord(idx[c]) * snap.a[c][i];
    worst = std::max(worst, std::abs(acc - snap.x_dot_a[i]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("analytic and grid propagation agree inside the window") {
  auto g = grid3(64, 24.0);
  CurlGaussian cg = test_cg(1.0);
  WaveData data{cg, true};
  WaveSnapshot initial = eval_analytic(data, 0.0, g);
  GridPairData pair{initial.a, initial.a_dot};

  const double t = 3.0;  // window: L/2 - 6 sigma = 6
  WaveSnapshot spectral = propagate_grid(pair, t);
  WaveSnapshot analytic = eval_analytic(data, t, g);
  double diff = 0.0, ref = 0.0;
  for (int c = 0; c < 3; ++c) {
    diff += std::pow(norm_l2(spectral.a[c] - analytic.a[c]), 2);
    ref += std::pow(norm_l2(analytic.a[c]), 2);
  }
  CHECK(std::sqrt(diff) < 1e-6);
  CHECK(ref > 0.0);
}

TEST_CASE("dilation generator P against the finite-difference flow") {
  CurlGaussian cg = test_cg(0.9);
  const double t = 1.7, eps = 1e-4;
  std::array<double, 3> x{0.8, -0.4, 1.1};
  WavePointValue v = eval_analytic_point(cg, t, x);
  for (int c = 0; c < 3; ++c) {
    auto up = eval_analytic_point(
        cg, (1 + eps) * t,
        {(1 + eps) * x[0], (1 + eps) * x[1], (1 + eps) * x[2]});
    auto dn = eval_analytic_point(
        cg, (1 - eps) * t,
        {(1 - eps) * x[0], (1 - eps) * x[1], (1 - eps) * x[2]});
    const double fd = (up.a[c] - dn.a[c]) / (2.0 * eps);
    double pa = t * v.a_t[c];
    for (int ax = 0; ax < 3; ++ax) pa += x[ax] * v.grad_a[c][ax];
    CHECK(std::abs(fd - pa) < 1e-6 * std::max(1.0, std::abs(pa)));
  }
}

TEST_CASE("generator guard fires when data support touches the boundary") {
  auto g = grid3(32, 16.0);
  const double k = g->wavenumber(2);
  VectorField ap(g, Rep::Physical);
  for (std::size_t i = 0; i < g->size(); ++i) {
    auto idx = g->unravel(i);
    ap[2][i] = std::sin(k * g->coord(idx[0]));
  }
  GridPairData gp{ap, VectorField(g, Rep::Physical)};
  WaveData wdata{gp, false};
  CHECK_THROWS_AS(apply_generator_P(wdata, 0.5, g), WraparoundError);
}

TEST_CASE("P commutes with the wave propagator for grid data") {
  auto g = grid3(48, 32.0);
  ScalarField psi = gaussian_field(g, 1.5);
  VectorField ap = spectral_curl_axis(psi, {0.0, 0.0, 1.0});
  ScalarField psi2 = gaussian_field(g, 2.0, 0.5);
  VectorField adp = leray_project(spectral_curl_axis(psi2, {0.0, 1.0, 0.0}));
  WaveData data{GridPairData{ap, adp}, false};

  const double t = 2.0;
  VectorField pa_direct = apply_generator_P(data, t, g);
  GridPairData gp = data.grid_pair();
  WaveSnapshot snap = propagate_grid(gp, t);
  VectorField pa_indirect(g, Rep::Physical);
  for (int c = 0; c < 3; ++c) {
    auto grads = gradient(snap.a[c]);
    for (std::size_t i = 0; i < g->size(); ++i) {
      auto idx = g->unravel(i);
      Complex xg = 0.0;
      for (int ax = 0; ax < 3; ++ax) xg += g->coord(idx[ax]) * grads[ax][i];
      pa_indirect[c][i] = t * snap.a_dot[c][i] + xg;
    }
  }
  double diff = 0.0;
  for (int c = 0; c < 3; ++c)
    diff += std::pow(norm_l2(pa_direct[c] - pa_indirect[c]), 2);
  CHECK(std::sqrt(diff) < 1e-9);
}

TEST_CASE("moment report: curl data passes, offset data fails") {
  auto g = grid3(32, 16.0);
  WaveData curl{test_cg(0.8), true};
  MomentReport rep = check_moments(curl, g);
  CHECK(rep.pass);
  CHECK(rep.max_abs() < 1e-12);

  ScalarField psi = gaussian_field(g, 1.0);
  VectorField ap = spectral_curl_axis(psi, {0.0, 0.0, 1.0});
  for (auto& v : ap[0].values()) v += 0.25;  // constant offset
  WaveData offset{GridPairData{ap, VectorField(g, Rep::Physical)}, false};
  MomentReport rep2 = check_moments(offset, g);
  CHECK_FALSE(rep2.pass);
  const double boxvol = std::pow(16.0, 3);
  CHECK(rep2.int_a[0] == doctest::Approx(0.25 * boxvol).epsilon(1e-9));

  WaveData projected{
      GridPairData{leray_project(ap), VectorField(g, Rep::Physical)}, false};
  CHECK(check_moments(projected, g).pass);
}

TEST_CASE("decay profile fits the Lemma 2.4 rates at sigma = 1") {
  WaveData data{test_cg(1.0), true};
  std::vector<double> times;
  for (int i = 0; i < 65; ++i) times.push_back(2.0 + 8.0 * i / 64.0);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<DecayRequest> reqs{{0, {}, inf, WaveField::A, "A_inf"},
                                 {0, {}, 2.0, WaveField::A, "A_2"},
                                 {0, {}, 4.0, WaveField::A, "A_4"}};
  auto traces = decay_profile(data, reqs, times, nullptr);
  RateFit finf = fit_power_law(traces[0], 2.0, 10.0);
  RateFit f2 = fit_power_law(traces[1], 2.0, 10.0);
  RateFit f4 = fit_power_law(traces[2], 2.0, 10.0);
  CHECK(finf.exponent > -1.1);
  CHECK(finf.exponent < -0.9);
  CHECK(std::abs(f2.exponent) < 0.1);
  CHECK(f4.exponent > -0.65);
  CHECK(f4.exponent < -0.35);
}

TEST_CASE("decay profile on grid data raises outside the window") {
  auto g = grid3(32, 16.0);
  ScalarField psi = gaussian_field(g, 1.0);
  VectorField ap = spectral_curl_axis(psi, {0.0, 0.0, 1.0});
  WaveData data{GridPairData{ap, VectorField(g, Rep::Physical)}, false};
  std::vector<DecayRequest> reqs{{0, {0, 0, 0}, 2.0, WaveField::A, "A_2"}};
  CHECK_THROWS_AS(decay_profile(data, reqs, {0.5, 1.0, 6.5}, g),
                  WraparoundError);
}
