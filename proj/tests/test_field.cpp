#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magscatter/field.hpp"
#include "oracles.hpp"

using namespace magscatter;

namespace {

std::shared_ptr<const Grid> grid1d(int n = 64, double L = 32.0) {
  return std::make_shared<Grid>(1, n, L);
}
std::shared_ptr<const Grid> grid3d(int n = 16, double L = 16.0) {
  return std::make_shared<Grid>(3, n, L);
}

ScalarField random_field(std::shared_ptr<const Grid> g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ScalarField f(g, Rep::Physical);
  for (auto& v : f.values()) v = Complex(nd(rng), nd(rng));
  return f;
}

double rel_l2_diff(const ScalarField& a, const ScalarField& b) {
  return norm_l2(to_physical(a) - to_physical(b)) / norm_l2(a);
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid(3, 48, 32.0), ConfigError);  // not a power of two
  CHECK_THROWS_AS(Grid(3, 32, -1.0), ConfigError);
  CHECK_THROWS_AS(Grid(4, 32, 1.0), ConfigError);
  Grid g(1, 8, 8.0);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.signed_mode(4) == -4);  // Nyquist tracked explicitly
  CHECK(g.is_nyquist(4));
  CHECK(g.wavenumber(1) == doctest::Approx(2.0 * M_PI / 8.0));
}

TEST_CASE("delta field has flat spectral modulus") {
  auto g = grid1d(16, 8.0);
  ScalarField f(g, Rep::Physical);
  f[0] = 1.0;  // node at x = -L/2
  ScalarField s = to_spectral(f);
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(std::abs(s[i]) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("plane wave maps to a single coefficient") {
  auto g = grid1d(32, 16.0);
  const double k = g->wavenumber(3);
  ScalarField f = sample(g, [&](const std::array<double, 3>& x) {
    return std::exp(Complex(0.0, k * x[0]));
  });
  ScalarField s = to_spectral(f);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == 3)
      CHECK(std::abs(s[i] - 1.0) < 1e-12);
    else
      CHECK(std::abs(s[i]) < 1e-12);
  }
}

TEST_CASE("transform round trip is the identity") {
  for (auto g : {grid1d(), grid3d()}) {
    ScalarField f = random_field(g, 7);
    ScalarField rt = to_physical(to_spectral(f));
    CHECK(rel_l2_diff(rt, f) < 1e-12);
  }
}

TEST_CASE("Parseval ties physical and spectral norms") {
  auto g = grid3d();
  double boxvol = std::pow(g->length(), 3);
  for (std::uint64_t s = 0; s < 100; ++s) {
    ScalarField f = random_field(g, s);
    double phys = norm_l2(f);
    ScalarField spec = to_spectral(f);
    double acc = 0.0;
    for (const auto& c : spec.values()) acc += std::norm(c);
    CHECK(phys == doctest::Approx(std::sqrt(boxvol * acc)).epsilon(1e-12));
  }
}

TEST_CASE("derivative of a plane wave") {
  auto g = grid1d(32, 16.0);
  const double k = g->wavenumber(2);
  ScalarField f = sample(g, [&](const std::array<double, 3>& x) {
    return std::exp(Complex(0.0, k * x[0]));
  });
  ScalarField df = derivative(f, {1});
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(df[i] - Complex(0.0, k) * f[i]) < 1e-11);
}

TEST_CASE("Laplacian of a constant vanishes") {
  auto g = grid3d();
  ScalarField f(g, Rep::Physical);
  for (auto& v : f.values()) v = 3.7;
  CHECK(norm_l2(laplacian(f)) < 1e-12);
}

TEST_CASE("derivative of a sampled Gaussian matches the closed form") {
  auto g = grid1d(64, 32.0);
  const double sigma = 32.0 / 16.0;
  ScalarField f = gaussian_field(g, sigma);
  ScalarField df = derivative(f, {1});
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = g->coord(static_cast<int>(i));
    worst = std::max(worst, std::abs(df[i] - oracles::gaussian_dx(x, sigma)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("derivative commutes with transform") {
  auto g = grid3d();
  ScalarField f = random_field(g, 13);
  ScalarField a = to_spectral(derivative(f, {1, 0, 2}));
  ScalarField b = derivative(to_spectral(f), {1, 0, 2});
  CHECK(norm_l2(to_physical(a) - to_physical(b)) / norm_l2(f) < 1e-12);
}

TEST_CASE("omega acts as |k| on eigenfunctions") {
  auto g = grid1d(32, 16.0);
  const double k = g->wavenumber(4);
  ScalarField f = sample(g, [&](const std::array<double, 3>& x) {
    return Complex(std::sin(k * x[0]), 0.0);
  });
  ScalarField wf = omega_power(f, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(wf[i] - k * f[i]) < 1e-11);
}

TEST_CASE("omega^0 is the identity on mean-zero fields") {
  auto g = grid1d();
  ScalarField f = random_field(g, 3);
  ScalarField s = to_spectral(f);
  s[0] = 0.0;
  f = to_physical(s);
  CHECK(rel_l2_diff(omega_power(f, 0.0), f) < 1e-12);
}

TEST_CASE("omega^{-2} inverts the Laplacian on mean-zero fields") {
  auto g = grid3d();
  ScalarField f = random_field(g, 11);
  ScalarField s = to_spectral(f);
  s[0] = 0.0;
  f = to_physical(s);
  ScalarField back = laplacian(omega_power(f, -2.0));
  back *= Complex(-1.0, 0.0);
  CHECK(rel_l2_diff(back, f) < 1e-10);
}

TEST_CASE("omega with negative power rejects nonzero mean") {
  auto g = grid1d();
  ScalarField f(g, Rep::Physical);
  for (auto& v : f.values()) v = 1.0;
  CHECK_THROWS_AS(omega_power(f, -1.0), NonZeroMeanError);
}

TEST_CASE("omega power pair is the identity on mean-zero fields") {
  auto g = grid3d();
  ScalarField f = random_field(g, 29);
  ScalarField s = to_spectral(f);
  s[0] = 0.0;
  f = to_physical(s);
  for (double p : {0.5, 1.0, 1.7}) {
    ScalarField rt = omega_power(omega_power(f, p), -p);
    CHECK(rel_l2_diff(rt, f) < 1e-10);
  }
}

TEST_CASE("norms: constant field and Gaussian") {
  auto g = grid3d(16, 8.0);
  ScalarField one(g, Rep::Physical);
  for (auto& v : one.values()) v = 1.0;
  CHECK(norm_l2(one) == doctest::Approx(std::pow(8.0, 1.5)).epsilon(1e-12));

  auto g2 = std::make_shared<Grid>(3, 32, 16.0);
  const double sigma = 16.0 / 12.0;
  ScalarField f = gaussian_field(g2, sigma);
  CHECK(std::abs(norm_l2(f) - oracles::gaussian_l2(sigma, 3)) < 1e-8);
}

TEST_CASE("H1 norm of a plane wave follows the sum-over-alpha definition") {
  auto g = grid3d(16, 16.0);
  const double k1 = g->wavenumber(2), k2 = g->wavenumber(1);
  ScalarField f = sample(g, [&](const std::array<double, 3>& x) {
    return std::exp(Complex(0.0, k1 * x[0] + k2 * x[1]));
  });
  const double expect = (1.0 + k1 + k2) * std::pow(16.0, 1.5);
  CHECK(norm(f, NormSpec::sobolev(1, 2.0)) ==
        doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("series evaluation reproduces grid samples") {
  auto g = grid1d(32, 8.0);
  ScalarField f = random_field(g, 41);
  std::vector<double> pts;
  for (int i = 0; i < g->n(); ++i) pts.push_back(g->coord(i));
  auto vals = evaluate_series_tensor(f, {pts});
  double worst = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    worst = std::max(worst, std::abs(vals[i] - f[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("support radius sees a shifted bump") {
  auto g = grid1d(64, 32.0);
  ScalarField f = gaussian_field(g, 0.5, 1.0, {5.0, 0.0, 0.0});
  const double r = support_radius(f);
  CHECK(r > 5.0);
  CHECK(r < 9.0);
}
