#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "magscatter/analysis.hpp"
#include "oracles.hpp"

using namespace magscatter;

TEST_CASE("power-law fit is exact on exact power laws") {
  NormTrace tr;
  tr.name = "t";
  for (int i = 0; i < 20; ++i) {
    const double t = 0.01 * std::pow(100.0, i / 19.0);
    tr.add(t, 3.0 * t * t);
  }
  RateFit fit = fit_power_law(tr, 0.01, 1.0);
  CHECK(std::abs(fit.exponent - 2.0) < 1e-12);
  CHECK(std::abs(fit.log_amplitude - std::log(3.0)) < 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("power-law fit on a constant trace") {
  NormTrace tr;
  tr.name = "c";
  for (int i = 0; i < 8; ++i) tr.add(1.0 + i, 4.2);
  RateFit fit = fit_power_law(tr, 1.0, 8.0);
  CHECK(std::abs(fit.exponent) < 1e-12);
}

TEST_CASE("power-law fit on a perturbed power law stays in band") {
  NormTrace tr;
  tr.name = "p";
  for (int i = 0; i < 24; ++i) {
    const double t = 0.01 * std::pow(10.0, i / 23.0);
    tr.add(t, std::pow(t, 1.5) * (1.0 + 0.05 * std::sin(10.0 * t)));
  }
  RateFit fit = fit_power_law(tr, 0.01, 0.1);
  CHECK(fit.exponent > 1.4);
  CHECK(fit.exponent < 1.6);
}

TEST_CASE("power-law fit error paths") {
  NormTrace tr;
  tr.name = "few";
  tr.add(1.0, 1.0);
  tr.add(2.0, 2.0);
  CHECK_THROWS_AS(fit_power_law(tr, 1.0, 2.0), InsufficientSamplesError);

  NormTrace zero;
  zero.name = "z";
  for (int i = 0; i < 6; ++i) zero.add(1.0 + i, 0.0);
  CHECK_THROWS_AS(fit_power_law(zero, 1.0, 6.0), NonPositiveValueError);

  CHECK_THROWS_AS(tr.add(0.5, 1.0), ConfigError);  // non-increasing time
}

TEST_CASE("Gronwall bound is tight for the separable square-root ODE") {
  GronwallInstance inst;
  inst.alphas = {0.5};
  const double c = 0.7, y0 = 2.0;
  inst.coefficients = {[=](double) { return c; }};
  inst.y0 = y0;
  inst.t0 = 0.0;
  inst.t1 = 3.0;
  const double bound = gronwall_bound(inst, 3.0);
  CHECK(std::abs(bound - oracles::sqrt_ode(c, y0, 0.0, 3.0)) < 1e-10);
}

TEST_CASE("Gronwall bound with only a0 reduces to the classical form") {
  GronwallInstance inst;
  inst.alphas = {0.5};
  inst.coefficients = {[](double) { return 0.0; }};
  inst.a0 = [](double) { return 0.3; };
  inst.y0 = 1.7;
  inst.t0 = 0.0;
  inst.t1 = 2.0;
  CHECK(gronwall_bound(inst, 2.0) ==
        doctest::Approx(std::exp(0.6) * 1.7).epsilon(1e-10));
}

namespace {

GronwallInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GronwallInstance inst;
  const int n = 1 + static_cast<int>(3.0 * unif(rng)) % 3;
  const double a1 = 0.3 + 0.6 * unif(rng);
  inst.alphas.push_back(a1);
  for (int j = 1; j < n; ++j) inst.alphas.push_back(0.9 * a1 * unif(rng));
  for (int j = 0; j < n; ++j) {
    const double c0 = 0.2 + 2.0 * unif(rng), c1 = unif(rng),
                 w = 1.0 + 4.0 * unif(rng);
    inst.coefficients.push_back([=](double t) {
      const double s = std::sin(w * t);
      return c0 + c1 * s * s;
    });
  }
  const double b0 = unif(rng), sg = unif(rng) < 0.5 ? -1.0 : 1.0;
  inst.a0 = [=](double t) { return sg * b0 * std::cos(t); };
  inst.y0 = 2.0 * unif(rng);
  inst.t0 = 0.2 + 0.3 * unif(rng);
  inst.t1 = inst.t0 + 0.5 + unif(rng);
  return inst;
}

}  // namespace

TEST_CASE("Gronwall bound dominates the saturated ODE on random instances") {
  double worst = 1e300;
  for (std::uint64_t s = 0; s < 200; ++s) {
    GronwallInstance inst = random_instance(s);
    const double bound = gronwall_bound(inst, inst.t1);
    SaturatedSolution sol = solve_saturated_ode(inst, inst.t1);
    worst = std::min(worst, bound - std::max(sol.z, sol.y));
  }
  CHECK(worst >= -1e-9);
}

TEST_CASE("Gronwall bound is monotone in t, y0 and the coefficients") {
  for (std::uint64_t s = 0; s < 40; ++s) {
    GronwallInstance inst = random_instance(s);
    const double mid = 0.5 * (inst.t0 + inst.t1);
    CHECK(gronwall_bound(inst, inst.t1) >= gronwall_bound(inst, mid) - 1e-12);

    GronwallInstance bigger = inst;
    bigger.y0 += 0.5;
    CHECK(gronwall_bound(bigger, inst.t1) >=
          gronwall_bound(inst, inst.t1) - 1e-12);

    GronwallInstance heavier = inst;
    auto base = inst.coefficients[0];
    heavier.coefficients[0] = [base](double t) { return base(t) + 0.3; };
    CHECK(gronwall_bound(heavier, inst.t1) >=
          gronwall_bound(inst, inst.t1) - 1e-12);
  }
}

TEST_CASE("absorption bound saturates the scalar inequality") {
  // y <= 2 sqrt(y): largest feasible y is 4, bound (n=1) equals 4.
  CHECK(absorption_bound({2.0}, {0.5}) == doctest::Approx(4.0));
  CHECK(absorption_feasible_max({2.0}, {0.5}, 10.0) ==
        doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("absorption bound dominates the feasibility scan") {
  // n = 2, alpha = (1/2, 0), a = (1, 1): bound = 4 * (1 + 1) = 8;
  // the feasible maximum solves y = sqrt(y) + 1 (golden ratio squared).
  const double bound = absorption_bound({1.0, 1.0}, {0.5, 0.0});
  CHECK(bound == doctest::Approx(8.0));
  const double feas = absorption_feasible_max({1.0, 1.0}, {0.5, 0.0}, 12.0);
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  CHECK(feas == doctest::Approx(golden * golden).epsilon(1e-5));
  CHECK(feas <= bound);

  CHECK(absorption_bound({0.0, 0.0}, {0.5, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("dispersive check in one dimension against the Gaussian oracle") {
  auto g = std::make_shared<Grid>(1, 256, 128.0);
  const double sigma = 1.0;
  ScalarField f = gaussian_field(g, sigma);
  std::vector<double> times;
  for (int i = 0; i < 9; ++i) times.push_back(2.0 * std::pow(8.0, i / 8.0));
  const double inf = std::numeric_limits<double>::infinity();
  DispersiveResult res = dispersive_check(f, inf, times);

  // oracle: sup |U(t) f| = (1 + t^2/sigma^4)^(-1/4)
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double expect = std::pow(1.0 + t * t / std::pow(sigma, 4.0), -0.25);
    CHECK(res.trace.samples[i].second ==
          doctest::Approx(expect).epsilon(1e-6));
  }
  CHECK(res.fit.exponent < -0.4);
  CHECK(res.fit.exponent > -0.55);
  for (const auto& [t, ratio] : res.bound_ratio.samples) CHECK(ratio < 1.0);
}

TEST_CASE("dispersive check at r = 2 sees unitarity") {
  auto g = std::make_shared<Grid>(1, 128, 64.0);
  ScalarField f = gaussian_field(g, 1.0);
  DispersiveResult res = dispersive_check(f, 2.0, {1, 2, 3, 4, 5, 6});
  CHECK(std::abs(res.fit.exponent) < 1e-10);
}

TEST_CASE("dispersive ratio is translation invariant") {
  auto g = std::make_shared<Grid>(1, 256, 128.0);
  const double inf = std::numeric_limits<double>::infinity();
  ScalarField a = gaussian_field(g, 1.0);
  ScalarField b = gaussian_field(g, 1.0, 1.0, {7.0, 0.0, 0.0});
  DispersiveResult ra = dispersive_check(a, inf, {1, 2, 4, 8, 12});
  DispersiveResult rb = dispersive_check(b, inf, {1, 2, 4, 8, 12});
  for (std::size_t i = 0; i < ra.bound_ratio.samples.size(); ++i)
    CHECK(std::abs(ra.bound_ratio.samples[i].second -
                   rb.bound_ratio.samples[i].second) < 1e-10);
}

TEST_CASE("Sobolev ratio scan is dilation covariant") {
  auto g = std::make_shared<Grid>(3, 32, 32.0);
  std::vector<ScalarField> family;
  for (double l : {0.8, 1.0, 1.25, 1.6})
    family.push_back(gaussian_field(g, 2.0 * l));
  SobolevScanResult res = sobolev_ratio_scan(family, 1, 2, 2.0, 2.0, 2.0);
  CHECK(res.sigma == doctest::Approx(0.5));
  for (double r : res.ratios) CHECK(std::abs(r - res.ratios.front()) < 1e-6);
  CHECK(res.max_ratio <= 1.0 + 1e-12);  // interpolation inequality in L2
}

TEST_CASE("Sobolev scan: sigma = 1 with j = k, p = r gives ratio 1") {
  auto g = std::make_shared<Grid>(3, 16, 16.0);
  std::vector<ScalarField> family{gaussian_field(g, 2.0)};
  SobolevScanResult res = sobolev_ratio_scan(family, 1, 1, 2.0, 2.0, 2.0);
  CHECK(res.sigma == doctest::Approx(1.0));
  CHECK(res.max_ratio == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Sobolev scan: single mode saturates with sigma from the relation") {
  auto g = std::make_shared<Grid>(3, 16, 16.0);
  const double k = g->wavenumber(2);
  ScalarField f = sample(g, [&](const std::array<double, 3>& x) {
    return std::exp(Complex(0.0, k * x[0]));
  });
  SobolevScanResult res = sobolev_ratio_scan({f}, 0, 1, 2.0, 2.0, 2.0);
  CHECK(res.sigma == doctest::Approx(0.0));
  CHECK(res.max_ratio == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Sobolev scan rejects an inconsistent exponent relation") {
  auto g = std::make_shared<Grid>(3, 16, 16.0);
  std::vector<ScalarField> family{gaussian_field(g, 2.0)};
  // j = 1, k = 1, p = q = r = 2 forces sigma = 1; p = 4 breaks the relation.
  CHECK_THROWS_AS(sobolev_ratio_scan(family, 1, 1, 4.0, 2.0, 2.0),
                  ExponentRelationError);
}
