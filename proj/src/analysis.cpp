#include "magscatter/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "magscatter/pctransform.hpp"

namespace magscatter {

void NormTrace::add(double t, double value) {
  if (!samples.empty() && t <= samples.back().first)
    throw ConfigError("trace times must be strictly increasing");
  if (!std::isfinite(value) || value < 0.0)
    throw NonPositiveValueError("trace values must be finite and nonnegative");
  samples.emplace_back(t, value);
}

RateFit fit_power_law(const NormTrace& trace, double t_min, double t_max) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, v] : trace.samples) {
    if (t < t_min || t > t_max) continue;
    if (!(v > 0.0))
      throw NonPositiveValueError("power-law fit needs positive values in window");
    pts.emplace_back(std::log(t), std::log(v));
  }
  if (pts.size() < 5)
    throw InsufficientSamplesError("power-law fit needs at least 5 samples in window");

  double sx = 0, sy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(pts.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.log_amplitude = my - fit.exponent * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.t_min = t_min;
  fit.t_max = t_max;
  return fit;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double fa, double m, double fm, double b, double fb,
                        double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, fa, m, fm, b, fb, whole, tol, 48);
}

namespace {

void validate_instance(const GronwallInstance& inst) {
  if (inst.alphas.empty() || inst.alphas.size() != inst.coefficients.size())
    throw ConfigError("Gronwall instance needs matching alphas and coefficients");
  const double a1 = inst.alphas.front();
  if (!(a1 >= 0.0 && a1 < 1.0))
    throw ConfigError("Gronwall exponents must lie in [0, 1)");
  for (std::size_t j = 1; j < inst.alphas.size(); ++j)
    if (!(inst.alphas[j] >= 0.0 && inst.alphas[j] < a1))
      throw ConfigError("alpha_1 must strictly dominate the other exponents");
  if (inst.y0 < 0.0) throw ConfigError("y0 must be nonnegative");
}

}  // namespace

double gronwall_bound(const GronwallInstance& inst, double t) {
  validate_instance(inst);
  const double a1 = inst.alphas.front();
  const double A0 =
      inst.a0 ? std::abs(integrate_adaptive(inst.a0, inst.t0, t)) : 0.0;
  double brace = std::pow(inst.y0, 1.0 - a1);
  for (std::size_t j = 0; j < inst.alphas.size(); ++j) {
    const double aj = inst.alphas[j];
    const double Aj =
        (1.0 - aj) * std::abs(integrate_adaptive(inst.coefficients[j], inst.t0, t));
    brace += std::pow(Aj, (1.0 - a1) / (1.0 - aj));
  }
  return std::exp(A0) * std::pow(brace, 1.0 / (1.0 - a1));
}

SaturatedSolution solve_saturated_ode(const GronwallInstance& inst, double t,
                                      int steps) {
  validate_instance(inst);
  const double dt = (t - inst.t0) / steps;

  // State: (z, y, A0). Fractional powers clamp at zero from below.
  auto pw = [](double v, double a) { return v <= 0.0 ? 0.0 : std::pow(v, a); };
  auto rhs = [&](double s, double z, double y, double A0, double& dz,
                 double& dy, double& dA0) {
    const double a0s = inst.a0 ? inst.a0(s) : 0.0;
    dA0 = std::abs(a0s);
    dz = 0.0;
    dy = a0s * y;
    for (std::size_t j = 0; j < inst.alphas.size(); ++j) {
      const double aj = inst.alphas[j];
      const double cj = inst.coefficients[j](s);
      dz += cj * std::exp((aj - 1.0) * A0) * pw(z, aj);
      dy += cj * pw(y, aj);
    }
  };

  double z = inst.y0, y = inst.y0, A0 = 0.0, s = inst.t0;
  for (int i = 0; i < steps; ++i) {
    double k1z, k1y, k1a, k2z, k2y, k2a, k3z, k3y, k3a, k4z, k4y, k4a;
    rhs(s, z, y, A0, k1z, k1y, k1a);
    rhs(s + 0.5 * dt, z + 0.5 * dt * k1z, y + 0.5 * dt * k1y,
        A0 + 0.5 * dt * k1a, k2z, k2y, k2a);
    rhs(s + 0.5 * dt, z + 0.5 * dt * k2z, y + 0.5 * dt * k2y,
        A0 + 0.5 * dt * k2a, k3z, k3y, k3a);
    rhs(s + dt, z + dt * k3z, y + dt * k3y, A0 + dt * k3a, k4z, k4y, k4a);
    z += dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
    y += dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    A0 += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    s += dt;
  }
  return SaturatedSolution{z, y, std::exp(A0)};
}

double absorption_bound(const std::vector<double>& a,
                        const std::vector<double>& alphas) {
  if (a.size() != alphas.size() || a.empty())
    throw ConfigError("absorption bound needs matching a and alpha lists");
  const double n = static_cast<double>(a.size());
  double c = 0.0, sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!(alphas[j] >= 0.0 && alphas[j] < 1.0))
      throw ConfigError("absorption exponents must lie in [0, 1)");
    c = std::max(c, std::pow(n, 1.0 / (1.0 - alphas[j])));
    sum += std::pow(a[j], 1.0 / (1.0 - alphas[j]));
  }
  return c * sum;
}

double absorption_feasible_max(const std::vector<double>& a,
                               const std::vector<double>& alphas,
                               double y_max, int points) {
  double best = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double y = y_max * i / points;
    double rhs = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
      rhs += a[j] * std::pow(y, alphas[j]);
    if (y <= rhs) best = std::max(best, y);
  }
  return best;
}

DispersiveResult dispersive_check(const ScalarField& f, double r,
                                  const std::vector<double>& times) {
  if (!(r >= 2.0))
    throw ConfigError("dispersive check needs r >= 2");
  const int dim = f.grid().dim();
  const double delta = std::isinf(r) ? 0.5 * dim : 0.5 * dim - dim / r;
  const double rbar = std::isinf(r) ? 1.0 : r / (r - 1.0);
  const double f_dual = norm(f, NormSpec::lebesgue(rbar));

  DispersiveResult res;
  res.trace.name = "dispersive_r" + (std::isinf(r) ? std::string("inf")
                                                   : std::to_string(r));
  res.bound_ratio.name = res.trace.name + "_ratio";
  for (double t : times) {
    ScalarField ut = free_prop_U(f, t);
    // Periodic images corrupt the measured sup by roughly the fourth power of
    // the boundary-to-peak ratio; 0.45 keeps that under one percent.
    check_boundary_tail(ut, 0.45);
    const double val = norm(ut, NormSpec::lebesgue(r));
    const double bound = std::pow(2.0 * M_PI * std::abs(t), -delta) * f_dual;
    res.trace.add(t, val);
    res.bound_ratio.add(t, val / bound);
  }
  res.fit = fit_power_law(res.trace, times.front(), times.back());
  return res;
}

SobolevScanResult sobolev_ratio_scan(const std::vector<ScalarField>& family,
                                     int j, int k, double p, double q,
                                     double r) {
  if (family.empty()) throw ConfigError("sobolev scan needs a nonempty family");
  const double n = family.front().grid().dim();
  auto inv = [](double e) { return std::isinf(e) ? 0.0 : 1.0 / e; };
  const double denom = n * inv(r) - k - n * inv(q);
  if (std::abs(denom) < 1e-14)
    throw ExponentRelationError("exponent relation is degenerate for these (q, r, k)");
  const double sigma = (n * inv(p) - j - n * inv(q)) / denom;
  const double lhs = n * inv(p) - j;
  const double rhs = (1.0 - sigma) * n * inv(q) + sigma * (n * inv(r) - k);
  if (std::abs(lhs - rhs) > 1e-12)
    throw ExponentRelationError("exponent relation not satisfied");
  if (sigma < static_cast<double>(j) / k - 1e-12 || sigma > 1.0 + 1e-12)
    throw ExponentRelationError("sigma outside [j/k, 1]");

  SobolevScanResult out;
  out.sigma = sigma;
  for (const auto& u : family) {
    // omega^0 is the identity (the spectral multiplier would zero the mean)
    const double num = j == 0 ? norm(u, NormSpec::lebesgue(p))
                              : norm(omega_power(u, j), NormSpec::lebesgue(p));
    const double den = std::pow(norm(u, NormSpec::lebesgue(q)), 1.0 - sigma) *
                       std::pow(norm(omega_power(u, k), NormSpec::lebesgue(r)),
                                sigma);
    const double ratio = num / den;
    out.ratios.push_back(ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

}  // namespace magscatter
