#include "magscatter/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>

namespace magscatter {

Grid::Grid(int dim, int n, double box_length)
    : dim_(dim), n_(n), length_(box_length) {
  if (dim < 1 || dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3");
  if (n < 2 || (n & (n - 1)) != 0)
    throw ConfigError("grid.n must be a power of two >= 2");
  if (!(box_length > 0.0)) throw ConfigError("grid.L must be positive");
  spacing_ = length_ / n_;
  size_ = 1;
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);
  wavenumbers_.resize(n_);
  coords_.resize(n_);
  const double dk = 2.0 * M_PI / length_;
  for (int m = 0; m < n_; ++m) {
    wavenumbers_[m] = dk * signed_mode(m);
    coords_[m] = coord(m);
  }
}

namespace {

// Cached in-place FFTW plans per (dim, n); FFTW_ESTIMATE keeps the algorithm
// choice independent of runtime timing so repeated runs are bitwise equal.
struct PlanEntry {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::size_t size = 0;
};

PlanEntry& plan_for(const Grid& g) {
  static std::map<std::pair<int, int>, PlanEntry> cache;
  auto key = std::make_pair(g.dim(), g.n());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  PlanEntry e;
  e.size = g.size();
  e.buf = fftw_alloc_complex(e.size);
  int dims[3] = {g.n(), g.n(), g.n()};
  e.fwd = fftw_plan_dft(g.dim(), dims, e.buf, e.buf, FFTW_FORWARD,
                        FFTW_ESTIMATE);
  e.bwd = fftw_plan_dft(g.dim(), dims, e.buf, e.buf, FFTW_BACKWARD,
                        FFTW_ESTIMATE);
  return cache.emplace(key, e).first->second;
}

// (-1)^(sum of axis indices): the phase that turns DFT output into Fourier
// coefficients of the centered box.
inline double center_phase(const Grid& g, std::size_t flat) {
  int s = 0;
  for (int a = 0; a < g.dim(); ++a) {
    s += static_cast<int>(flat % g.n());
    flat /= g.n();
  }
  return (s & 1) ? -1.0 : 1.0;
}

void run_fft(const Grid& g, std::vector<Complex>& v, int sign) {
  PlanEntry& e = plan_for(g);
  // std::complex<double> is layout-compatible with fftw_complex
  auto* raw = reinterpret_cast<double*>(v.data());
  std::memcpy(e.buf, raw, sizeof(fftw_complex) * e.size);
  fftw_execute(sign == FFTW_FORWARD ? e.fwd : e.bwd);
  std::memcpy(raw, e.buf, sizeof(fftw_complex) * e.size);
}

}  // namespace

ScalarField::ScalarField(std::shared_ptr<const Grid> grid, Rep rep)
    : grid_(std::move(grid)), values_(grid_->size(), Complex(0.0)), rep_(rep) {}

ScalarField::ScalarField(std::shared_ptr<const Grid> grid,
                         std::vector<Complex> values, Rep rep)
    : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
  if (values_.size() != grid_->size())
    throw GridMismatchError("value count does not match grid size");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (grid() != other.grid() || rep_ != other.rep_)
    throw GridMismatchError("operands differ in grid or representation");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  if (grid() != other.grid() || rep_ != other.rep_)
    throw GridMismatchError("operands differ in grid or representation");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ScalarField& ScalarField::operator*=(Complex c) {
  for (auto& v : values_) v *= c;
  return *this;
}

VectorField::VectorField(std::shared_ptr<const Grid> grid, Rep rep) {
  for (int a = 0; a < grid->dim(); ++a) components_.emplace_back(grid, rep);
}

VectorField::VectorField(std::vector<ScalarField> components)
    : components_(std::move(components)) {
  for (const auto& c : components_)
    if (c.grid() != components_.front().grid() ||
        c.rep() != components_.front().rep())
      throw GridMismatchError("vector components differ in grid or rep");
}

NormSpec NormSpec::lebesgue(double r) {
  NormSpec s;
  s.kind = Kind::Lebesgue;
  s.r = r;
  return s;
}
NormSpec NormSpec::sobolev(int k, double r) {
  NormSpec s;
  s.kind = Kind::Sobolev;
  s.k = k;
  s.r = r;
  return s;
}
NormSpec NormSpec::fractional_omega(double s_) {
  NormSpec s;
  s.kind = Kind::FractionalOmega;
  s.s = s_;
  return s;
}

ScalarField to_spectral(const ScalarField& f) {
  if (f.rep() == Rep::Spectral) return f;
  ScalarField out(f.grid_ptr(), f.values(), Rep::Spectral);
  run_fft(f.grid(), out.values(), FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(f.grid().size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= scale * center_phase(f.grid(), i);
  return out;
}

ScalarField to_physical(const ScalarField& f) {
  if (f.rep() == Rep::Physical) return f;
  ScalarField out(f.grid_ptr(), f.values(), Rep::Physical);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= center_phase(f.grid(), i);
  run_fft(f.grid(), out.values(), FFTW_BACKWARD);
  return out;
}

ScalarField transform(const ScalarField& f, Rep target) {
  return target == Rep::Spectral ? to_spectral(f) : to_physical(f);
}

VectorField transform(const VectorField& v, Rep target) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < v.dim(); ++a) comps.push_back(transform(v[a], target));
  return VectorField(std::move(comps));
}

ScalarField derivative(const ScalarField& f, const std::vector<int>& alpha) {
  const Grid& g = f.grid();
  if (static_cast<int>(alpha.size()) != g.dim())
    throw GridMismatchError("multiindex length does not match grid dimension");
  ScalarField spec = to_spectral(f);
  const int n = g.n();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    std::size_t rest = i;
    Complex mult(1.0, 0.0);
    for (int a = g.dim() - 1; a >= 0; --a) {
      const int m = static_cast<int>(rest % n);
      rest /= n;
      const int ord = alpha[a];
      if (ord == 0) continue;
      if (g.is_nyquist(m) && (ord & 1)) {
        mult = 0.0;
        break;
      }
      mult *= std::pow(Complex(0.0, g.wavenumber(m)), ord);
    }
    spec[i] *= mult;
  }
  return f.rep() == Rep::Spectral ? spec : to_physical(spec);
}

ScalarField omega_power(const ScalarField& f, double s) {
  const Grid& g = f.grid();
  ScalarField spec = to_spectral(f);
  if (s < 0.0) {
    double l2 = 0.0;
    for (const auto& c : spec.values()) l2 += std::norm(c);
    l2 = std::sqrt(l2);
    if (std::abs(spec[0]) > 1e-10 * std::max(1.0, l2))
      throw NonZeroMeanError("omega_power with s < 0 requires a vanishing zero mode");
  }
  const int n = g.n();
  for (std::size_t i = 0; i < spec.size(); ++i) {
    std::size_t rest = i;
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int m = static_cast<int>(rest % n);
      rest /= n;
      const double k = g.wavenumber(m);
      k2 += k * k;
    }
    if (k2 == 0.0) {
      spec[i] = 0.0;
    } else if (s != 0.0) {
      spec[i] *= std::pow(k2, 0.5 * s);
    }
  }
  return f.rep() == Rep::Spectral ? spec : to_physical(spec);
}

ScalarField laplacian(const ScalarField& f) {
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
    spec[i] *= -k2;
  }
  return f.rep() == Rep::Spectral ? spec : to_physical(spec);
}

std::vector<ScalarField> gradient(const ScalarField& f) {
  std::vector<ScalarField> out;
  for (int a = 0; a < f.grid().dim(); ++a) {
    std::vector<int> alpha(f.grid().dim(), 0);
    alpha[a] = 1;
    out.push_back(derivative(f, alpha));
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  std::vector<int> alpha(v.grid().dim(), 0);
  alpha[0] = 1;
  ScalarField out = derivative(v[0], alpha);
  for (int a = 1; a < v.dim(); ++a) {
    std::vector<int> al(v.grid().dim(), 0);
    al[a] = 1;
    out += derivative(v[a], al);
  }
  return out;
}

double cell_volume(const Grid& g) {
  double vol = 1.0;
  for (int a = 0; a < g.dim(); ++a) vol *= g.spacing();
  return vol;
}

namespace {

double lebesgue_norm(const ScalarField& f, double r) {
  ScalarField phys = to_physical(f);
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& v : phys.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (r < 1.0) throw ConfigError("Lebesgue exponent must satisfy r >= 1");
  const double vol = cell_volume(f.grid());
  double acc = 0.0;
  if (r == 2.0) {
    for (const auto& v : phys.values()) acc += std::norm(v);
  } else {
    for (const auto& v : phys.values()) acc += std::pow(std::abs(v), r);
  }
  return std::pow(vol * acc, 1.0 / r);
}

void multiindices(int dim, int order, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == dim) {
    if (order == 0) out.push_back(cur);
    return;
  }
  for (int o = 0; o <= order; ++o) {
    cur.push_back(o);
    multiindices(dim, order - o, cur, out);
    cur.pop_back();
  }
}

}  // namespace

double norm(const ScalarField& f, const NormSpec& spec) {
  switch (spec.kind) {
    case NormSpec::Kind::Lebesgue:
      return lebesgue_norm(f, spec.r);
    case NormSpec::Kind::Sobolev: {
      // Paper convention: sum over |alpha| <= k of Lebesgue norms.
      double acc = 0.0;
      for (int order = 0; order <= spec.k; ++order) {
        std::vector<std::vector<int>> alphas;
        std::vector<int> cur;
        multiindices(f.grid().dim(), order, cur, alphas);
        for (const auto& alpha : alphas)
          acc += lebesgue_norm(derivative(f, alpha), spec.r);
      }
      return acc;
    }
    case NormSpec::Kind::FractionalOmega: {
      ScalarField s = to_spectral(f);
      const Grid& g = f.grid();
      const int n = g.n();
      double acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t rest = i;
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
          const double k = g.wavenumber(static_cast<int>(rest % n));
          rest /= n;
          k2 += k * k;
        }
        acc += std::pow(1.0 + k2, spec.s) * std::norm(s[i]);
      }
      double boxvol = 1.0;
      for (int a = 0; a < g.dim(); ++a) boxvol *= g.length();
      return std::sqrt(boxvol * acc);
    }
  }
  return 0.0;
}

double norm_l2(const ScalarField& f) { return norm(f, NormSpec::lebesgue(2.0)); }

double norm_linf(const ScalarField& f) {
  return norm(f, NormSpec::lebesgue(std::numeric_limits<double>::infinity()));
}

double norm_l2(const VectorField& v) {
  double acc = 0.0;
  for (int a = 0; a < v.dim(); ++a) {
    double na = norm_l2(v[a]);
    acc += na * na;
  }
  return std::sqrt(acc);
}

double norm_linf(const VectorField& v) {
  VectorField phys = transform(v, Rep::Physical);
  double m = 0.0;
  for (std::size_t i = 0; i < phys[0].size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < v.dim(); ++a) s += std::norm(phys[a][i]);
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double norm(const VectorField& v, const NormSpec& spec) {
  // Pointwise Euclidean magnitude, then the scalar norm.
  VectorField phys = transform(v, Rep::Physical);
  ScalarField mag(v.grid_ptr(), Rep::Physical);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < v.dim(); ++a) s += std::norm(phys[a][i]);
    mag[i] = std::sqrt(s);
  }
  return norm(mag, spec);
}

Complex inner(const ScalarField& f, const ScalarField& g) {
  if (f.grid() != g.grid()) throw GridMismatchError("inner product grids differ");
  ScalarField fp = to_physical(f);
  ScalarField gp = to_physical(g);
  Complex acc(0.0);
  for (std::size_t i = 0; i < fp.size(); ++i) acc += std::conj(fp[i]) * gp[i];
  return acc * cell_volume(f.grid());
}

ScalarField multiply(const ScalarField& f, const ScalarField& g) {
  if (f.grid() != g.grid()) throw GridMismatchError("product grids differ");
  ScalarField fp = to_physical(f);
  ScalarField gp = to_physical(g);
  for (std::size_t i = 0; i < fp.size(); ++i) fp[i] *= gp[i];
  return fp;
}

namespace {

inline std::array<double, 3> point_at(const Grid& g, std::size_t flat) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = g.dim() - 1; a >= 0; --a) {
    x[a] = g.coord_table()[flat % g.n()];
    flat /= g.n();
  }
  return x;
}

}  // namespace

ScalarField map_with_coords(
    const ScalarField& f,
    const std::function<Complex(const std::array<double, 3>&, Complex)>& fn) {
  ScalarField phys = to_physical(f);
  for (std::size_t i = 0; i < phys.size(); ++i)
    phys[i] = fn(point_at(phys.grid(), i), phys[i]);
  return phys;
}

ScalarField sample(std::shared_ptr<const Grid> grid,
                   const std::function<Complex(const std::array<double, 3>&)>& fn) {
  ScalarField out(grid, Rep::Physical);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(point_at(*grid, i));
  return out;
}

VectorField sample_vector(
    std::shared_ptr<const Grid> grid,
    const std::function<std::array<Complex, 3>(const std::array<double, 3>&)>& fn) {
  VectorField out(grid, Rep::Physical);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    auto v = fn(point_at(*grid, i));
    for (int a = 0; a < grid->dim(); ++a) out[a][i] = v[a];
  }
  return out;
}

std::vector<Complex> evaluate_series_tensor(
    const ScalarField& f, const std::vector<std::vector<double>>& axis_points) {
  const Grid& g = f.grid();
  if (static_cast<int>(axis_points.size()) != g.dim())
    throw GridMismatchError("axis point list does not match grid dimension");
  ScalarField spec = to_spectral(f);
  const int n = g.n();

  // Contract one axis at a time with the dense evaluation matrix
  // E[p, m] = exp(i k_m x_p); cost O(dim * n_out * n^dim).
  std::vector<Complex> cur = spec.values();
  std::array<std::size_t, 3> shape{1, 1, 1};
  for (int a = 0; a < g.dim(); ++a) shape[a] = n;

  for (int axis = g.dim() - 1; axis >= 0; --axis) {
    const auto& pts = axis_points[axis];
    const std::size_t n_out = pts.size();
    std::vector<Complex> ev(n_out * n);
    for (std::size_t p = 0; p < n_out; ++p)
      for (int m = 0; m < n; ++m)
        ev[p * n + m] = std::exp(Complex(0.0, g.wavenumber(m) * pts[p]));

    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= shape[a];
    for (int a = axis + 1; a < g.dim(); ++a) inner *= shape[a];

    std::vector<Complex> next(outer * n_out * inner, Complex(0.0));
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t p = 0; p < n_out; ++p) {
        Complex* dst = next.data() + (o * n_out + p) * inner;
        const Complex* row = ev.data() + p * n;
        for (int m = 0; m < n; ++m) {
          const Complex w = row[m];
          const Complex* src = cur.data() + (o * n + m) * inner;
          for (std::size_t q = 0; q < inner; ++q) dst[q] += w * src[q];
        }
      }
    cur.swap(next);
    shape[axis] = n_out;
  }
  return cur;
}

ScalarField gaussian_field(std::shared_ptr<const Grid> grid, double sigma,
                           double amplitude, std::array<double, 3> center) {
  return sample(grid, [&](const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int a = 0; a < grid->dim(); ++a) {
      const double d = x[a] - center[a];
      r2 += d * d;
    }
    return Complex(amplitude * std::exp(-0.5 * r2 / (sigma * sigma)), 0.0);
  });
}

double support_radius(const ScalarField& f, double rel_tol) {
  ScalarField phys = to_physical(f);
  double mx = 0.0;
  for (const auto& v : phys.values()) mx = std::max(mx, std::abs(v));
  if (mx == 0.0) return 0.0;
  const double thr = rel_tol * mx;
  double rad = 0.0;
  const Grid& g = phys.grid();
  for (std::size_t i = 0; i < phys.size(); ++i) {
    if (std::abs(phys[i]) <= thr) continue;
    auto x = point_at(g, i);
    for (int a = 0; a < g.dim(); ++a) rad = std::max(rad, std::abs(x[a]));
  }
  return rad;
}

double support_radius(const VectorField& v, double rel_tol) {
  double rad = 0.0;
  for (int a = 0; a < v.dim(); ++a)
    rad = std::max(rad, support_radius(v[a], rel_tol));
  return rad;
}

}  // namespace magscatter
