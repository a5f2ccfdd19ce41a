#include "fbmlift/levy_area.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmlift {

namespace {

constexpr double kTaylorSwitch = 1e-4;

const cplx I1(0.0, 1.0);

// M_k = int_0^h e^{i v z} v^k dv for k = 1..4.
void moments(double h, double z, cplx out[5]) {
  const double x = h * z;
  if (std::abs(x) < 1.0) {
    for (int k = 1; k <= 4; ++k) {
      // sum_m (i z)^m h^{m+k+1} / (m! (m+k+1))
      cplx term = std::pow(h, k + 1);  // (i x)^m h^{k+1} / m!
      cplx sum = term / double(k + 1);
      for (int m = 1; m < 40; ++m) {
        term *= cplx(0.0, x) / double(m);
        const cplx add = term / double(m + k + 1);
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
      }
      out[k] = sum;
    }
    return;
  }
  const cplx e = std::polar(1.0, x);
  const cplx iz(0.0, z);
  cplx prev = (e - 1.0) / iz;
  double hk = 1.0;
  for (int k = 1; k <= 4; ++k) {
    hk *= h;
    prev = (hk * e - double(k) * prev) / iz;
    out[k] = prev;
  }
}

void require_distinct(const SpectralNoiseField& noise, const FrequencyGrid& grid,
                      int i1, int i2) {
  if (!noise.matches(grid)) throw std::invalid_argument("noise drawn on a different grid");
  if (i1 == i2)
    throw std::invalid_argument("order-2 area needs distinct components (use (dB)^2/2 on the diagonal)");
  if (i1 < 0 || i2 < 0 || i1 >= noise.components() || i2 >= noise.components())
    throw std::invalid_argument("component index out of range for noise field");
}

// Weighted noise y(xi) = phi(|xi|) Z(|xi|), mirrored by conjugation, on the
// signed axis in summation order.
std::vector<cplx> signed_noise(const ModelParams& params, const FrequencyGrid& grid,
                               const SpectralNoiseField& noise, int c) {
  const std::size_t n = grid.size();
  std::vector<cplx> y(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx v = spectral_weight(params, grid[k].center) * noise.at(c, k);
    y[n - 1 - k] = std::conj(v);
    y[n + k] = v;
  }
  return y;
}

double area_sum(AreaKind kind, const ModelParams& params, double c_reg,
                const FrequencyGrid& grid, const SpectralNoiseField& noise,
                double s, double t, int i1, int i2) {
  require_distinct(noise, grid, i1, i2);
  if (kind != AreaKind::raw && !(c_reg > 0.0 && c_reg < 1.0))
    throw std::invalid_argument("c_reg must lie in (0, 1)");
  const auto nodes = axis_nodes(grid, AxisSigns::both);
  const auto y1 = signed_noise(params, grid, noise, i1);
  const std::size_t n = grid.size();
  // Realness: the (xi1, xi2) and (-xi1, -xi2) terms are conjugate, so the
  // full double sum is twice the real part of the sum over xi2 > 0.
  auto partial = [&](std::size_t k2) -> cplx {
    const double xi2 = grid[k2].center;
    const cplx y2 = spectral_weight(params, xi2) * noise.at(i2, k2);
    cplx acc{};
    for (std::size_t j = 0; j < nodes.size(); ++j)
      acc += y1[j] * area_kernel(kind, c_reg, t, s, nodes[j].center, xi2);
    return y2 * acc;
  };
  const cplx total = detail::ordered_sum<cplx>(n, partial, 1);
  return 2.0 * total.real();
}

AreaSample make_sample(double v, AreaKind kind, double s, double t, int i1, int i2) {
  return AreaSample{v, i1, i2, s, t, kind};
}

}  // namespace

cplx kernel_I(double t, double s, double xi1, double xi2) {
  const double h = t - s;
  const double sigma = xi1 + xi2;
  cplx j;
  if (std::abs(h * xi2) >= kTaylorSwitch) {
    j = (exp_increment(h, sigma) - exp_increment(h, xi1)) / cplx(0.0, xi2);
  } else {
    // Expand e^{i w xi2} in the inner integral.
    cplx m[5];
    moments(h, xi1, m);
    const cplx z(0.0, xi2);
    j = m[1] + z * m[2] / 2.0 + z * z * m[3] / 6.0 + z * z * z * m[4] / 24.0;
  }
  return std::polar(1.0, s * sigma) * j;
}

cplx kernel_G(KernelSign sign, double u, double xi_outer, double xi_inner) {
  if (xi_inner == 0.0)
    throw SingularityError("kernel_G: pole at xi_inner = 0", "xi_inner");
  const double sum = xi_outer + xi_inner;
  if (sum == 0.0)
    throw SingularityError("kernel_G: pole at xi_outer + xi_inner = 0", "xi_outer+xi_inner");
  const cplx v = std::polar(1.0, u * sum) / (cplx(0.0, sum) * cplx(0.0, xi_inner));
  return sign == KernelSign::plus ? v : -v;
}

cplx kernel_boundary(KernelSign sign, double t, double s, double xi1, double xi2) {
  const double h = t - s;
  if (sign == KernelSign::plus) {
    if (xi2 == 0.0) throw SingularityError("kernel_boundary(+): pole at xi2 = 0", "xi2");
    const cplx inc = std::polar(1.0, s * xi1) * exp_increment(h, xi1);
    return -(std::polar(1.0, s * xi2) / cplx(0.0, xi2)) * inc;
  }
  if (xi1 == 0.0) throw SingularityError("kernel_boundary(-): pole at xi1 = 0", "xi1");
  const cplx inc = std::polar(1.0, s * xi2) * exp_increment(h, xi2);
  return (std::polar(1.0, t * xi1) / cplx(0.0, xi1)) * inc;
}

cplx kernel_G_increment(KernelSign sign, double t, double s, double xi1, double xi2) {
  const double sigma = xi1 + xi2;
  const cplx e = std::polar(1.0, s * sigma) * exp_increment(t - s, sigma);
  if (sign == KernelSign::plus) {
    if (xi2 == 0.0) throw SingularityError("G increment(+): pole at xi2 = 0", "xi2");
    return e / cplx(0.0, xi2);
  }
  if (xi1 == 0.0) throw SingularityError("G increment(-): pole at xi1 = 0", "xi1");
  return -e / cplx(0.0, xi1);
}

KernelSign half_of(double xi1, double xi2) {
  return std::abs(xi1) <= std::abs(xi2) ? KernelSign::plus : KernelSign::minus;
}

bool in_cut_domain_2(double xi1, double xi2, double c_reg) {
  return std::abs(xi1) <= std::abs(xi2) && std::abs(xi1 + xi2) > c_reg * std::abs(xi2);
}

bool in_cut_domain_any_half(double xi1, double xi2, double c_reg) {
  return std::abs(xi1 + xi2) > c_reg * std::max(std::abs(xi1), std::abs(xi2));
}

cplx area_kernel(AreaKind kind, double c_reg, double t, double s, double xi1,
                 double xi2) {
  if (kind == AreaKind::raw) return kernel_I(t, s, xi1, xi2);
  const KernelSign half = half_of(xi1, xi2);
  const bool kept = in_cut_domain_any_half(xi1, xi2, c_reg);
  if (kind == AreaKind::counterterm)
    return kept ? cplx{} : -kernel_G_increment(half, t, s, xi1, xi2);
  cplx v = kernel_boundary(half, t, s, xi1, xi2);
  if (kept) v += kernel_G_increment(half, t, s, xi1, xi2);
  return v;
}

AreaSample area_raw(const ModelParams& params, const FrequencyGrid& grid,
                    const SpectralNoiseField& noise, double s, double t, int i1,
                    int i2) {
  return make_sample(area_sum(AreaKind::raw, params, 0.5, grid, noise, s, t, i1, i2),
                     AreaKind::raw, s, t, i1, i2);
}

AreaSample area_regularized(const ModelParams& params, double c_reg,
                            const FrequencyGrid& grid,
                            const SpectralNoiseField& noise, double s, double t,
                            int i1, int i2) {
  return make_sample(
      area_sum(AreaKind::regularized, params, c_reg, grid, noise, s, t, i1, i2),
      AreaKind::regularized, s, t, i1, i2);
}

AreaSample counterterm_sample(const ModelParams& params, double c_reg,
                              const FrequencyGrid& grid,
                              const SpectralNoiseField& noise, double s, double t,
                              int i1, int i2) {
  return make_sample(
      area_sum(AreaKind::counterterm, params, c_reg, grid, noise, s, t, i1, i2),
      AreaKind::counterterm, s, t, i1, i2);
}

double path_increment(const ModelParams& params, const FrequencyGrid& grid,
                      const SpectralNoiseField& noise, double s, double t, int i) {
  if (!noise.matches(grid)) throw std::invalid_argument("noise drawn on a different grid");
  cplx acc{};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double xi = grid[k].center;
    acc += spectral_weight(params, xi) * noise.at(i, k) * std::polar(1.0, s * xi) *
           exp_increment(t - s, xi);
  }
  return 2.0 * acc.real();
}

double variance_area_regularized(const ModelParams& params, double c_reg,
                                 const FrequencyGrid& grid, double s, double t) {
  auto kernel = [&](std::span<const double> xi) -> cplx {
    const double p = spectral_weight(params, xi[0]) * spectral_weight(params, xi[1]);
    return p * p * std::norm(area_kernel(AreaKind::regularized, c_reg, t, s, xi[0], xi[1]));
  };
  QuadOptions opt{{AxisSigns::both, AxisSigns::positive}, false, 1};
  return 2.0 * quad(kernel, DomainPredicate::all(2), grid, 2, opt).real();
}

double variance_increment(const ModelParams& params, const FrequencyGrid& grid,
                          double s, double t, std::optional<double> c_reg) {
  const double h = t - s;
  // Node (sigma, xi2) with xi1 = sigma - xi2; unit Jacobian.
  auto kernel = [&](std::span<const double> node) -> cplx {
    const double sigma = node[0];
    const double xi2 = node[1];
    const double xi1 = sigma - xi2;
    const double p = spectral_weight(params, xi1) * spectral_weight(params, xi2);
    if (p == 0.0) return 0.0;
    const bool plus = std::abs(xi1) <= std::abs(xi2);
    const double pole = plus ? xi2 : xi1;
    if (c_reg && !(std::abs(sigma) > *c_reg * std::abs(pole))) return 0.0;
    return p * p * std::norm(exp_increment(h, sigma)) / (pole * pole);
  };
  QuadOptions opt{{AxisSigns::both, AxisSigns::positive}, false, 1};
  return 2.0 * quad(kernel, DomainPredicate::all(2), grid, 2, opt).real();
}

double variance_rate(double alpha, double eps, double eta, double c_reg,
                     const FrequencyGrid& grid, double s, double t) {
  if (!(eps > 0.0 && eta > 0.0)) throw std::invalid_argument("variance_rate: eps, eta must be positive");
  const ModelParams pe = ModelParams::make(alpha, eps);
  const ModelParams pn = ModelParams::make(alpha, eta);
  auto kernel = [&](std::span<const double> xi) -> cplx {
    const double d = spectral_weight(pe, xi[0]) * spectral_weight(pe, xi[1]) -
                     spectral_weight(pn, xi[0]) * spectral_weight(pn, xi[1]);
    return d * d * std::norm(area_kernel(AreaKind::regularized, c_reg, t, s, xi[0], xi[1]));
  };
  QuadOptions opt{{AxisSigns::both, AxisSigns::positive}, false, 1};
  return 2.0 * quad(kernel, DomainPredicate::all(2), grid, 2, opt).real();
}

double variance_boundary(const ModelParams& params, KernelSign sign,
                         const FrequencyGrid& grid, double s, double t) {
  DomainPredicate half{2, [sign](std::span<const double> xi) {
                         return half_of(xi[0], xi[1]) == sign;
                       }};
  auto kernel = [&](std::span<const double> xi) -> cplx {
    const double p = spectral_weight(params, xi[0]) * spectral_weight(params, xi[1]);
    return p * p * std::norm(kernel_boundary(sign, t, s, xi[0], xi[1]));
  };
  QuadOptions opt{{AxisSigns::both, AxisSigns::positive}, false, 1};
  return 2.0 * quad(kernel, half, grid, 2, opt).real();
}

double boundary_coefficient_variance(const ModelParams& params,
                                     const FrequencyGrid& grid, double xi) {
  if (xi == 0.0) throw SingularityError("coefficient variance: pole at xi = 0", "xi");
  const double a = std::abs(xi);
  DomainPredicate above{1, [a](std::span<const double> x) { return x[0] >= a; }};
  auto kernel = [&](std::span<const double> x) -> cplx {
    const double p = spectral_weight(params, x[0]);
    return p * p / (x[0] * x[0]);
  };
  const double tail = 2.0 * quad(kernel, above, grid, 1).real();
  const double p = spectral_weight(params, xi);
  return p * p / (xi * xi) * tail;
}

}  // namespace fbmlift
