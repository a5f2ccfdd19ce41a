#include "fbmlift/fbm.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmlift {

PathSample sample_path(const ModelParams& params, const FrequencyGrid& grid,
                       std::span<const double> times,
                       const SpectralNoiseField& noise) {
  if (!(params.eps > 0.0)) throw std::invalid_argument("sample_path: eps must be positive");
  if (!noise.matches(grid)) throw std::invalid_argument("sample_path: noise drawn on a different grid");
  PathSample out;
  out.times.assign(times.begin(), times.end());
  out.params = params;
  out.seed = noise.seed();

  std::vector<double> phi(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) phi[k] = spectral_weight(params, grid[k].center);

  for (int c = 0; c < noise.components(); ++c) {
    const auto z = noise.component(c);
    std::vector<double> vals;
    vals.reserve(times.size());
    for (double t : times) {
      if (t == 0.0) {
        vals.push_back(0.0);
        continue;
      }
      cplx acc{};
      for (std::size_t k = 0; k < grid.size(); ++k)
        acc += phi[k] * z[k] * exp_increment(t, grid[k].center);
      vals.push_back(2.0 * acc.real());
    }
    out.values.push_back(std::move(vals));
  }
  return out;
}

double covariance_exact(double s, double t, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("covariance_exact: alpha must lie in (0, 1]");
  const double p = 2.0 * alpha;
  auto pw = [p](double x) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), p); };
  return 0.5 * (pw(s) + pw(t) - pw(t - s));
}

double covariance_eps(double s, double t, const ModelParams& params,
                      const FrequencyGrid& grid) {
  // 2 |phi|^2 Re(f_s conj f_t) with f_u = (e^{iu xi} - 1)/(i xi); written with
  // half-angle sines so that small xi does not cancel.
  auto kernel = [&](std::span<const double> xi) -> cplx {
    const double x = xi[0];
    const double phi = spectral_weight(params, x);
    auto hs = [x](double u) {
      const double v = std::sin(0.5 * u * x);
      return 2.0 * v * v;
    };
    const double re = (hs(s) + hs(t) - hs(t - s)) / (x * x);
    return 2.0 * phi * phi * re;
  };
  return quad(kernel, DomainPredicate::all(1), grid, 1).real();
}

}  // namespace fbmlift
