#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fbmlift/spectral.hpp"

namespace fbmlift {

struct PathSample {
  std::vector<double> times;
  // values[c][k] is component c at times[k].
  std::vector<std::vector<double>> values;
  ModelParams params;
  std::uint64_t seed = 0;
};

// B^eps_t = 2 Re sum_k phi(xi_k) Z_k (e^{i t xi_k} - 1) / (i xi_k), per component.
PathSample sample_path(const ModelParams& params, const FrequencyGrid& grid,
                       std::span<const double> times,
                       const SpectralNoiseField& noise);

// 1/2 (|s|^{2a} + |t|^{2a} - |t - s|^{2a}), alpha in (0, 1].
double covariance_exact(double s, double t, double alpha);

// E[B^eps_s B^eps_t] by quadrature of the spectral integrand on `grid`.
double covariance_eps(double s, double t, const ModelParams& params,
                      const FrequencyGrid& grid);

}  // namespace fbmlift
