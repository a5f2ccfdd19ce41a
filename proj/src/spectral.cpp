#include "fbmlift/spectral.hpp"

#include <numbers>
#include <random>
#include <sstream>

namespace fbmlift {

double compute_c_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::domain_error("compute_c_alpha: alpha must lie in (0, 1/2)");
  const double radicand =
      -alpha / (std::cos(std::numbers::pi * alpha) * std::tgamma(-2.0 * alpha));
  if (!(radicand > 0.0))
    throw std::domain_error("compute_c_alpha: nonpositive radicand");
  return 0.5 * std::sqrt(radicand);
}

double path_amplitude(double alpha) {
  return compute_c_alpha(alpha) / std::sqrt(alpha);
}

ModelParams ModelParams::make(double alpha, double eps) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (0, 1/2)");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  return ModelParams{alpha, eps, compute_c_alpha(alpha)};
}

double spectral_weight(const ModelParams& params, double xi) {
  const double a = std::abs(xi);
  if (a == 0.0) return 0.0;
  return params.amplitude() * std::exp(-params.eps * a) *
         std::pow(a, 0.5 - params.alpha);
}

cplx exp_increment(double h, double z) {
  const double x = h * z;
  if (std::abs(x) < 1e-4) {
    // h * (e^{ix} - 1) / (ix) = h * sum_n (ix)^n / (n+1)!
    const cplx ix(0.0, x);
    return h * (1.0 + ix / 2.0 + ix * ix / 6.0 + ix * ix * ix / 24.0);
  }
  return (std::polar(1.0, x) - 1.0) / cplx(0.0, z);
}

std::string to_string(GridScheme scheme) {
  return scheme == GridScheme::linear ? "linear" : "geometric";
}

GridScheme parse_grid_scheme(const std::string& name) {
  if (name == "linear") return GridScheme::linear;
  if (name == "geometric") return GridScheme::geometric;
  throw std::invalid_argument("unknown grid scheme: " + name);
}

FrequencyGrid::FrequencyGrid(std::vector<FrequencyBin> bins, double xi_min,
                             double xi_max, GridScheme scheme)
    : bins_(std::move(bins)), xi_min_(xi_min), xi_max_(xi_max), scheme_(scheme) {}

FrequencyGrid FrequencyGrid::refined(double factor) const {
  const int n = static_cast<int>(std::lround(factor * static_cast<double>(size())));
  return build_grid(xi_max_, n, scheme_, xi_min_);
}

bool FrequencyGrid::operator==(const FrequencyGrid& other) const {
  if (size() != other.size() || scheme_ != other.scheme_) return false;
  for (std::size_t k = 0; k < size(); ++k)
    if (bins_[k].center != other.bins_[k].center ||
        bins_[k].width != other.bins_[k].width)
      return false;
  return true;
}

FrequencyGrid build_grid(double xi_max, int n_bins, GridScheme scheme,
                         double xi_min) {
  if (!(xi_max > 0.0)) throw std::invalid_argument("build_grid: xi_max must be positive");
  if (n_bins < 2) throw std::invalid_argument("build_grid: need at least 2 bins");
  std::vector<FrequencyBin> bins(static_cast<std::size_t>(n_bins));
  if (scheme == GridScheme::linear) {
    const double w = xi_max / n_bins;
    for (int k = 0; k < n_bins; ++k) bins[k] = {(k + 0.5) * w, w};
    return FrequencyGrid(std::move(bins), 0.0, xi_max, scheme);
  }
  if (!(xi_min > 0.0 && xi_min < xi_max))
    throw std::invalid_argument("build_grid: geometric grid needs 0 < xi_min < xi_max");
  const double log_ratio = std::log(xi_max / xi_min) / n_bins;
  double lo = xi_min;
  for (int k = 0; k < n_bins; ++k) {
    const double hi = k + 1 == n_bins ? xi_max : xi_min * std::exp(log_ratio * (k + 1));
    bins[k] = {0.5 * (lo + hi), hi - lo};
    lo = hi;
  }
  return FrequencyGrid(std::move(bins), xi_min, xi_max, scheme);
}

FrequencyGrid default_grid() {
  return build_grid(kDefaultXiMax, kDefaultBins, GridScheme::geometric, kDefaultXiMin);
}

SpectralNoiseField::SpectralNoiseField(const FrequencyGrid& grid, int components,
                                       std::uint64_t seed, std::vector<cplx> samples)
    : components_(components),
      bins_(grid.size()),
      seed_(seed),
      first_center_(grid.size() ? grid[0].center : 0.0),
      last_center_(grid.size() ? grid[grid.size() - 1].center : 0.0),
      samples_(std::move(samples)) {
  if (samples_.size() != bins_ * static_cast<std::size_t>(components_))
    throw std::invalid_argument("SpectralNoiseField: sample count mismatch");
}

bool SpectralNoiseField::matches(const FrequencyGrid& grid) const {
  return grid.size() == bins_ && bins_ > 0 && grid[0].center == first_center_ &&
         grid[bins_ - 1].center == last_center_;
}

SpectralNoiseField sample_noise(const FrequencyGrid& grid, int d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_noise: need d >= 1");
  const std::size_t n = grid.size();
  std::vector<cplx> samples(n * static_cast<std::size_t>(d));
  for (int c = 0; c < d; ++c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double sd = std::sqrt(0.5 * grid[k].width);
      const double re = normal(gen);
      const double im = normal(gen);
      samples[static_cast<std::size_t>(c) * n + k] = {sd * re, sd * im};
    }
  }
  return SpectralNoiseField(grid, d, seed, std::move(samples));
}

DomainPredicate DomainPredicate::all(int arity) {
  return {arity, [](std::span<const double>) { return true; }};
}

std::vector<FrequencyBin> axis_nodes(const FrequencyGrid& grid, AxisSigns signs) {
  std::vector<FrequencyBin> nodes;
  nodes.reserve(signs == AxisSigns::both ? 2 * grid.size() : grid.size());
  if (signs == AxisSigns::both)
    for (std::size_t k = grid.size(); k-- > 0;)
      nodes.push_back({-grid[k].center, grid[k].width});
  for (const auto& b : grid.bins()) nodes.push_back(b);
  return nodes;
}

namespace detail {

void throw_nonfinite(std::span<const double> node) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "quad: non-finite kernel value at node (";
  for (std::size_t k = 0; k < node.size(); ++k) msg << (k ? ", " : "") << node[k];
  msg << ")";
  throw QuadratureError(msg.str(), std::vector<double>(node.begin(), node.end()));
}

}  // namespace detail

}  // namespace fbmlift
