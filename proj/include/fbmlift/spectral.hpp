#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fbmlift {

using cplx = std::complex<double>;

// Raised when a closed-form kernel is evaluated on one of its poles.
class SingularityError : public std::domain_error {
 public:
  SingularityError(const std::string& what, std::string denominator)
      : std::domain_error(what), denominator_(std::move(denominator)) {}
  const std::string& denominator() const { return denominator_; }

 private:
  std::string denominator_;
};

// Raised by quad when the kernel is not finite at an accepted node.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, std::vector<double> node)
      : std::runtime_error(what), node_(std::move(node)) {}
  const std::vector<double>& node() const { return node_; }

 private:
  std::vector<double> node_;
};

// Normalization constant 1/2 sqrt(-alpha / (cos(pi alpha) Gamma(-2 alpha))).
double compute_c_alpha(double alpha);

// Amplitude multiplying the spectral weight of the sampled path. With the
// noise normalized to E|Z|^2 = bin width, c_alpha alone gives E B_1^2 = alpha;
// dividing by sqrt(alpha) restores E B_1^2 = 1.
double path_amplitude(double alpha);

struct ModelParams {
  double alpha = 0.25;
  double eps = 0.0;
  double c_alpha = 0.0;

  // Validates 0 < alpha < 1/2 and eps >= 0, fills c_alpha.
  static ModelParams make(double alpha, double eps);

  double amplitude() const { return path_amplitude(alpha); }
};

// phi(xi) = amplitude * exp(-eps |xi|) * |xi|^(1/2 - alpha); even in xi.
double spectral_weight(const ModelParams& params, double xi);

// (exp(i h z) - 1) / (i z), with a Taylor branch for |h z| < 1e-4.
cplx exp_increment(double h, double z);

enum class GridScheme { linear, geometric };

std::string to_string(GridScheme scheme);
GridScheme parse_grid_scheme(const std::string& name);

struct FrequencyBin {
  double center;
  double width;
};

class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  FrequencyGrid(std::vector<FrequencyBin> bins, double xi_min, double xi_max,
                GridScheme scheme);

  std::span<const FrequencyBin> bins() const { return bins_; }
  const FrequencyBin& operator[](std::size_t k) const { return bins_[k]; }
  std::size_t size() const { return bins_.size(); }
  double xi_min() const { return xi_min_; }
  double xi_max() const { return xi_max_; }
  GridScheme scheme() const { return scheme_; }

  // Same range and scheme with round(factor * size()) bins.
  FrequencyGrid refined(double factor) const;

  bool operator==(const FrequencyGrid& other) const;

 private:
  std::vector<FrequencyBin> bins_;
  double xi_min_ = 0.0;
  double xi_max_ = 0.0;
  GridScheme scheme_ = GridScheme::linear;
};

inline constexpr double kDefaultXiMin = 1e-4;
inline constexpr double kDefaultXiMax = 1e4;
inline constexpr int kDefaultBins = 2048;

// Linear grids cover (0, xi_max]; geometric grids cover (xi_min, xi_max] with
// centers at the arithmetic midpoint of each bin.
FrequencyGrid build_grid(double xi_max, int n_bins, GridScheme scheme,
                         double xi_min = kDefaultXiMin);
FrequencyGrid default_grid();

class SpectralNoiseField {
 public:
  SpectralNoiseField(const FrequencyGrid& grid, int components,
                     std::uint64_t seed, std::vector<cplx> samples);

  int components() const { return components_; }
  std::size_t bins() const { return bins_; }
  std::uint64_t seed() const { return seed_; }
  cplx at(int component, std::size_t bin) const {
    return samples_[static_cast<std::size_t>(component) * bins_ + bin];
  }
  std::span<const cplx> component(int c) const {
    return {samples_.data() + static_cast<std::size_t>(c) * bins_, bins_};
  }
  // True when the field was drawn on a grid with the same bins.
  bool matches(const FrequencyGrid& grid) const;

 private:
  int components_;
  std::size_t bins_;
  std::uint64_t seed_;
  double first_center_;
  double last_center_;
  std::vector<cplx> samples_;
};

// Component c uses its own stream seeded from (seed, c), so adding components
// leaves earlier ones unchanged.
SpectralNoiseField sample_noise(const FrequencyGrid& grid, int d,
                                std::uint64_t seed);

struct DomainPredicate {
  int arity = 1;
  std::function<bool(std::span<const double>)> accepts;

  bool operator()(std::span<const double> xi) const { return accepts(xi); }
  static DomainPredicate all(int arity);
};

enum class AxisSigns { positive, both };

struct QuadOptions {
  // One entry per axis; empty means all positive.
  std::vector<AxisSigns> signs;
  // Return 2 Re of the sum (realness convention).
  bool twice_real_part = false;
  unsigned threads = 1;
};

// Nodes of one axis in summation order: for AxisSigns::both the negative
// frequencies come first, in ascending order.
std::vector<FrequencyBin> axis_nodes(const FrequencyGrid& grid, AxisSigns signs);

namespace detail {

// Sums partial(i) for i in [0, n) in index order. Partials may be computed on
// several threads; the reduction order never changes, so the result is
// bitwise independent of the thread count.
template <class T, class F>
T ordered_sum(std::size_t n, F&& partial, unsigned threads) {
  std::vector<T> parts(n, T{});
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) parts[i] = partial(i);
  } else {
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    const unsigned nt = std::min<std::size_t>(threads, n);
    for (unsigned w = 0; w < nt; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += nt) {
          try {
            parts[i] = partial(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  T total{};
  for (const T& p : parts) total += p;
  return total;
}

[[noreturn]] void throw_nonfinite(std::span<const double> node);

}  // namespace detail

// Weighted sum over grid tuples accepted by `domain`, in lexicographic order.
// kernel: callable (std::span<const double>) -> cplx.
template <class Kernel>
cplx quad(Kernel&& kernel, const DomainPredicate& domain,
          const FrequencyGrid& grid, int arity, const QuadOptions& options = {}) {
  if (arity < 1 || arity > 3)
    throw std::invalid_argument("quad: arity must be 1, 2 or 3");
  if (domain.arity != arity)
    throw std::invalid_argument("quad: domain arity does not match");
  if (!options.signs.empty() &&
      options.signs.size() != static_cast<std::size_t>(arity))
    throw std::invalid_argument("quad: one sign mode per axis required");

  std::vector<std::vector<FrequencyBin>> axes;
  for (int a = 0; a < arity; ++a) {
    const AxisSigns mode =
        options.signs.empty() ? AxisSigns::positive : options.signs[a];
    axes.push_back(axis_nodes(grid, mode));
  }

  auto partial = [&](std::size_t i0) -> cplx {
    double xi[3] = {axes[0][i0].center, 0.0, 0.0};
    const double w0 = axes[0][i0].width;
    cplx acc{};
    auto visit = [&](double weight) {
      std::span<const double> node(xi, static_cast<std::size_t>(arity));
      if (!domain(node)) return;
      const cplx v = kernel(node);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        detail::throw_nonfinite(node);
      acc += weight * v;
    };
    if (arity == 1) {
      visit(w0);
    } else {
      for (const auto& b1 : axes[1]) {
        xi[1] = b1.center;
        if (arity == 2) {
          visit(w0 * b1.width);
        } else {
          for (const auto& b2 : axes[2]) {
            xi[2] = b2.center;
            visit(w0 * b1.width * b2.width);
          }
        }
      }
    }
    return acc;
  };

  cplx total = detail::ordered_sum<cplx>(axes[0].size(), partial, options.threads);
  if (options.twice_real_part) total = {2.0 * total.real(), 0.0};
  return total;
}

}  // namespace fbmlift
