#include "fbmlift/order3.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace fbmlift {

namespace {

const cplx kI(0.0, 1.0);

std::vector<double> sums_of(const DecoratedTree& tree, std::span<const double> xi,
                            std::vector<double>* maxabs = nullptr) {
  const std::size_t n = tree.size();
  std::vector<double> s(n, 0.0), m(n, 0.0);
  for (std::size_t v = n; v-- > 0;) {
    const int slot = tree[v].slot;
    if (slot < 0 || static_cast<std::size_t>(slot) >= xi.size())
      throw std::invalid_argument("frequency tuple too short for the tree's slots");
    s[v] += xi[slot];
    m[v] = std::max(m[v], std::abs(xi[slot]));
    const int p = tree[v].parent;
    if (p >= 0) {
      s[p] += s[v];
      m[p] = std::max(m[p], m[v]);
    }
  }
  if (maxabs) *maxabs = std::move(m);
  return s;
}

bool normal_ordered(std::span<const double> xi) {
  for (std::size_t k = 0; k + 1 < xi.size(); ++k)
    if (std::abs(xi[k]) > std::abs(xi[k + 1])) return false;
  return true;
}

bool cut_rule(const DecoratedTree& tree, std::span<const double> xi, double c) {
  std::vector<double> m;
  const auto s = sums_of(tree, xi, &m);
  std::vector<int> count(tree.size(), 1);
  for (std::size_t v = tree.size(); v-- > 1;) count[tree[v].parent] += count[v];
  for (std::size_t v = 0; v < tree.size(); ++v)
    if (count[v] >= 2 && !(std::abs(s[v]) > c * m[v])) return false;
  return true;
}

[[noreturn]] void vanishing_sum(std::size_t v) {
  throw SingularityError("skeleton kernel: subtree sum S_v vanishes at vertex " + std::to_string(v),
                         "S_" + std::to_string(v));
}

// Three vertices in slots 0..2 with parent slots (-1 for roots).
struct Flat3 {
  std::array<int, 3> parent{};
  std::array<int, 3> count{};

  explicit Flat3(const DecoratedForest& forest) {
    if (forest.vertex_count() != 3) throw std::invalid_argument("expected 3 vertices in total");
    std::array<bool, 3> seen{};
    for (const auto& tr : forest.trees())
      for (std::size_t v = 0; v < tr.size(); ++v) {
        const int slot = tr[v].slot;
        if (slot < 0 || slot > 2 || seen[slot]) throw std::invalid_argument("slots must be 0, 1, 2");
        seen[slot] = true;
        parent[slot] = tr[v].parent < 0 ? -1 : tr[tr[v].parent].slot;
      }
    for (int v = 0; v < 3; ++v)
      if (parent[v] >= v) throw std::invalid_argument("parent slots must precede child slots");
    count = {1, 1, 1};
    for (int v = 2; v >= 0; --v)
      if (parent[v] >= 0) count[parent[v]] += count[v];
  }

  void sums(const std::array<double, 3>& xi, std::array<double, 3>& s,
            std::array<double, 3>& m) const {
    for (int v = 0; v < 3; ++v) {
      s[v] = xi[v];
      m[v] = std::abs(xi[v]);
    }
    for (int v = 2; v >= 0; --v)
      if (parent[v] >= 0) {
        s[parent[v]] += s[v];
        m[parent[v]] = std::max(m[parent[v]], m[v]);
      }
  }

  bool accepts(const std::array<double, 3>& s, const std::array<double, 3>& m, double c) const {
    for (int v = 0; v < 3; ++v)
      if (count[v] >= 2 && !(std::abs(s[v]) > c * m[v])) return false;
    return true;
  }

  // |Sk_t - Sk_s|^2
  double increment_norm(const std::array<double, 3>& s, double t, double s0) const {
    cplx at_t = 1.0, at_s = 1.0;
    int roots = 0;
    double denom = 1.0;
    for (int v = 0; v < 3; ++v) {
      if (parent[v] < 0) {
        ++roots;
        at_t *= std::polar(1.0, t * s[v]) / (kI * s[v]);
        at_s *= std::polar(1.0, s0 * s[v]) / (kI * s[v]);
      } else {
        denom *= s[v] * s[v];
      }
    }
    if (roots == 1) {
      // Single tree: |ex(h, S_root)|^2 / prod_{v != root} S_v^2.
      return std::norm(exp_increment(t - s0, s[0])) / denom;
    }
    return std::norm(at_t - at_s) / denom;
  }
};

double skeleton_quadrature(const Flat3& flat, double c_reg_prime, const FrequencyGrid& grid,
                           double s, double t, const SkeletonVarianceOptions& options,
                           const std::function<double(const std::array<double, 3>&)>& weight) {
  const std::size_t n = grid.size();
  const std::array<double, 2> signs{-1.0, 1.0};
  auto partial = [&](std::size_t c) -> double {
    double acc = 0.0;
    std::array<double, 3> xi{}, S{}, M{};
    xi[2] = grid[c].center;
    for (std::size_t b = 0; b <= c; ++b) {
      for (std::size_t a = 0; a <= b; ++a) {
        double tie = 1.0;
        if (options.tie_weights) {
          if (a == b && b == c) tie = 1.0 / 6.0;
          else if (a == b || b == c) tie = 0.5;
        }
        const double w = grid[a].width * grid[b].width * grid[c].width * tie;
        for (double sa : signs)
          for (double sb : signs) {
            xi[0] = sa * grid[a].center;
            xi[1] = sb * grid[b].center;
            flat.sums(xi, S, M);
            if (!flat.accepts(S, M, c_reg_prime)) continue;
            acc += w * weight(xi) * flat.increment_norm(S, t, s);
          }
      }
    }
    return acc;
  };
  // Global sign flip maps the domain to itself; keep xi_3 > 0 and double.
  return 2.0 * detail::ordered_sum<double>(n, partial, options.threads);
}

}  // namespace

std::vector<SubtreeSum> subtree_sums(const DecoratedTree& tree, std::span<const double> xi) {
  const auto s = sums_of(tree, xi);
  std::vector<SubtreeSum> out;
  for (std::size_t v = 0; v < tree.size(); ++v) out.push_back({static_cast<int>(v), s[v]});
  return out;
}

bool in_cut_domain_tree(const DecoratedTree& tree, std::span<const double> xi,
                        double c_reg_prime) {
  return normal_ordered(xi) && cut_rule(tree, xi, c_reg_prime);
}

bool in_cut_domain_tree(const DecoratedForest& forest, std::span<const double> xi,
                        double c_reg_prime) {
  if (!normal_ordered(xi)) return false;
  for (const auto& tr : forest.trees())
    if (!cut_rule(tr, xi, c_reg_prime)) return false;
  return true;
}

cplx skeleton_kernel_eval(const DecoratedTree& tree, double t, std::span<const double> xi) {
  const auto s = sums_of(tree, xi);
  cplx v = std::polar(1.0, t * s[0]);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == 0.0) vanishing_sum(k);
    v /= kI * s[k];
  }
  return v;
}

cplx skeleton_kernel_eval(const DecoratedForest& forest, double t, std::span<const double> xi) {
  cplx v = 1.0;
  for (const auto& tr : forest.trees()) v *= skeleton_kernel_eval(tr, t, xi);
  return v;
}

cplx skeleton_increment(const DecoratedTree& tree, double t, double s,
                        std::span<const double> xi) {
  const auto S = sums_of(tree, xi);
  cplx v = std::polar(1.0, s * S[0]) * exp_increment(t - s, S[0]);
  for (std::size_t k = 1; k < S.size(); ++k) {
    if (S[k] == 0.0) vanishing_sum(k);
    v /= kI * S[k];
  }
  return v;
}

cplx skeleton_increment(const DecoratedForest& forest, double t, double s,
                        std::span<const double> xi) {
  if (forest.trees().size() == 1) return skeleton_increment(forest.trees()[0], t, s, xi);
  return skeleton_kernel_eval(forest, t, xi) - skeleton_kernel_eval(forest, s, xi);
}

double variance_skeleton_regularized(const DecoratedForest& forest,
                                     const ModelParams& params, double c_reg_prime,
                                     const FrequencyGrid& grid, double s, double t,
                                     const SkeletonVarianceOptions& options) {
  const Flat3 flat(forest);
  auto weight = [&](const std::array<double, 3>& xi) {
    const double p = spectral_weight(params, xi[0]) * spectral_weight(params, xi[1]) *
                     spectral_weight(params, xi[2]);
    return p * p;
  };
  return skeleton_quadrature(flat, c_reg_prime, grid, s, t, options, weight);
}

double variance_skeleton_regularized(const DecoratedTree& tree,
                                     const ModelParams& params, double c_reg_prime,
                                     const FrequencyGrid& grid, double s, double t,
                                     const SkeletonVarianceOptions& options) {
  return variance_skeleton_regularized(DecoratedForest({tree}), params, c_reg_prime, grid,
                                       s, t, options);
}

double variance_skeleton_rate(const DecoratedTree& tree, double alpha, double eps,
                              double eta, double c_reg_prime, const FrequencyGrid& grid,
                              double s, double t, const SkeletonVarianceOptions& options) {
  const ModelParams pe = ModelParams::make(alpha, eps);
  const ModelParams pn = ModelParams::make(alpha, eta);
  const Flat3 flat(DecoratedForest({tree}));
  auto weight = [&](const std::array<double, 3>& xi) {
    double a = 1.0, b = 1.0;
    for (double x : xi) {
      a *= spectral_weight(pe, x);
      b *= spectral_weight(pn, x);
    }
    return (a - b) * (a - b);
  };
  return skeleton_quadrature(flat, c_reg_prime, grid, s, t, options, weight);
}

DecoratedTree order3_chain() { return DecoratedTree::chain({1, 2, 3}); }

// ---------------------------------------------------------------------------

struct Order3Kernel::Impl {
  struct Plan {
    std::vector<int> slot;    // per local vertex
    std::vector<int> parent;  // local parent, -1 at the root
    std::vector<int> count;   // subtree sizes
    double c = 0.0;
    std::vector<std::pair<int, std::vector<int>>> cuts;  // (left, right components)
  };
  struct Term {
    int sign;
    std::vector<int> components;
  };

  double c_reg, c_reg_prime;
  std::vector<Plan> plans;
  std::map<std::string, int> index;
  std::array<std::array<int, 3>, 6> perms{};
  std::array<std::vector<Term>, 6> terms;

  static std::string key(const DecoratedTree& tr) {
    std::string k;
    for (const auto& v : tr.vertices())
      k += std::to_string(v.parent) + ":" + std::to_string(v.slot) + ";";
    return k;
  }

  int plan_for(const DecoratedTree& tr) {
    const std::string k = key(tr);
    if (auto it = index.find(k); it != index.end()) return it->second;
    Plan p;
    for (const auto& v : tr.vertices()) {
      p.slot.push_back(v.slot);
      p.parent.push_back(v.parent);
    }
    p.count.assign(tr.size(), 1);
    for (std::size_t v = tr.size(); v-- > 1;) p.count[p.parent[v]] += p.count[v];
    p.c = tr.size() >= 3 ? c_reg_prime : c_reg;
    for (const auto& cut : enumerate_admissible_cuts(tr)) {
      const CutSplit sp = split_cut(tr, cut);
      const int left = plan_for(sp.left);
      std::vector<int> right;
      for (const auto& r : sp.right.trees()) right.push_back(plan_for(r));
      p.cuts.push_back({left, right});
    }
    plans.push_back(std::move(p));
    const int id = static_cast<int>(plans.size()) - 1;
    index[k] = id;
    return id;
  }

  Impl(double c2, double c3) : c_reg(c2), c_reg_prime(c3) {
    std::array<int, 3> sigma{1, 2, 3};
    int q = 0;
    do {
      perms[q] = sigma;
      for (const auto& term : fubini_expand(sigma).terms) {
        Term tm{term.sign, {}};
        for (const auto& tr : term.forest.trees()) tm.components.push_back(plan_for(tr));
        terms[q].push_back(std::move(tm));
      }
      ++q;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }

  // Subtree sums and the cut indicator of plan p at frequencies xi (by slot).
  bool local(const Plan& p, const std::array<double, 3>& xi, double S[3]) const {
    double M[3];
    const std::size_t n = p.slot.size();
    for (std::size_t v = 0; v < n; ++v) {
      S[v] = xi[p.slot[v]];
      M[v] = std::abs(S[v]);
    }
    for (std::size_t v = n; v-- > 1;) {
      S[p.parent[v]] += S[v];
      M[p.parent[v]] = std::max(M[p.parent[v]], M[v]);
    }
    for (std::size_t v = 0; v < n; ++v)
      if (p.count[v] >= 2 && !(std::abs(S[v]) > p.c * M[v])) return false;
    return true;
  }

  cplx rsk(int id, double x, const std::array<double, 3>& xi) const {
    const Plan& p = plans[id];
    double S[3] = {0.0, 0.0, 0.0};
    if (!local(p, xi, S)) return 0.0;
    cplx v = std::polar(1.0, x * S[0]);
    for (std::size_t k = 0; k < p.slot.size(); ++k) {
      if (S[k] == 0.0) vanishing_sum(k);
      v /= kI * S[k];
    }
    return v;
  }

  cplx ri(int id, double t, double s, const std::array<double, 3>& xi) const {
    const Plan& p = plans[id];
    double S[3] = {0.0, 0.0, 0.0};
    cplx v = 0.0;
    if (local(p, xi, S)) {
      v = std::polar(1.0, s * S[0]) * exp_increment(t - s, S[0]);
      for (std::size_t k = 1; k < p.slot.size(); ++k) {
        if (S[k] == 0.0) vanishing_sum(k);
        v /= kI * S[k];
      }
    }
    for (const auto& [left, right] : p.cuts) {
      cplx r = ri(left, t, s, xi);
      for (int comp : right) r *= rsk(comp, s, xi);
      v -= r;
    }
    return v;
  }

  template <class Key>
  cplx eval(double t, double s, const std::array<double, 3>& eta, const Key& key_of) const {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto ka = key_of(a), kb = key_of(b);
      return ka != kb ? ka < kb : a < b;
    });
    const std::array<int, 3> sigma{order[0] + 1, order[1] + 1, order[2] + 1};
    const std::array<double, 3> xi{eta[order[0]], eta[order[1]], eta[order[2]]};
    const int q = static_cast<int>(std::find(perms.begin(), perms.end(), sigma) - perms.begin());
    cplx total = 0.0;
    for (const auto& tm : terms[q]) {
      cplx prod = static_cast<double>(tm.sign);
      for (int comp : tm.components) prod *= ri(comp, t, s, xi);
      total += prod;
    }
    return total;
  }
};

Order3Kernel::Order3Kernel(double c_reg, double c_reg_prime)
    : impl_(std::make_unique<Impl>(c_reg, c_reg_prime)) {
  if (!(c_reg >= 0.0 && c_reg < 1.0 && c_reg_prime >= 0.0 && c_reg_prime < 1.0))
    throw std::invalid_argument("cut constants must lie in [0, 1)");
}

Order3Kernel::~Order3Kernel() = default;

cplx Order3Kernel::operator()(double t, double s, const std::array<double, 3>& eta) const {
  return impl_->eval(t, s, eta, [&](int k) { return std::abs(eta[k]); });
}

cplx Order3Kernel::evaluate(double t, double s, const std::array<double, 3>& eta,
                            const std::array<int, 3>& bins) const {
  return impl_->eval(t, s, eta, [&](int k) { return bins[k]; });
}

double regularized_integral_order3(const ModelParams& params, double c_reg,
                                   double c_reg_prime, const FrequencyGrid& grid,
                                   const SpectralNoiseField& noise, double s, double t,
                                   const std::array<int, 3>& labels) {
  if (!noise.matches(grid)) throw std::invalid_argument("noise drawn on a different grid");
  for (int l : labels)
    if (l < 0 || l >= noise.components())
      throw std::invalid_argument("label out of range for noise field");
  if (!(c_reg > 0.0 && c_reg < 1.0 && c_reg_prime > 0.0 && c_reg_prime < 1.0))
    throw std::invalid_argument("cut constants must lie in (0, 1)");
  const Order3Kernel kernel(c_reg, c_reg_prime);
  const std::size_t n = grid.size();
  const auto nodes = axis_nodes(grid, AxisSigns::both);
  auto bin_of = [n](std::size_t j) { return static_cast<int>(j < n ? n - 1 - j : j - n); };
  auto weighted = [&](int c) {
    std::vector<cplx> y(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx v = spectral_weight(params, grid[k].center) * noise.at(c, k);
      y[n - 1 - k] = std::conj(v);
      y[n + k] = v;
    }
    return y;
  };
  const auto y1 = weighted(labels[0]);
  const auto y2 = weighted(labels[1]);
  const auto y3 = weighted(labels[2]);
  auto partial = [&](std::size_t k3) -> cplx {
    const std::size_t j3 = n + k3;
    cplx acc = 0.0;
    for (std::size_t j2 = 0; j2 < 2 * n; ++j2) {
      cplx inner = 0.0;
      for (std::size_t j1 = 0; j1 < 2 * n; ++j1) {
        const std::array<double, 3> eta{nodes[j1].center, nodes[j2].center, nodes[j3].center};
        const std::array<int, 3> bins{bin_of(j1), bin_of(j2), bin_of(j3)};
        inner += y1[j1] * kernel.evaluate(t, s, eta, bins);
      }
      acc += y2[j2] * inner;
    }
    return y3[j3] * acc;
  };
  return 2.0 * detail::ordered_sum<cplx>(n, partial, 1).real();
}

}  // namespace fbmlift
