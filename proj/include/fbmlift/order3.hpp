#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "fbmlift/spectral.hpp"
#include "fbmlift/tree.hpp"

namespace fbmlift {

struct SubtreeSum {
  int vertex;
  double sum;
};

// S_v = sum of xi over v and its descendants; xi is indexed by vertex slot.
std::vector<SubtreeSum> subtree_sums(const DecoratedTree& tree,
                                     std::span<const double> xi);

// Requires |xi_0| <= |xi_1| <= ... over the whole tuple, then
// |S_v| > c max_{w >= v} |xi_w| for every vertex with a nontrivial subtree.
bool in_cut_domain_tree(const DecoratedTree& tree, std::span<const double> xi,
                        double c_reg_prime);
bool in_cut_domain_tree(const DecoratedForest& forest, std::span<const double> xi,
                        double c_reg_prime);

// e^{it S_root} / prod_v (i S_v); throws SingularityError naming the vertex.
cplx skeleton_kernel_eval(const DecoratedTree& tree, double t,
                          std::span<const double> xi);
cplx skeleton_kernel_eval(const DecoratedForest& forest, double t,
                          std::span<const double> xi);

// Sk_t - Sk_s, regular in S_root -> 0 for trees.
cplx skeleton_increment(const DecoratedTree& tree, double t, double s,
                        std::span<const double> xi);
cplx skeleton_increment(const DecoratedForest& forest, double t, double s,
                        std::span<const double> xi);

struct SkeletonVarianceOptions {
  unsigned threads = 1;
  // Ordered-domain weight of grid cells on |xi_a| = |xi_b|: 1/2 for one
  // tie, 1/6 for a triple tie. Off gives every ordered cell weight 1.
  bool tie_weights = true;
};

// E|delta RSk_ts|^2 for a 3-vertex tree or forest with distinct labels, over
// normal-ordered tuples inside the cut domain.
double variance_skeleton_regularized(const DecoratedForest& forest,
                                     const ModelParams& params, double c_reg_prime,
                                     const FrequencyGrid& grid, double s, double t,
                                     const SkeletonVarianceOptions& options = {});
double variance_skeleton_regularized(const DecoratedTree& tree,
                                     const ModelParams& params, double c_reg_prime,
                                     const FrequencyGrid& grid, double s, double t,
                                     const SkeletonVarianceOptions& options = {});

// Same quadrature with the weight phi_eps^3 - phi_eta^3.
double variance_skeleton_rate(const DecoratedTree& tree, double alpha, double eps,
                              double eta, double c_reg_prime,
                              const FrequencyGrid& grid, double s, double t,
                              const SkeletonVarianceOptions& options = {});

// Linear 3-chain in slots 0, 1, 2 (the identity-permutation term).
DecoratedTree order3_chain();

// Per-tuple kernel of the regularized order-3 integral. eta[k] is the
// frequency of u_{k+1}; the tuple is sorted into its normal-ordered sector
// (ties broken by variable index) and the signed forests of that sector are
// evaluated with 2-vertex pieces cut at c_reg and 3-vertex pieces at
// c_reg_prime. With both constants -> 0 this reproduces the raw triple
// integral kernel.
class Order3Kernel {
 public:
  Order3Kernel(double c_reg, double c_reg_prime);
  ~Order3Kernel();
  Order3Kernel(const Order3Kernel&) = delete;
  Order3Kernel& operator=(const Order3Kernel&) = delete;

  cplx operator()(double t, double s, const std::array<double, 3>& eta) const;
  // Sector from bin indices, for grids where equal |eta| means equal bins.
  cplx evaluate(double t, double s, const std::array<double, 3>& eta,
                const std::array<int, 3>& bins) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// labels[k] is the zero-based noise component of u_{k+1}.
double regularized_integral_order3(const ModelParams& params, double c_reg,
                                   double c_reg_prime, const FrequencyGrid& grid,
                                   const SpectralNoiseField& noise, double s, double t,
                                   const std::array<int, 3>& labels);

}  // namespace fbmlift
