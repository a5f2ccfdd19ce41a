#pragma once

#include <optional>

#include "fbmlift/spectral.hpp"

namespace fbmlift {

enum class KernelSign { plus, minus };

// I_ts(xi1, xi2) = int_s^t e^{i u1 xi1} int_s^{u1} e^{i u2 xi2} du2 du1.
// Total: removable singularities are handled by Taylor branches.
cplx kernel_I(double t, double s, double xi1, double xi2);

// plus:  e^{iu(o+n)} / ([i(o+n)][i n])
// minus: -e^{iu(o+n)} / ([i(o+n)][i n]), called with outer = xi2, inner = xi1.
// Throws SingularityError on either pole.
cplx kernel_G(KernelSign sign, double u, double xi_outer, double xi_inner);

// plus:  -(e^{is xi2} / (i xi2)) (e^{it xi1} - e^{is xi1}) / (i xi1)
// minus:  (e^{it xi1} / (i xi1)) (e^{it xi2} - e^{is xi2}) / (i xi2)
// The increment factor is bounded; only the other frequency is a pole.
cplx kernel_boundary(KernelSign sign, double t, double s, double xi1, double xi2);

// G^+_t - G^+_s (plus) or G^-_t(xi2, xi1) - G^-_s(xi2, xi1) (minus), written
// so that xi1 + xi2 -> 0 is regular.
cplx kernel_G_increment(KernelSign sign, double t, double s, double xi1, double xi2);

// Normal-ordered halves: ties |xi1| == |xi2| belong to the plus half.
KernelSign half_of(double xi1, double xi2);

// Accepts iff |xi1| <= |xi2| and |xi1 + xi2| > c_reg |xi2|.
bool in_cut_domain_2(double xi1, double xi2, double c_reg);

// Cut test for whichever half (xi1, xi2) lies in:
// |xi1 + xi2| > c_reg max(|xi1|, |xi2|).
bool in_cut_domain_any_half(double xi1, double xi2, double c_reg);

enum class AreaKind { raw, regularized, counterterm };

// Per-pair kernel of the order-2 iterated integral.
//   raw:         kernel_I
//   regularized: boundary term everywhere plus G-increment inside the cut
//   counterterm: minus the G-increment over the rejected cone
cplx area_kernel(AreaKind kind, double c_reg, double t, double s, double xi1,
                 double xi2);

struct AreaSample {
  double value = 0.0;
  int i1 = 0;
  int i2 = 0;
  double s = 0.0;
  double t = 0.0;
  AreaKind kind = AreaKind::raw;
};

// Component indices are zero-based and must differ.
AreaSample area_raw(const ModelParams& params, const FrequencyGrid& grid,
                    const SpectralNoiseField& noise, double s, double t, int i1,
                    int i2);
AreaSample area_regularized(const ModelParams& params, double c_reg,
                            const FrequencyGrid& grid,
                            const SpectralNoiseField& noise, double s, double t,
                            int i1, int i2);
AreaSample counterterm_sample(const ModelParams& params, double c_reg,
                              const FrequencyGrid& grid,
                              const SpectralNoiseField& noise, double s, double t,
                              int i1, int i2);

// Increment of one component, 2 Re sum phi Z (e^{it xi} - e^{is xi}) / (i xi).
double path_increment(const ModelParams& params, const FrequencyGrid& grid,
                      const SpectralNoiseField& noise, double s, double t, int i);

// E|RB^2_ts(i1, i2)|^2 for distinct components.
double variance_area_regularized(const ModelParams& params, double c_reg,
                                 const FrequencyGrid& grid, double s, double t);

// E|sum of G-increment terms|^2 over both halves, evaluated in the
// coordinates (xi1 + xi2, xi2) so that the diagonal layer |xi1 + xi2| < 1/|t-s|
// is resolved by the grid. With c_reg set, only the cut domain is kept.
double variance_increment(const ModelParams& params, const FrequencyGrid& grid,
                          double s, double t,
                          std::optional<double> c_reg = std::nullopt);

inline double variance_increment_unregularized(const ModelParams& params,
                                               const FrequencyGrid& grid,
                                               double s, double t) {
  return variance_increment(params, grid, s, t);
}

// E|RB^{2,eps} - RB^{2,eta}|^2 on identical noise.
double variance_rate(double alpha, double eps, double eta, double c_reg,
                     const FrequencyGrid& grid, double s, double t);

// Variance of the boundary term of one half alone.
double variance_boundary(const ModelParams& params, KernelSign sign,
                         const FrequencyGrid& grid, double s, double t);

// Variance of the random coefficient a(xi) multiplying
// (e^{it xi} - e^{is xi}) W1(d xi) in the plus boundary term.
double boundary_coefficient_variance(const ModelParams& params,
                                     const FrequencyGrid& grid, double xi);

}  // namespace fbmlift
