#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mfg/spin_space.hpp"

namespace mfg {

inline constexpr double kMarginalTol = 1e-8;
inline constexpr double kClampFloor = 1e-12;
inline constexpr double kHeatTMin = 0.005;
inline constexpr int kHeatLMax = 512;
inline constexpr double kSeriesTermBound = 1e-14;

// Joint a-priori kernel density k(sigma, eta) w.r.t. alpha x alpha',
// satisfying both marginal conditions.
struct Kernel {
  SpacePtr space_s;   // initial layer
  SpacePtr space_sp;  // transformed layer
  Eigen::MatrixXd density;  // n_s x n_sp
  std::string family;
  double t = 0.0;
  bool unbounded_log = false;  // coarse-graining kernels vanish off-support
  int clamped_entries = 0;     // raised to the clamp floor
  int negative_entries = 0;    // nonpositive before clamping
};

// Site-wise independent rate-one spin flip on {+1,-1}:
// k(sigma, eta) = exp(sigma eta h_t) / cosh(h_t).
Kernel spin_flip_kernel(double t);

// h_t = (1/2) log((1 - e^{-2t}) / (1 + e^{-2t})), evaluated in log space.
double spin_flip_field(double t);

// Gauss-Weierstrass kernels w.r.t. the equidistribution. The circle
// kernel switches to the wrapped-Gaussian representation at small t,
// where the cosine series underflows; both forms agree to ~1e-14.
Kernel circle_heat_kernel(SpacePtr space, double t);
Kernel sphere_heat_kernel(SpacePtr space, double t);

// Deterministic local coarse-graining: S' = label set, alpha'(eta) =
// alpha(S_eta), k = indicator of the class over its mass. labels[i] is
// the class of node i; class ids must cover 0..n_classes-1.
Kernel coarse_grain_kernel(SpacePtr space, const std::vector<int>& labels);

// Worst-case posterior spread: sup_eta inf_{a in nodes}
// (sum_sigma alpha k(sigma,eta) d^2(sigma,a))^{1/2}.
double rho_alpha_k(const Kernel& kernel);

// Metric-space standard deviation of alpha itself.
double rho_alpha(const SpinSpace& space);

}  // namespace mfg
