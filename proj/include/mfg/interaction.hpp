#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>

#include "mfg/spin_space.hpp"

namespace mfg {

// A mean-field interaction Phi(nu) = F(nu[g_1], ..., nu[g_l]) given by
// evaluator callbacks for F, its gradient and Hessian, together with
// the observable family g mapping node coordinates to R^l.
struct Interaction {
  int l = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> observables;
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> f_hess;
  std::optional<double> homogeneity_degree;

  // g evaluated at every node of the space, n x l.
  Eigen::MatrixXd observable_matrix(const SpinSpace& space) const;
};

// g_j = j-th coordinate of the node.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> coordinate_observables();

// Norm data entering the Lipschitz certificate. c_of_f_g is the exact
// arithmetic combination 2 * hess_max * delta_g * g_lip * exp(delta_hat_phi1/2).
struct InteractionConstants {
  double delta_g = 0.0;          // sum of component oscillations
  double g_lip = 0.0;            // ||g||_{d,2}
  double hess_max = 0.0;         // sup |F_ju| over probed moments
  double delta_hat_phi1 = 0.0;   // sup oscillation of the derivative kernel
  double c_of_f_g = 0.0;
  int probe_count = 0;
  std::uint64_t seed = 0;
  bool exact = false;  // true when supplied as a closed-form preset override
};

// Phi(nu) = F(nu[g]).
double phi(const Interaction& inter, const Measure& nu);

// Derivative kernel Phi^(1)(nu, delta_node) = sum_j F_j(nu[g]) g_j(node).
double phi_deriv(const Interaction& inter, const Measure& nu, int node);

// Estimates the norm constants by evaluating over the vertex images
// g(node) plus probe_count seeded random convex combinations. Reported
// suprema are lower bounds except where vertex evaluation is exact.
InteractionConstants compute_constants(const Interaction& inter,
                                       const SpinSpace& space,
                                       int probe_count, std::uint64_t seed);

inline double combine_c_of_f_g(double hess_max, double delta_g, double g_lip,
                               double delta_hat_phi1) {
  return 2.0 * hess_max * delta_g * g_lip * std::exp(0.5 * delta_hat_phi1);
}

}  // namespace mfg
