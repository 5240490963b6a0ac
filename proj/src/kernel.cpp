#include "mfg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

// Clamp-and-check shared by the heat-kernel constructors. Entries below
// the floor are raised so that log k stays bounded; kernels whose
// nonpositive fraction exceeds 1% are refused.
void finalize_heat_kernel(Kernel& k) {
  const auto n = k.density.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double& v = k.density.data()[i];
    if (v <= 0.0) ++k.negative_entries;
    if (v < kClampFloor) {
      v = kClampFloor;
      ++k.clamped_entries;
    }
  }
  if (k.negative_entries > 0.01 * static_cast<double>(n))
    throw ExcessiveClamping(k.family + ": " +
                            std::to_string(k.negative_entries) +
                            " nonpositive entries out of " + std::to_string(n));

  const Eigen::VectorXd& a = k.space_s->weights;
  const Eigen::VectorXd& ap = k.space_sp->weights;
  double row_err = ((k.density * ap).array() - 1.0).abs().maxCoeff();
  double col_err = ((k.density.transpose() * a).array() - 1.0).abs().maxCoeff();
  if (row_err > kMarginalTol || col_err > kMarginalTol)
    throw MarginalViolation(k.family + ": marginal condition violated (" +
                            std::to_string(std::max(row_err, col_err)) +
                            " > 1e-8); the grid cannot resolve this t");
}

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double c = std::clamp(a.dot(b), -1.0, 1.0);
  return std::acos(c);
}

// 1 + 2 sum_{n>=1} e^{-n^2 t} cos(n theta), truncated at term bound 1e-14.
double circle_series(double theta, double t) {
  double v = 1.0;
  for (int n = 1;; ++n) {
    double c = 2.0 * std::exp(-static_cast<double>(n) * n * t);
    if (c < kSeriesTermBound) break;
    if (n > kHeatLMax)
      throw TruncationInsufficient("circle heat kernel: order > 512 needed");
    v += c * std::cos(n * theta);
  }
  return v;
}

// Equivalent wrapped-Gaussian form; positive term by term, so free of
// the cancellation noise the series shows far from the diagonal.
double circle_gaussian(double theta, double t) {
  double v = 0.0;
  for (int m = -4; m <= 4; ++m) {
    double x = theta + 2.0 * M_PI * m;
    v += std::exp(-x * x / (4.0 * t));
  }
  return std::sqrt(M_PI / t) * v;
}

}  // namespace

double spin_flip_field(double t) {
  if (t <= 0.0) throw InvalidParameter("spin_flip_field: t must be positive");
  double e = std::exp(-2.0 * t);
  return 0.5 * (std::log1p(-e) - std::log1p(e));
}

Kernel spin_flip_kernel(double t) {
  double h = spin_flip_field(t);
  SpacePtr sp = make_two_point();
  Kernel k;
  k.space_s = sp;
  k.space_sp = sp;
  k.family = "spin-flip";
  k.t = t;
  k.density.resize(2, 2);
  double ch = std::cosh(h);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = sp->nodes(i, 0), e = sp->nodes(j, 0);
      k.density(i, j) = std::exp(s * e * h) / ch;
    }
  return k;
}

Kernel circle_heat_kernel(SpacePtr space, double t) {
  if (t < kHeatTMin)
    throw InvalidParameter("circle_heat_kernel: t below t_min = 0.005");
  const int n = space->size();
  Kernel k;
  k.space_s = space;
  k.space_sp = space;
  k.family = "heat-circle";
  k.t = t;
  k.density.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double th = angle_between(space->nodes.row(i), space->nodes.row(j));
      double v = (t < 0.5) ? circle_gaussian(th, t) : circle_series(th, t);
      k.density(i, j) = v;
      k.density(j, i) = v;
    }
  finalize_heat_kernel(k);
  return k;
}

Kernel sphere_heat_kernel(SpacePtr space, double t) {
  if (t < kHeatTMin)
    throw InvalidParameter("sphere_heat_kernel: t below t_min = 0.005");
  const int n = space->size();
  if (space->dim() != 3)
    throw InvalidParameter("sphere_heat_kernel: expected a sphere grid");

  // Truncation order: (2l+1) e^{-l(l+1)t} < 1e-14.
  int lmax = 0;
  while ((2.0 * lmax + 1.0) * std::exp(-static_cast<double>(lmax) * (lmax + 1) * t) >=
         kSeriesTermBound) {
    ++lmax;
    if (lmax > kHeatLMax)
      throw TruncationInsufficient("sphere heat kernel: order > 512 needed");
  }

  Kernel k;
  k.space_s = space;
  k.space_sp = space;
  k.family = "heat-sphere";
  k.t = t;
  k.density.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double c = std::clamp(space->nodes.row(i).dot(space->nodes.row(j)), -1.0, 1.0);
      // sum_l (2l+1) e^{-l(l+1)t} P_l(c) via the Legendre recurrence
      double p_prev = 1.0, p = c, v = 1.0;
      for (int l = 1; l <= lmax; ++l) {
        v += (2.0 * l + 1.0) * std::exp(-static_cast<double>(l) * (l + 1) * t) * p;
        double p_next = ((2.0 * l + 1.0) * c * p - l * p_prev) / (l + 1.0);
        p_prev = p;
        p = p_next;
      }
      k.density(i, j) = v;
      k.density(j, i) = v;
    }
  finalize_heat_kernel(k);
  return k;
}

Kernel coarse_grain_kernel(SpacePtr space, const std::vector<int>& labels) {
  const int n = space->size();
  if (static_cast<int>(labels.size()) != n)
    throw InvalidParameter("coarse_grain_kernel: label count mismatch");
  int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (n_classes < 1 || *std::min_element(labels.begin(), labels.end()) < 0)
    throw InvalidParameter("coarse_grain_kernel: class ids must be 0..m-1");

  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n_classes);
  for (int i = 0; i < n; ++i) mass(labels[i]) += space->weights(i);
  for (int c = 0; c < n_classes; ++c)
    if (mass(c) <= 0.0)
      throw EmptyPartitionClass("coarse_grain_kernel: class " +
                                std::to_string(c) + " has zero mass");

  Kernel k;
  k.space_s = space;
  k.family = "coarse-grain";
  k.unbounded_log = true;
  k.density = Eigen::MatrixXd::Zero(n, n_classes);
  for (int i = 0; i < n; ++i) k.density(i, labels[i]) = 1.0 / mass(labels[i]);

  Eigen::MatrixXd cl_nodes(n_classes, 1);
  for (int c = 0; c < n_classes; ++c) cl_nodes(c, 0) = c;
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(n_classes, n_classes) -
                      Eigen::MatrixXd::Identity(n_classes, n_classes);
  k.space_sp = make_space("labels-" + std::to_string(n_classes), cl_nodes, mass,
                          d, "explicit");
  return k;
}

double rho_alpha_k(const Kernel& kernel) {
  const SpinSpace& s = *kernel.space_s;
  const int np = static_cast<int>(kernel.density.cols());
  // posterior(sigma, eta) = alpha(sigma) k(sigma, eta)
  Eigen::MatrixXd post = s.weights.asDiagonal() * kernel.density;
  Eigen::MatrixXd d2 = s.dist.array().square();
  // spread(a, eta) = sum_sigma post * d^2(sigma, a)
  Eigen::MatrixXd spread = d2.transpose() * post;  // ns x np
  double worst = 0.0;
  for (int e = 0; e < np; ++e) {
    double best = spread.col(e).minCoeff();
    worst = std::max(worst, best);
  }
  return std::sqrt(std::max(0.0, worst));
}

double rho_alpha(const SpinSpace& space) {
  Eigen::MatrixXd d2 = space.dist.array().square();
  Eigen::VectorXd spread = d2.transpose() * space.weights;
  return std::sqrt(std::max(0.0, spread.minCoeff()));
}

}  // namespace mfg
