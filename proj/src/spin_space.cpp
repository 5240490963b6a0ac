#include "mfg/spin_space.hpp"

#include <cmath>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kWeightTol = 1e-12;

Eigen::MatrixXd chordal_metric(const Eigen::MatrixXd& nodes) {
  const int n = static_cast<int>(nodes.rows());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      double v = (nodes.row(i) - nodes.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

}  // namespace

SpacePtr make_space(std::string label, Eigen::MatrixXd nodes,
                    Eigen::VectorXd weights, Eigen::MatrixXd dist,
                    std::string metric_kind) {
  // Singleton spaces are admitted for coarse-graining label sets (the
  // trivial one-class partition); everything else uses >= 2 nodes.
  const int n = static_cast<int>(weights.size());
  if (n < 1) throw InvalidParameter("SpinSpace needs at least 1 node");
  if (nodes.rows() != n || dist.rows() != n || dist.cols() != n)
    throw InvalidParameter("SpinSpace: inconsistent dimensions");

  double sum = weights.sum();
  if (!(std::abs(sum - 1.0) <= kWeightTol) || (weights.array() < 0).any())
    throw InvalidParameter("SpinSpace: weights must be nonnegative and sum to 1 within 1e-12");

  for (int i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0)
      throw InvalidParameter("SpinSpace: metric(i,i) must be 0");
    for (int j = i + 1; j < n; ++j) {
      if (dist(i, j) != dist(j, i))
        throw InvalidParameter("SpinSpace: metric must be symmetric");
      if (!(dist(i, j) > 0.0))
        throw InvalidParameter("SpinSpace: metric must be positive off the diagonal");
    }
  }

  auto sp = std::make_shared<SpinSpace>();
  sp->label = std::move(label);
  sp->nodes = std::move(nodes);
  sp->weights = weights / sum;
  sp->dist = std::move(dist);
  sp->metric_kind = std::move(metric_kind);
  sp->normalization_correction = std::abs(sum - 1.0);
  return sp;
}

SpacePtr make_two_point() {
  Eigen::MatrixXd nodes(2, 1);
  nodes << 1.0, -1.0;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::MatrixXd d(2, 2);
  d << 0.0, 2.0, 2.0, 0.0;
  return make_space("two-point", nodes, w, d, "chordal");
}

SpacePtr make_circle(int n_nodes) {
  // 4 nodes (the square) is the smallest usable circle grid.
  if (n_nodes < 4)
    throw InsufficientResolution("make_circle: need at least 4 nodes");
  Eigen::MatrixXd nodes(n_nodes, 2);
  for (int i = 0; i < n_nodes; ++i) {
    double th = 2.0 * M_PI * i / n_nodes;
    nodes(i, 0) = std::cos(th);
    nodes(i, 1) = std::sin(th);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_nodes, 1.0 / n_nodes);
  return make_space("circle-" + std::to_string(n_nodes), nodes, w,
                    chordal_metric(nodes), "chordal");
}

void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, Newton on P_n.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x(i) = -z;
    x(n - 1 - i) = z;
    w(i) = 2.0 / ((1.0 - z * z) * pp * pp);
    w(n - 1 - i) = w(i);
  }
}

SpacePtr make_sphere(int n_polar, int n_azimuth) {
  if (n_polar < 4 || n_azimuth < 4)
    throw InsufficientResolution("make_sphere: need n_polar, n_azimuth >= 4");
  Eigen::VectorXd u, wu;
  gauss_legendre(n_polar, u, wu);

  const int n = n_polar * n_azimuth;
  Eigen::MatrixXd nodes(n, 3);
  Eigen::VectorXd w(n);
  int idx = 0;
  for (int i = 0; i < n_polar; ++i) {
    double s = std::sqrt(std::max(0.0, 1.0 - u(i) * u(i)));
    for (int j = 0; j < n_azimuth; ++j) {
      double phi = 2.0 * M_PI * j / n_azimuth;
      nodes(idx, 0) = s * std::cos(phi);
      nodes(idx, 1) = s * std::sin(phi);
      nodes(idx, 2) = u(i);
      w(idx) = 0.5 * wu(i) / n_azimuth;  // GL weights sum to 2
      ++idx;
    }
  }
  return make_space("sphere-" + std::to_string(n_polar) + "x" +
                        std::to_string(n_azimuth),
                    nodes, w, chordal_metric(nodes), "chordal");
}

Measure make_measure(SpacePtr space, Eigen::VectorXd weights, double sum_tol) {
  if (!space) throw InvalidParameter("Measure: null space");
  if (weights.size() != space->size())
    throw InvalidParameter("Measure: weight count does not match space");
  if ((weights.array() < 0).any())
    throw InvalidParameter("Measure: weights must be nonnegative");
  double sum = weights.sum();
  if (!(std::abs(sum - 1.0) <= sum_tol))
    throw InvalidParameter("Measure: weights must sum to 1 within tolerance");
  return Measure{std::move(space), weights / sum};
}

Measure apriori_measure(SpacePtr space) {
  Eigen::VectorXd w = space->weights;
  return Measure{std::move(space), std::move(w)};
}

bool same_space(const Measure& a, const Measure& b) {
  if (a.space == b.space) return true;
  return a.space && b.space && a.space->label == b.space->label &&
         a.space->size() == b.space->size();
}

double variational_distance(const Measure& a, const Measure& b) {
  if (!same_space(a, b))
    throw SpaceMismatch("variational_distance: measures on different spaces");
  return 0.5 * (a.weights - b.weights).cwiseAbs().sum();
}

double relative_entropy(const Measure& nu, const Measure& rho) {
  if (!same_space(nu, rho))
    throw SpaceMismatch("relative_entropy: measures on different spaces");
  double s = 0.0;
  for (int i = 0; i < nu.size(); ++i) {
    double p = nu.weights(i);
    if (p <= 0.0) continue;
    double q = rho.weights(i);
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    s += p * std::log(p / q);
  }
  return std::max(s, 0.0);
}

Eigen::VectorXd moment_vector(const Measure& nu, const Eigen::MatrixXd& g_nodes) {
  if (g_nodes.rows() != nu.size())
    throw InvalidParameter("moment_vector: observable rows must match node count");
  return g_nodes.transpose() * nu.weights;
}

}  // namespace mfg
