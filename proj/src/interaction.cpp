#include "mfg/interaction.hpp"

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/rng.hpp"

namespace mfg {

Eigen::MatrixXd Interaction::observable_matrix(const SpinSpace& space) const {
  Eigen::MatrixXd g(space.size(), l);
  for (int i = 0; i < space.size(); ++i) {
    Eigen::VectorXd gi = observables(space.nodes.row(i).transpose());
    if (gi.size() != l)
      throw InvalidParameter("Interaction: observable dimension mismatch");
    g.row(i) = gi.transpose();
  }
  return g;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> coordinate_observables() {
  return [](const Eigen::VectorXd& x) { return x; };
}

double phi(const Interaction& inter, const Measure& nu) {
  Eigen::MatrixXd g = inter.observable_matrix(*nu.space);
  return inter.f(moment_vector(nu, g));
}

double phi_deriv(const Interaction& inter, const Measure& nu, int node) {
  Eigen::MatrixXd g = inter.observable_matrix(*nu.space);
  Eigen::VectorXd grad = inter.f_grad(moment_vector(nu, g));
  return grad.dot(g.row(node));
}

InteractionConstants compute_constants(const Interaction& inter,
                                       const SpinSpace& space,
                                       int probe_count, std::uint64_t seed) {
  if (probe_count < 256)
    throw InvalidParameter("compute_constants: probe_count must be >= 256");

  const int n = space.size();
  const Eigen::MatrixXd g = inter.observable_matrix(space);

  InteractionConstants c;
  c.probe_count = probe_count;
  c.seed = seed;

  // delta(g): sum of component oscillations over the node set.
  for (int j = 0; j < inter.l; ++j) {
    double osc = g.col(j).maxCoeff() - g.col(j).minCoeff();
    if (osc == 0.0)
      throw DegenerateObservable("compute_constants: observable component " +
                                 std::to_string(j) + " is constant on the nodes");
    c.delta_g += osc;
  }

  // ||g||_{d,2} over node pairs.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r = (g.row(i) - g.row(j)).norm() / space.dist(i, j);
      if (r > c.g_lip) c.g_lip = r;
    }

  // Probe set for D_g = conv{g(node)}: all vertices plus seeded random
  // convex combinations (flat Dirichlet weights).
  Rng rng(seed);
  auto probe = [&](const Eigen::VectorXd& m) {
    Eigen::MatrixXd h = inter.f_hess(m);
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw InvalidParameter("compute_constants: Hessian not symmetric at a probe");
    double hm = h.cwiseAbs().maxCoeff();
    if (hm > c.hess_max) c.hess_max = hm;

    Eigen::VectorXd field = g * inter.f_grad(m);  // sum_j F_j(m) g_j(sigma)
    double gap = field.maxCoeff() - field.minCoeff();
    if (gap > c.delta_hat_phi1) c.delta_hat_phi1 = gap;

    if (inter.homogeneity_degree) {
      double p = *inter.homogeneity_degree;
      double s = 0.25 + 0.75 * rng.uniform();  // t in (0, 1]
      double lhs = inter.f(s * m);
      double rhs = std::pow(s, p) * inter.f(m);
      if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(rhs)))
        throw InvalidParameter(
            "compute_constants: declared homogeneity degree fails at a probe");
    }
  };

  for (int i = 0; i < n; ++i) probe(g.row(i).transpose());
  Eigen::VectorXd w(n);
  for (int p = 0; p < probe_count; ++p) {
    for (int i = 0; i < n; ++i) w(i) = -std::log(1.0 - rng.uniform());
    w /= w.sum();
    probe(g.transpose() * w);
  }

  c.c_of_f_g = combine_c_of_f_g(c.hess_max, c.delta_g, c.g_lip, c.delta_hat_phi1);
  return c;
}

}  // namespace mfg
