#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace mfg {

// A discretized single-site state space: a finite node set carrying
// a-priori weights and a metric. Continuous spaces (circle, sphere)
// are represented by fixed deterministic quadrature grids, so every
// integral downstream is a weighted sum over nodes.
struct SpinSpace {
  std::string label;
  Eigen::MatrixXd nodes;    // n x dim coordinates
  Eigen::VectorXd weights;  // a-priori weights, sum to 1
  Eigen::MatrixXd dist;     // pairwise metric, n x n
  std::string metric_kind;  // "chordal" or "explicit"
  // |raw weight sum - 1| absorbed by renormalization at construction.
  double normalization_correction = 0.0;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(nodes.cols()); }
};

using SpacePtr = std::shared_ptr<const SpinSpace>;

// Validates invariants (>= 2 nodes, weight sum within 1e-12 before
// renormalization, symmetric metric vanishing exactly on the diagonal)
// and renormalizes the weights.
SpacePtr make_space(std::string label, Eigen::MatrixXd nodes,
                    Eigen::VectorXd weights, Eigen::MatrixXd dist,
                    std::string metric_kind = "explicit");

// {+1, -1} with uniform weights and d(s, s') = |s - s'|.
SpacePtr make_two_point();

// Equally spaced angles, uniform weights, chordal metric.
SpacePtr make_circle(int n_nodes);

// Gauss-Legendre nodes in the polar cosine crossed with a uniform
// azimuth grid; product weights; chordal metric.
SpacePtr make_sphere(int n_polar, int n_azimuth);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w);

struct Measure {
  SpacePtr space;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(weights.size()); }
};

// Validates nonnegativity and the weight-sum tolerance, then
// renormalizes exactly.
Measure make_measure(SpacePtr space, Eigen::VectorXd weights,
                     double sum_tol = 1e-12);

// Uniform mixture of the node Dirac masses with the a-priori weights,
// i.e. the measure equal to the space's alpha.
Measure apriori_measure(SpacePtr space);

bool same_space(const Measure& a, const Measure& b);

// (a - b)^+(S) = half the total variation; a metric on P(space), in [0,1].
double variational_distance(const Measure& a, const Measure& b);

// S(nu | rho) = sum nu log(nu/rho); +infinity on absolute-continuity
// failure; 0 iff nu = rho.
double relative_entropy(const Measure& nu, const Measure& rho);

// Component j of the result is sum_node nu * g_j; g_nodes is n x l.
Eigen::VectorXd moment_vector(const Measure& nu, const Eigen::MatrixXd& g_nodes);

}  // namespace mfg
