#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mfg/interaction.hpp"
#include "mfg/kernel.hpp"
#include "mfg/spin_space.hpp"

namespace mfg {

// An interaction bound to a transformation kernel, with the observable
// matrix and norm constants cached for the solver loops.
struct Model {
  Interaction interaction;
  Kernel kernel;
  Eigen::MatrixXd g_s;  // observables at the nodes of S, n_s x l
  InteractionConstants constants;
  double lipschitz = 0.0;  // L = C(F,g) rho_alpha(k)

  const SpinSpace& space_s() const { return *kernel.space_s; }
  const SpinSpace& space_sp() const { return *kernel.space_sp; }
};

// constants defaults to compute_constants(..., probe_count, seed) when a
// closed-form override is not supplied.
Model make_model(Interaction inter, Kernel kernel,
                 std::optional<InteractionConstants> constants = std::nullopt,
                 int probe_count = 4096, std::uint64_t probe_seed = 2024);

// Element of M_{nu'}: fixed second marginal plus a conditional
// alpha-density matrix f(sigma | eta), rows indexed by eta.
struct ConstrainedState {
  Measure nu_prime;
  Eigen::MatrixXd cond_density;  // n_sp x n_s
  SpacePtr space_s;              // initial space carrying alpha
};

// Renormalizes each conditional row against alpha; rows of mass <= 0 or
// far from 1 are rejected.
ConstrainedState make_state(const Model& model, Measure nu_prime,
                            Eigen::MatrixXd cond_density);
ConstrainedState flat_state(const Model& model, Measure nu_prime);
// f(sigma|eta) = k(sigma,eta): the consistent state of the trivial
// interaction.
ConstrainedState kernel_state(const Model& model, Measure nu_prime);
ConstrainedState random_state(const Model& model, Measure nu_prime,
                              std::uint64_t seed);

// pi_1 nu~ as a Measure on S.
Measure first_marginal(const Model& model, const ConstrainedState& state);
// m(pi_1 nu~) in R^l.
Eigen::VectorXd state_moment(const Model& model, const ConstrainedState& state);

// Joint variational distance; handles states with different second
// marginals (used by the continuity estimates).
double state_distance(const ConstrainedState& a, const ConstrainedState& b);

// One application of the constrained first-layer probability kernel:
// f'(sigma|eta) proportional to exp(-Phi^(1)(pi1 nu~, delta_sigma)) k(sigma,eta),
// normalized against alpha per eta. Evaluated with per-eta exponent
// shifts.
ConstrainedState cflpk_apply(const Model& model, const ConstrainedState& state);

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 100000;
  double damping = 1.0;
};

struct FixedPointReport {
  ConstrainedState state;
  int iterations = 0;
  double residual = 0.0;  // sup norm of the consistency defect Y
  bool converged = false;
  double psi_value = 0.0;
  double j_value = 0.0;
  double final_damping = 1.0;
  bool damping_reduced = false;
};

// Damped Picard iteration of the CFLPK. Convergence requires both the
// per-sweep variational distance and the consistency residual to fall
// below tol; 50 consecutive distance increases trigger damping halving.
FixedPointReport fixed_point(const Model& model, const ConstrainedState& f0,
                             const SolverOptions& opts);

struct MultistartOptions {
  int n_starts = 32;
  std::uint64_t seed = 0;
  double cluster_tol = 1e-8;
  bool parallel = true;
  SolverOptions solver{};
};

struct Cluster {
  FixedPointReport rep;  // member with the smallest residual
  int hits = 0;
};

// Runs fixed_point from the flat start, the kernel start and n_starts
// seeded random starts; clusters the converged states by variational
// distance and sorts clusters by Psi ascending.
std::vector<Cluster> multistart(const Model& model, const Measure& nu_prime,
                                const MultistartOptions& opts);

// sup |Y| over the support: zero exactly on consistent states; +infinity
// if f vanishes somewhere the kernel does not.
double consistency_residual(const Model& model, const ConstrainedState& state);

// J_{nu'} = S(nu~ | alpha x nu') + Phi(pi1 nu~) - nu~[log k].
double j_constrained(const Model& model, const ConstrainedState& state);

// Psi_{nu'} = Phi - Phi^(1)(pi1,pi1) - sum_eta nu' log Z_eta. Dominated
// by J and equal to it on consistent states.
double psi(const Model& model, const ConstrainedState& state);

// (1-p) Phi - sum_eta nu' log Z_eta; requires a declared homogeneity
// degree.
double psi_homogeneous(const Model& model, const ConstrainedState& state);

struct TransformedInteraction {
  double phi_k = 0.0;
  std::vector<Cluster> clusters;
  bool lower_confidence = false;  // single cluster found but L >= 1
};

TransformedInteraction transformed_interaction(const Model& model,
                                               const Measure& nu_prime,
                                               const MultistartOptions& opts);

// J'(nu') = S(nu'|alpha') + Phi_k(nu') - c over the supplied grid, with
// c the grid minimum of the first two terms.
std::vector<double> transformed_rate(
    const Model& model, const std::vector<Measure>& nu_prime_grid,
    const MultistartOptions& opts,
    std::vector<TransformedInteraction>* details = nullptr);

// ----- initial (untransformed) system -----

// gamma_1(d sigma | nu): density exp(-Phi^(1)(nu, delta_sigma)) against
// alpha, normalized.
Measure initial_gamma1(const Interaction& inter, const Measure& nu);

struct InitialReport {
  Measure nu;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double value = 0.0;  // S(nu|alpha) + Phi(nu)
};

struct InitialCluster {
  InitialReport rep;
  int hits = 0;
};

std::vector<InitialCluster> initial_fixed_point(const Interaction& inter,
                                                const SpacePtr& space,
                                                const MultistartOptions& opts);

// I_alpha^Phi(nu) = S(nu|alpha) + Phi(nu) - min over the found fixed
// points of the same expression.
double initial_rate(const Interaction& inter, const Measure& nu,
                    const MultistartOptions& opts);

}  // namespace mfg
