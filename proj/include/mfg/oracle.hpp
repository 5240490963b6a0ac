#pragma once

#include <vector>

#include "mfg/cflm.hpp"

namespace mfg {

// One finite-volume conditioning for the two-layer Ising system:
// N sites, boundary eta_{2..N} fixed up to permutation by n_plus, the
// number of eta = +1 among sites 2..N.
struct FiniteNSpec {
  int N = 2;
  double beta = 0.0;
  int p = 2;
  double t = 1.0;
  int n_plus = 0;

  double tau_realized() const {
    return (2.0 * n_plus - (N - 1.0)) / (N - 1.0);
  }
};

// Exact mu'_{1,N}(eta_1 = +1 | eta_{2..N}) by O(N^2) summation grouped
// by the counts of sigma = +1 among eta = +1 and eta = -1 sites, with
// log-space accumulation.
double ising_exact_conditional(const FiniteNSpec& spec);

// Full 2^N enumeration; the grouped sum's own oracle (N <= 20).
double ising_brute_force_conditional(const FiniteNSpec& spec);

struct ConvergenceRow {
  int N = 0;
  double tau_realized = 0.0;
  double exact = 0.0;
  double limit = 0.0;  // gamma'_1(+1 | nu'_{tau_N})
  double error = 0.0;
  double ratio = 0.0;  // e_N / e_{next}, 0 on the last row
};

// Compares the exact finite-N conditional against the limiting kernel
// at the realized tau_N. Refuses in a tied-minimizer regime.
std::vector<ConvergenceRow> convergence_study(double beta, int p, double t,
                                              double tau,
                                              const std::vector<int>& N_list,
                                              const MultistartOptions& opts);

struct PsiTauMinima {
  std::vector<double> minimizers;  // ascending in m'
  std::vector<double> psi_values;
};

// Global minimizers of the single-variable potential psi_tau over
// [-1, 1]: uniform scan plus golden-section refinement to 1e-12;
// returns every minimizer within tie_tol of the best.
PsiTauMinima grid_minimize_psi_tau(double beta, int p, double t, double tau,
                                   int grid_n, double tie_tol = 1e-9);

}  // namespace mfg
