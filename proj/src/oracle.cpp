#include "mfg/oracle.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/gibbs.hpp"
#include "mfg/models.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

void validate(const FiniteNSpec& s) {
  if (s.N < 2) throw InvalidParameter("FiniteNSpec: N >= 2");
  if (s.N > 20000) throw ResourceLimit("FiniteNSpec: N > 20000");
  if (s.n_plus < 0 || s.n_plus > s.N - 1)
    throw InvalidParameter("FiniteNSpec: n_plus out of range");
  if (s.p < 1 || s.beta < 0.0 || s.t <= 0.0)
    throw InvalidParameter("FiniteNSpec: invalid parameters");
}

// Two-pass log-sum-exp: a shared maximum over the numerator and the
// partition sum, then plain accumulation. visit(fn) must emit every
// (log weight, eta_1 branch) term.
double conditional_from_terms(
    const std::function<void(const std::function<void(double, bool)>&)>& visit) {
  double max_term = -std::numeric_limits<double>::infinity();
  visit([&](double term, bool) { max_term = std::max(max_term, term); });
  // Kahan-compensated sums keep the error flat in the term count.
  double num = 0.0, num_c = 0.0, den = 0.0, den_c = 0.0;
  auto add = [](double& sum, double& comp, double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  visit([&](double term, bool eta1_plus) {
    double w = std::exp(term - max_term);
    add(den, den_c, w);
    if (eta1_plus) add(num, num_c, w);
  });
  return num / den;
}

}  // namespace

double ising_exact_conditional(const FiniteNSpec& spec) {
  validate(spec);
  const int N = spec.N, np = spec.n_plus, nm = N - 1 - np;
  const double h = spin_flip_field(spec.t);
  const double beta_over_p = spec.beta / spec.p;

  // log binomial tables for the two eta-groups among sites 2..N
  std::vector<double> lg(N + 1);
  for (int i = 0; i <= N; ++i) lg[i] = std::lgamma(i + 1.0);
  auto log_choose = [&](int n, int k) { return lg[n] - lg[k] - lg[n - k]; };

  // a = #{sigma=+1 on eta=+1 sites}, b = #{sigma=+1 on eta=-1 sites},
  // sigma_1 and eta_1 handled separately.
  auto visit = [&](const std::function<void(double, bool)>& fn) {
    for (int s1 = 0; s1 < 2; ++s1) {
      const int sigma1 = s1 == 0 ? 1 : -1;
      for (int a = 0; a <= np; ++a) {
        const double lca = log_choose(np, a);
        for (int b = 0; b <= nm; ++b) {
          double m = (2.0 * (a + b + (sigma1 > 0 ? 1 : 0)) - N) / N;
          double boundary_field = 2.0 * a - 2.0 * b - 2.0 * np + (N - 1.0);
          double base = N * beta_over_p * ipow(m, spec.p) + lca +
                        log_choose(nm, b) + h * boundary_field;
          fn(base + h * sigma1, true);    // eta_1 = +1
          fn(base - h * sigma1, false);   // eta_1 = -1
        }
      }
    }
  };
  return conditional_from_terms(visit);
}

double ising_brute_force_conditional(const FiniteNSpec& spec) {
  validate(spec);
  if (spec.N > 20) throw ResourceLimit("brute force limited to N <= 20");
  const int N = spec.N;
  const double h = spin_flip_field(spec.t);

  // Site 1 has eta_1 = +-1; sites 2..n_plus+1 carry eta = +1, the rest -1.
  auto visit = [&](const std::function<void(double, bool)>& fn) {
    for (long cfg = 0; cfg < (1L << N); ++cfg) {
      int plus = 0;
      double pair_field = 0.0;
      for (int i = 0; i < N; ++i) {
        int sigma = (cfg >> i) & 1 ? 1 : -1;
        if (sigma > 0) ++plus;
        if (i >= 1) {
          int eta = i <= spec.n_plus ? 1 : -1;
          pair_field += sigma * eta;
        }
      }
      double m = (2.0 * plus - N) / N;
      int sigma1 = (cfg & 1) ? 1 : -1;
      double base =
          N * (spec.beta / spec.p) * ipow(m, spec.p) + h * pair_field;
      fn(base + h * sigma1, true);
      fn(base - h * sigma1, false);
    }
  };
  return conditional_from_terms(visit);
}

PsiTauMinima grid_minimize_psi_tau(double beta, int p, double t, double tau,
                                   int grid_n, double tie_tol) {
  if (grid_n < 1001)
    throw InvalidParameter("grid_minimize_psi_tau: grid_n >= 1001");
  ModelPreset preset = ising_pspin(beta, p, t);
  auto psi_of = [&](double m) {
    return closed_form(preset, "psi_tau", {{"m_prime", m}, {"tau", tau}});
  };

  std::vector<double> xs(grid_n), vs(grid_n);
  for (int i = 0; i < grid_n; ++i) {
    xs[i] = -1.0 + 2.0 * i / (grid_n - 1);
    vs[i] = psi_of(xs[i]);
  }

  // At beta = 0 (or p = 1) the potential is constant in m' and carries
  // no information; the minimizer is then the unique solution of the
  // mean-field equation, whose right side no longer depends on m'.
  double span = *std::max_element(vs.begin(), vs.end()) -
                *std::min_element(vs.begin(), vs.end());
  if (span < tie_tol) {
    double m = 0.0;
    for (int it = 0; it < 200; ++it)
      m = closed_form(preset, "mf_rhs", {{"m_prime", m}, {"tau", tau}});
    return PsiTauMinima{{m}, {psi_of(m)}};
  }

  // Local minima (including endpoints), then golden-section refinement.
  constexpr double kGold = 0.6180339887498949;
  std::vector<double> mins, vals;
  auto refine = [&](double lo, double hi) {
    double a = lo, b = hi;
    double x1 = b - kGold * (b - a), x2 = a + kGold * (b - a);
    double f1 = psi_of(x1), f2 = psi_of(x2);
    while (b - a > 1e-12) {
      if (f1 < f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - kGold * (b - a); f1 = psi_of(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + kGold * (b - a); f2 = psi_of(x2);
      }
    }
    double m = 0.5 * (a + b);
    mins.push_back(m);
    vals.push_back(psi_of(m));
  };
  for (int i = 0; i < grid_n; ++i) {
    bool left_ok = i == 0 || vs[i] <= vs[i - 1];
    bool right_ok = i == grid_n - 1 || vs[i] <= vs[i + 1];
    if (left_ok && right_ok)
      refine(xs[std::max(0, i - 1)], xs[std::min(grid_n - 1, i + 1)]);
  }

  double best = *std::min_element(vals.begin(), vals.end());
  PsiTauMinima out;
  for (size_t i = 0; i < mins.size(); ++i) {
    if (vals[i] - best >= tie_tol) continue;
    // dedup refinements that landed on the same minimizer
    bool dup = false;
    for (double m : out.minimizers)
      if (std::abs(m - mins[i]) < 1e-9) dup = true;
    if (!dup) {
      out.minimizers.push_back(mins[i]);
      out.psi_values.push_back(vals[i]);
    }
  }
  // ascending in m'
  std::vector<size_t> order(out.minimizers.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return out.minimizers[a] < out.minimizers[b];
  });
  PsiTauMinima sorted;
  for (size_t i : order) {
    sorted.minimizers.push_back(out.minimizers[i]);
    sorted.psi_values.push_back(out.psi_values[i]);
  }
  return sorted;
}

std::vector<ConvergenceRow> convergence_study(double beta, int p, double t,
                                              double tau,
                                              const std::vector<int>& N_list,
                                              const MultistartOptions& opts) {
  // Uniqueness first: a tied double minimum makes the limit undefined.
  PsiTauMinima minima = grid_minimize_psi_tau(beta, p, t, tau, 2001);
  if (minima.minimizers.size() != 1)
    throw NonUniqueMinimizer(std::vector<Cluster>{});

  ModelPreset preset = ising_pspin(beta, p, t);
  Model model = preset.build();

  std::vector<ConvergenceRow> rows(N_list.size());
  parallel_for_index(static_cast<int>(N_list.size()), [&](int i) {
    FiniteNSpec spec;
    spec.N = N_list[i];
    spec.beta = beta;
    spec.p = p;
    spec.t = t;
    // nearest realizable boundary: tau lives on a lattice at finite N
    spec.n_plus = static_cast<int>(std::lround((spec.N - 1) * (1.0 + tau) / 2.0));
    spec.n_plus = std::clamp(spec.n_plus, 0, spec.N - 1);

    ConvergenceRow row;
    row.N = spec.N;
    row.tau_realized = spec.tau_realized();
    row.exact = ising_exact_conditional(spec);

    MultistartOptions local = opts;
    local.parallel = false;
    local.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(i));
    Measure nu_prime = tau_measure(model.kernel.space_sp, row.tau_realized);
    Measure limit = gamma1_prime(model, nu_prime, local);
    row.limit = limit.weights(0);  // node 0 is +1
    row.error = std::abs(row.exact - row.limit);
    rows[i] = row;
  });
  for (size_t i = 0; i + 1 < rows.size(); ++i)
    rows[i].ratio = rows[i + 1].error > 0.0 ? rows[i].error / rows[i + 1].error : 0.0;
  return rows;
}

}  // namespace mfg
