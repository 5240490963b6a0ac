#include <doctest.h>

#include <cmath>

#include "mfg/cflm.hpp"
#include "mfg/errors.hpp"
#include "mfg/gibbs.hpp"
#include "mfg/models.hpp"
#include "test_util.hpp"

using namespace mfg;

namespace {

Model ising_model(double beta, int p, double t) {
  return ising_pspin(beta, p, t).build();
}

double magnetization(const Model& model, const ConstrainedState& st) {
  return state_moment(model, st)(0);
}

// Mean-field equation root by bisection; the tests' independent oracle
// for the converged magnetization.
double mf_root(double beta, double tau, double h, double lo, double hi) {
  auto f = [&](double m) {
    return m - ((1.0 + tau) / 2.0 * std::tanh(beta * m + h) +
                (1.0 - tau) / 2.0 * std::tanh(beta * m - h));
  };
  return test::bisect(f, lo, hi);
}

// Direct evaluation of the variational-principle right side; plain
// loops, independent of the library's evaluators.
double vprin_rhs(const Model& model, const ConstrainedState& st) {
  const auto& alpha = model.space_s().weights;
  const auto& k = model.kernel.density;
  Eigen::VectorXd m = state_moment(model, st);
  Eigen::VectorXd grad = model.interaction.f_grad(m);

  double phi1_diag = grad.dot(m);
  double logk_term = 0.0, log_z = 0.0;
  for (int e = 0; e < st.cond_density.rows(); ++e) {
    double nu = st.nu_prime.weights(e);
    if (nu <= 0.0) continue;
    double z = 0.0;
    for (int s = 0; s < st.cond_density.cols(); ++s) {
      double expo = std::exp(-grad.dot(model.g_s.row(s)));
      z += alpha(s) * expo * k(s, e);
      if (st.cond_density(e, s) > 0.0 && k(s, e) > 0.0)
        logk_term += nu * alpha(s) * st.cond_density(e, s) * std::log(k(s, e));
    }
    log_z += nu * std::log(z);
  }
  return -phi1_diag + logk_term - log_z;
}

double entropy_vs_alpha_nu(const Model& model, const ConstrainedState& st) {
  const auto& alpha = model.space_s().weights;
  double s_val = 0.0;
  for (int e = 0; e < st.cond_density.rows(); ++e) {
    double nu = st.nu_prime.weights(e);
    if (nu <= 0.0) continue;
    for (int s = 0; s < st.cond_density.cols(); ++s) {
      double f = st.cond_density(e, s);
      if (f > 0.0) s_val += nu * alpha(s) * f * std::log(f);
    }
  }
  return s_val;
}

}  // namespace

TEST_CASE("cflpk_apply reduces to the kernel at zero interaction") {
  Model model = ising_model(0.0, 2, 0.7);
  Measure nup = tau_measure(model.kernel.space_sp, 0.3);
  ConstrainedState in = random_state(model, nup, 17);
  ConstrainedState out = cflpk_apply(model, in);
  CHECK((out.cond_density - model.kernel.density.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
}

TEST_CASE("cflpk_apply at zero magnetization returns the kernel") {
  // flat conditional density has first-marginal magnetization 0, so the
  // derivative kernel vanishes even at beta > 0
  Model model = ising_model(0.5, 2, std::log(2.0) / 2.0);
  Measure nup = tau_measure(model.kernel.space_sp, 0.0);
  ConstrainedState out = cflpk_apply(model, flat_state(model, nup));
  CHECK((out.cond_density - model.kernel.density.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
}

TEST_CASE("cflpk_apply with the identity coarse-graining concentrates on classes") {
  auto sp = make_circle(16);
  std::vector<int> singletons(16);
  for (int i = 0; i < 16; ++i) singletons[i] = i;
  auto rot = rotator(2, 0.8, 0.1, 16);
  Model model = make_model(rot.interaction, coarse_grain_kernel(sp, singletons),
                           rot.exact_constants);
  Measure nup = test::random_measure(model.kernel.space_sp, 3);
  ConstrainedState out = cflpk_apply(model, random_state(model, nup, 4));
  for (int e = 0; e < 16; ++e)
    for (int s = 0; s < 16; ++s)
      if (s != e) CHECK(out.cond_density(e, s) == 0.0);
}

TEST_CASE("cflpk_apply preserves membership in M_nu' and positivity") {
  Model model = ising_model(1.2, 2, 0.5);
  Measure nup = tau_measure(model.kernel.space_sp, -0.4);
  ConstrainedState st = random_state(model, nup, 9);
  ConstrainedState out = cflpk_apply(model, st);
  CHECK((out.nu_prime.weights - nup.weights).cwiseAbs().maxCoeff() == 0.0);
  const auto& alpha = model.space_s().weights;
  for (int e = 0; e < out.cond_density.rows(); ++e) {
    CHECK(out.cond_density.row(e).dot(alpha) == doctest::Approx(1.0).epsilon(1e-12));
    for (int s = 0; s < out.cond_density.cols(); ++s)
      CHECK(out.cond_density(e, s) > 0.0);
  }
}

TEST_CASE("fixed point at zero interaction converges immediately") {
  Model model = ising_model(0.0, 2, 0.9);
  Measure nup = tau_measure(model.kernel.space_sp, 0.6);
  auto rep = fixed_point(model, random_state(model, nup, 21), SolverOptions{});
  CHECK(rep.converged);
  CHECK(rep.iterations <= 2);
  CHECK((rep.state.cond_density - model.kernel.density.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-13);
}

TEST_CASE("converged magnetization solves the mean-field equation") {
  double t = std::log(2.0) / 2.0, h = spin_flip_field(t);
  Model model = ising_model(0.5, 2, t);
  Measure nup = tau_measure(model.kernel.space_sp, 0.5);
  auto rep = fixed_point(model, kernel_state(model, nup), SolverOptions{});
  REQUIRE(rep.converged);
  double oracle = mf_root(0.5, 0.5, h, -1.0, 1.0);
  CHECK(magnetization(model, rep.state) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("zero interaction magnetization is tau tanh(h_t)") {
  double t = std::log(2.0) / 2.0;
  Model model = ising_model(0.0, 2, t);
  Measure nup = tau_measure(model.kernel.space_sp, 0.5);
  auto rep = fixed_point(model, flat_state(model, nup), SolverOptions{});
  REQUIRE(rep.converged);
  // tanh(log(1/3)/2) = -1/2 exactly
  CHECK(magnetization(model, rep.state) == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("multistart in the contraction regime finds one cluster") {
  auto rot = rotator(2, 0.2, 0.1, 32);
  Model model = rot.build();
  CHECK(model.lipschitz < 1.0);
  MultistartOptions opts;
  opts.n_starts = 8;
  opts.seed = 5;
  for (int trial = 0; trial < 3; ++trial) {
    Measure nup = test::random_measure(model.kernel.space_sp, 60 + trial);
    auto clusters = multistart(model, nup, opts);
    CHECK(clusters.size() == 1);
    CHECK(clusters.front().hits == opts.n_starts + 2);
  }
}

TEST_CASE("multistart resolves the symmetric double minimum") {
  Model model = ising_model(2.0, 2, 5.0);
  Measure nup = tau_measure(model.kernel.space_sp, 0.0);
  MultistartOptions opts;
  opts.n_starts = 16;
  opts.seed = 11;
  auto clusters = multistart(model, nup, opts);
  REQUIRE(clusters.size() >= 2);
  // the two Psi-minimal clusters tie and carry opposite magnetizations
  CHECK(std::abs(clusters[1].rep.psi_value - clusters[0].rep.psi_value) <= 1e-9);
  double m0 = magnetization(model, clusters[0].rep.state);
  double m1 = magnetization(model, clusters[1].rep.state);
  CHECK(std::abs(m0) > 0.9);
  CHECK(m0 == doctest::Approx(-m1).epsilon(1e-7));
  // bisection oracle for the nontrivial root of m = rhs(m)
  double h = spin_flip_field(5.0);
  double oracle = mf_root(2.0, 0.0, h, 0.1, 1.0);
  CHECK(std::abs(m0) == doctest::Approx(std::abs(oracle)).epsilon(1e-8));
}

TEST_CASE("multistart at zero interaction returns the kernel state") {
  Model model = ising_model(0.0, 2, 1.0);
  Measure nup = tau_measure(model.kernel.space_sp, -0.2);
  MultistartOptions opts;
  opts.n_starts = 4;
  auto clusters = multistart(model, nup, opts);
  REQUIRE(clusters.size() == 1);
  CHECK((clusters[0].rep.state.cond_density - model.kernel.density.transpose())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("consistency residual") {
  double t = std::log(2.0) / 2.0;

  // converged states sit below 10 tol
  Model model = ising_model(0.8, 2, t);
  Measure nup = tau_measure(model.kernel.space_sp, 0.3);
  SolverOptions sopts;
  auto rep = fixed_point(model, kernel_state(model, nup), sopts);
  REQUIRE(rep.converged);
  CHECK(consistency_residual(model, rep.state) <= 10.0 * sopts.tol);

  // f = k with no interaction is exactly consistent
  Model free_model = ising_model(0.0, 2, t);
  CHECK(consistency_residual(free_model, kernel_state(free_model, nup)) <= 1e-13);

  // flat density against the spin-flip kernel: |h_t| + log cosh h_t
  double h = spin_flip_field(t);
  double expected = std::abs(h) + std::log(std::cosh(h));
  CHECK(consistency_residual(free_model, flat_state(free_model, nup)) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("Psi is dominated by J and coincides on fixed points") {
  double t = std::log(2.0) / 2.0;
  Model model = ising_model(0.9, 2, t);
  for (int nu_trial = 0; nu_trial < 5; ++nu_trial) {
    Measure nup = test::random_measure(model.kernel.space_sp, 500 + nu_trial);
    for (int st_trial = 0; st_trial < 20; ++st_trial) {
      ConstrainedState st =
          random_state(model, nup, 7000 + 100 * nu_trial + st_trial);
      CHECK(psi(model, st) <= j_constrained(model, st) + 1e-10);
    }
    auto rep = fixed_point(model, kernel_state(model, nup), SolverOptions{});
    REQUIRE(rep.converged);
    CHECK(std::abs(rep.psi_value - rep.j_value) <= 1e-9);
    // the entropy attains the variational-principle bound
    CHECK(entropy_vs_alpha_nu(model, rep.state) ==
          doctest::Approx(vprin_rhs(model, rep.state)).epsilon(1e-9));
  }
}

TEST_CASE("homogeneous form of Psi agrees with the generic one") {
  for (int p : {2, 3}) {
    Model model = ising_model(0.7, p, 0.8);
    Measure nup = tau_measure(model.kernel.space_sp, 0.25);
    for (int trial = 0; trial < 50; ++trial) {
      ConstrainedState st = random_state(model, nup, 900 + trial);
      CHECK(psi(model, st) ==
            doctest::Approx(psi_homogeneous(model, st)).epsilon(1e-9));
    }
  }
  auto rot = rotator(2, 0.4, 0.2, 16);
  Model rmodel = rot.build();
  Measure rnup = test::random_measure(rmodel.kernel.space_sp, 31);
  for (int trial = 0; trial < 20; ++trial) {
    ConstrainedState st = random_state(rmodel, rnup, 1300 + trial);
    CHECK(psi(rmodel, st) ==
          doctest::Approx(psi_homogeneous(rmodel, st)).epsilon(1e-9));
  }
}

TEST_CASE("empirical contraction under the certified constant") {
  auto rot = rotator(2, 0.2, 0.1, 32);
  Model model = rot.build();
  double L = model.lipschitz;
  Measure nup = test::random_measure(model.kernel.space_sp, 77);
  for (int trial = 0; trial < 50; ++trial) {
    ConstrainedState a = random_state(model, nup, 4000 + trial);
    ConstrainedState b = random_state(model, nup, 5000 + trial);
    double before = state_distance(a, b);
    double after = state_distance(cflpk_apply(model, a), cflpk_apply(model, b));
    CHECK(after <= L * before + 1e-10);
  }
}

TEST_CASE("damping does not change the limit") {
  Model model = ising_model(1.1, 2, 0.6);
  Measure nup = tau_measure(model.kernel.space_sp, 0.2);
  SolverOptions fast;  // damping 1
  SolverOptions slow;
  slow.damping = 0.4;
  auto a = fixed_point(model, kernel_state(model, nup), fast);
  auto b = fixed_point(model, kernel_state(model, nup), slow);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(state_distance(a.state, b.state) <= 1e-8);
}

TEST_CASE("transformed interaction") {
  double t = std::log(2.0) / 2.0;

  // zero interaction: Phi_k vanishes by the marginal condition
  Model free_model = ising_model(0.0, 2, t);
  Measure nup = tau_measure(free_model.kernel.space_sp, 0.5);
  MultistartOptions opts;
  opts.n_starts = 4;
  auto ti = transformed_interaction(free_model, nup, opts);
  CHECK(std::abs(ti.phi_k) <= 1e-12);
  CHECK(!ti.lower_confidence);

  // the symmetric double minimum shares its Psi value
  Model dbl = ising_model(2.0, 2, 5.0);
  Measure nup0 = tau_measure(dbl.kernel.space_sp, 0.0);
  MultistartOptions opts2;
  opts2.n_starts = 12;
  opts2.seed = 3;
  auto ti2 = transformed_interaction(dbl, nup0, opts2);
  REQUIRE(ti2.clusters.size() >= 2);
  CHECK(ti2.phi_k == doctest::Approx(ti2.clusters[1].rep.psi_value).epsilon(1e-9));
}

TEST_CASE("transformed rate function at zero interaction is the entropy") {
  Model model = ising_model(0.0, 2, 0.5);
  MultistartOptions opts;
  opts.n_starts = 2;
  std::vector<Measure> grid;
  std::vector<double> taus;
  for (int i = 0; i <= 20; ++i) {
    double tau = -1.0 + 0.1 * i;
    taus.push_back(tau);
    grid.push_back(tau_measure(model.kernel.space_sp, tau));
  }
  auto jp = transformed_rate(model, grid, opts);
  Measure ref = apriori_measure(model.kernel.space_sp);
  double min_v = 1e300;
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(jp[i] == doctest::Approx(relative_entropy(grid[i], ref)).epsilon(1e-10));
    min_v = std::min(min_v, jp[i]);
  }
  CHECK(min_v == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("initial system fixed points") {
  // Curie-Weiss beta = 2: nontrivial pair m = +-0.957504
  auto preset = ising_pspin(2.0, 2, 1.0);
  auto sp = preset.space_s;
  MultistartOptions opts;
  opts.n_starts = 12;
  opts.seed = 19;
  auto clusters = initial_fixed_point(preset.interaction, sp, opts);
  REQUIRE(clusters.size() >= 2);
  double oracle = test::bisect(
      [](double m) { return m - std::tanh(2.0 * m); }, 0.1, 1.0);
  CHECK(oracle == doctest::Approx(0.957504).epsilon(1e-6));
  Eigen::MatrixXd g = sp->nodes;
  double m0 = moment_vector(clusters[0].rep.nu, g)(0);
  double m1 = moment_vector(clusters[1].rep.nu, g)(0);
  CHECK(std::abs(m0) == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(m0 == doctest::Approx(-m1).epsilon(1e-8));

  // subcritical: unique fixed point at zero magnetization
  auto sub = ising_pspin(0.5, 2, 1.0);
  auto sub_clusters = initial_fixed_point(sub.interaction, sub.space_s, opts);
  REQUIRE(sub_clusters.size() == 1);
  CHECK(std::abs(moment_vector(sub_clusters[0].rep.nu, g)(0)) <= 1e-10);

  // zero interaction: gamma_1 is alpha for every nu
  auto free_preset = ising_pspin(0.0, 2, 1.0);
  Measure nu = test::random_measure(sp, 41);
  Measure g1 = initial_gamma1(free_preset.interaction, nu);
  CHECK((g1.weights - sp->weights).cwiseAbs().maxCoeff() <= 1e-14);

  // rate at a fixed point is zero, positive elsewhere
  double rate_at_min = initial_rate(sub.interaction, sub_clusters[0].rep.nu, opts);
  CHECK(std::abs(rate_at_min) <= 1e-10);
  CHECK(initial_rate(sub.interaction, test::random_measure(sp, 53), opts) > 0.0);
}

TEST_CASE("degenerate nu' rows are carried without entering sums") {
  Model model = ising_model(0.8, 2, 0.7);
  Measure nup = tau_measure(model.kernel.space_sp, 1.0);  // nu'(-1) = 0
  auto rep = fixed_point(model, kernel_state(model, nup), SolverOptions{});
  CHECK(rep.converged);
  CHECK(rep.state.cond_density.rows() == 2);
  double h = spin_flip_field(0.7);
  double oracle = mf_root(0.8, 1.0, h, -1.0, 1.0);
  CHECK(magnetization(model, rep.state) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("solver options are validated") {
  Model model = ising_model(0.5, 2, 1.0);
  Measure nup = tau_measure(model.kernel.space_sp, 0.0);
  SolverOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(fixed_point(model, flat_state(model, nup), bad), InvalidParameter);
  bad.tol = 1e-12;
  bad.damping = 1.5;
  CHECK_THROWS_AS(fixed_point(model, flat_state(model, nup), bad), InvalidParameter);
  MultistartOptions mbad;
  mbad.n_starts = 0;
  CHECK_THROWS_AS(multistart(model, nup, mbad), InvalidParameter);
}

TEST_CASE("oscillating iterations trigger automatic damping") {
  // a sign-flipped quadratic drives the Picard map into a period-2
  // cycle at full damping
  Interaction antiferro;
  antiferro.l = 1;
  antiferro.observables = coordinate_observables();
  antiferro.f = [](const Eigen::VectorXd& m) { return 1.5 * m(0) * m(0); };
  antiferro.f_grad = [](const Eigen::VectorXd& m) {
    return (3.0 * m).eval();
  };
  antiferro.f_hess = [](const Eigen::VectorXd&) {
    return (3.0 * Eigen::MatrixXd::Identity(1, 1)).eval();
  };
  Model model = make_model(antiferro, spin_flip_kernel(0.5), std::nullopt, 256);
  Measure nup = tau_measure(model.kernel.space_sp, 0.0);
  auto rep = fixed_point(model, random_state(model, nup, 123), SolverOptions{});
  CHECK(rep.converged);
  CHECK(rep.damping_reduced);
  CHECK(rep.final_damping < 1.0);
}
