#include <doctest.h>

#include <cmath>

#include "mfg/errors.hpp"
#include "mfg/gibbs.hpp"
#include "mfg/models.hpp"
#include "test_util.hpp"

using namespace mfg;

namespace {

std::vector<int> arc_partition(int n_nodes, int n_arcs) {
  std::vector<int> labels(n_nodes);
  for (int i = 0; i < n_nodes; ++i) labels[i] = (i * n_arcs) / n_nodes;
  return labels;
}

}  // namespace

TEST_CASE("ising closed forms") {
  auto preset = ising_pspin(0.5, 2, std::log(2.0) / 2.0);

  CHECK(closed_form(preset, "h_t", {{"t", std::log(2.0) / 2.0}}) ==
        doctest::Approx(-0.549306).epsilon(1e-6));

  // spin-flip symmetry of the potential: psi(m, tau) = psi(-m, -tau)
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 4; ++j) {
      double m = -1.0 + 0.1 * i, tau = -1.0 + 0.5 * j;
      double a = closed_form(preset, "psi_tau", {{"m_prime", m}, {"tau", tau}});
      double b = closed_form(preset, "psi_tau", {{"m_prime", -m}, {"tau", -tau}});
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }

  // beta = 0 collapses the mean-field equation to tau tanh(h_t)
  auto free_preset = ising_pspin(0.0, 2, std::log(2.0) / 2.0);
  double expect = 0.5 * std::tanh(spin_flip_field(std::log(2.0) / 2.0));
  for (double m : {-0.8, 0.0, 0.9})
    CHECK(closed_form(free_preset, "mf_rhs", {{"m_prime", m}, {"tau", 0.5}}) ==
          doctest::Approx(expect).epsilon(1e-14));

  // stationarity of psi_tau at the mean-field root (p = 2)
  double h = spin_flip_field(std::log(2.0) / 2.0);
  double root = test::bisect(
      [&](double m) {
        return m - (0.75 * std::tanh(0.5 * m + h) + 0.25 * std::tanh(0.5 * m - h));
      },
      -1.0, 1.0);
  CHECK(std::abs(closed_form(preset, "stationarity_residual",
                             {{"m_prime", root}, {"tau", 0.5}})) <= 1e-10);
  // and a numerical derivative agrees with the residual away from roots
  double m0 = 0.3, eps = 1e-6;
  double dpsi = (closed_form(preset, "psi_tau", {{"m_prime", m0 + eps}, {"tau", 0.5}}) -
                 closed_form(preset, "psi_tau", {{"m_prime", m0 - eps}, {"tau", 0.5}})) /
                (2.0 * eps);
  CHECK(dpsi == doctest::Approx(closed_form(preset, "stationarity_residual",
                                            {{"m_prime", m0}, {"tau", 0.5}}))
                    .epsilon(1e-5));

  CHECK_THROWS_AS(ising_pspin(0.5, 0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(ising_pspin(-0.1, 2, 1.0), InvalidParameter);
  CHECK_THROWS_AS(ising_pspin(0.5, 2, 1e-9), InvalidParameter);
  CHECK_THROWS_AS(closed_form(preset, "no_such_form", {}), InvalidParameter);
}

TEST_CASE("preset constants agree with sampled estimation") {
  // quadratic interactions: vertex evaluation is exact
  auto ising = ising_pspin(0.7, 2, 1.0);
  auto ci = compute_constants(ising.interaction, *ising.space_s, 4096, 11);
  CHECK(ci.c_of_f_g == doctest::Approx(ising.exact_constants->c_of_f_g).epsilon(1e-9));
  CHECK(ci.hess_max == doctest::Approx(ising.exact_constants->hess_max).epsilon(1e-9));

  auto rot = rotator(2, 0.2, 0.1, 128);
  auto cr = compute_constants(rot.interaction, *rot.space_s, 4096, 11);
  CHECK(cr.delta_g == doctest::Approx(rot.exact_constants->delta_g).epsilon(1e-9));
  CHECK(cr.c_of_f_g == doctest::Approx(rot.exact_constants->c_of_f_g).epsilon(1e-9));
  // the coarse 2% contract also holds
  CHECK(std::abs(cr.c_of_f_g - rot.exact_constants->c_of_f_g) <=
        0.02 * rot.exact_constants->c_of_f_g);
}

TEST_CASE("rotator closed-form Lipschitz constant") {
  auto rot = rotator(2, 0.2, 0.1);
  ParamMap args{{"q", 2.0}, {"beta", 0.2}, {"t", 0.1}};
  CHECK(closed_form(rot, "L", args) == doctest::Approx(0.852577).epsilon(1e-5));

  // monotone in each argument
  double base = closed_form(rot, "L", args);
  CHECK(closed_form(rot, "L", {{"q", 3.0}, {"beta", 0.2}, {"t", 0.1}}) > base);
  CHECK(closed_form(rot, "L", {{"q", 2.0}, {"beta", 0.3}, {"t", 0.1}}) > base);
  CHECK(closed_form(rot, "L", {{"q", 2.0}, {"beta", 0.2}, {"t", 0.2}}) > base);

  // t -> infinity limit: 4 sqrt(2) q beta e^beta
  double limit = 4.0 * std::sqrt(2.0) * 2.0 * 0.2 * std::exp(0.2);
  CHECK(closed_form(rot, "L", {{"q", 2.0}, {"beta", 0.2}, {"t", 1e6}}) ==
        doctest::Approx(limit).epsilon(1e-12));

  // rho_alpha_k closed form
  CHECK(closed_form(rot, "rho_alpha_k", {{"t", 0.1}}) ==
        doctest::Approx(std::sqrt(2.0 * (1.0 - std::exp(-0.1)))).epsilon(1e-14));
  CHECK(closed_form(rot, "rho_alpha", {}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("general q serves closed forms but no grid") {
  auto rot = rotator(5, 0.1, 0.2);
  CHECK(closed_form(rot, "L", {{"q", 5.0}, {"beta", 0.1}, {"t", 0.2}}) > 0.0);
  CHECK_THROWS_AS(rot.kernel_builder(), GridUnsupported);
}

TEST_CASE("pipeline L matches the closed form across the grid study") {
  for (double beta : {0.1, 0.2}) {
    for (double t : {0.01, 0.1, 1.0}) {
      auto rot = rotator(2, beta, t, 128);
      Model model = make_model(rot.interaction, rot.kernel_builder());  // sampled
      Certificate cert = certify(model);
      double closed = 4.0 * std::sqrt(2.0) * 2.0 * beta * std::exp(beta) *
                      std::sqrt(1.0 - std::exp(-t));
      CHECK(std::abs(cert.L - closed) <= 0.02 * closed);
    }
  }
}

TEST_CASE("cflm psi differs from psi_tau by a constant") {
  double t = std::log(2.0) / 2.0;
  auto preset = ising_pspin(0.8, 2, t);
  Model model = preset.build();
  Measure nup = tau_measure(model.kernel.space_sp, 0.3);

  double first_offset = 0.0;
  for (int i = 0; i <= 40; ++i) {
    double m = -0.95 + 1.9 * i / 40.0;
    // a state whose first marginal has magnetization exactly m,
    // independent of eta
    Eigen::MatrixXd f(2, 2);
    f << 1.0 + m, 1.0 - m, 1.0 + m, 1.0 - m;
    ConstrainedState st = make_state(model, nup, f);
    double offset = psi(model, st) -
                    closed_form(preset, "psi_tau", {{"m_prime", m}, {"tau", 0.3}});
    if (i == 0)
      first_offset = offset;
    else
      CHECK(offset == doctest::Approx(first_offset).epsilon(1e-10));
  }
  // the constant is the log 2 normalization of the display
  CHECK(first_offset == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("coarse-graining Lipschitz constant") {
  auto sp = make_circle(128);
  auto rot = rotator(2, 0.3, 0.1, 128);

  // two independent routes: the closed form and the certify pipeline
  auto preset = coarse_grain_preset(sp, arc_partition(128, 16), rot.interaction);
  double closed = closed_form(preset, "L", {});
  Model model = preset.build();
  Certificate cert = certify(model);
  CHECK(std::abs(cert.L - closed) <= 1e-6);

  // refinement shrinks the constant
  double c_fg = preset.exact_constants->c_of_f_g;
  double prev = coarse_grain_lipschitz(*sp, arc_partition(128, 4), c_fg);
  for (int arcs : {8, 16, 32}) {
    double next = coarse_grain_lipschitz(*sp, arc_partition(128, arcs), c_fg);
    CHECK(next < prev);
    prev = next;
  }

  // singleton classes: zero spread, L = 0
  std::vector<int> singletons(128);
  for (int i = 0; i < 128; ++i) singletons[i] = i;
  CHECK(coarse_grain_lipschitz(*sp, singletons, c_fg) == 0.0);
}

TEST_CASE("tau measures") {
  auto sp = make_two_point();
  Measure m = tau_measure(sp, 0.5);
  CHECK(m.weights(0) == doctest::Approx(0.75));
  CHECK(m.weights(1) == doctest::Approx(0.25));
  CHECK_THROWS_AS(tau_measure(sp, 1.5), InvalidParameter);
}

TEST_CASE("sphere-grid rotator constants stay within the 2% contract") {
  auto rot = rotator(3, 0.25, 0.2);  // default 16x32 grid
  auto sampled = compute_constants(rot.interaction, *rot.space_s, 4096, 11);
  const auto& exact = *rot.exact_constants;
  CHECK(std::abs(sampled.delta_g - exact.delta_g) <= 0.02 * exact.delta_g);
  CHECK(std::abs(sampled.c_of_f_g - exact.c_of_f_g) <= 0.02 * exact.c_of_f_g);
  CHECK(sampled.hess_max == doctest::Approx(exact.hess_max).epsilon(1e-9));
  CHECK(sampled.delta_hat_phi1 ==
        doctest::Approx(exact.delta_hat_phi1).epsilon(1e-9));
  // grid pipeline L against the closed form for q = 3
  Model model = rot.build();
  Certificate cert = certify(model);
  double closed = closed_form(rot, "L", {{"q", 3.0}, {"beta", 0.25}, {"t", 0.2}});
  CHECK(std::abs(cert.L - closed) <= 0.02 * closed);
}
