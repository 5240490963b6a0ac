#include "mfg/cflm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinDamping = 1.0 / 64.0;
constexpr int kOscillationWindow = 50;

void check_nu_prime(const Model& model, const Measure& nu_prime) {
  if (!nu_prime.space || nu_prime.space->label != model.space_sp().label ||
      nu_prime.size() != model.space_sp().size())
    throw SpaceMismatch("nu' must live on the kernel's transformed space");
}

// -Phi^(1)(pi1 nu~, delta_sigma) for every sigma at once.
Eigen::VectorXd exponent_vector(const Model& model, const Eigen::VectorXd& moment) {
  return -(model.g_s * model.interaction.f_grad(moment));
}

Eigen::VectorXd state_moment_impl(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  // pi1 weights: w_sigma = alpha_sigma * sum_eta nu'_eta f(eta, sigma)
  Eigen::VectorXd w =
      alpha.cwiseProduct(st.cond_density.transpose() * st.nu_prime.weights);
  return model.g_s.transpose() * w;
}

}  // namespace

Model make_model(Interaction inter, Kernel kernel,
                 std::optional<InteractionConstants> constants, int probe_count,
                 std::uint64_t probe_seed) {
  Model m;
  m.g_s = inter.observable_matrix(*kernel.space_s);
  m.constants = constants ? *constants
                          : compute_constants(inter, *kernel.space_s,
                                              probe_count, probe_seed);
  m.lipschitz = m.constants.c_of_f_g * rho_alpha_k(kernel);
  m.interaction = std::move(inter);
  m.kernel = std::move(kernel);
  return m;
}

ConstrainedState make_state(const Model& model, Measure nu_prime,
                            Eigen::MatrixXd cond_density) {
  check_nu_prime(model, nu_prime);
  const int ns = model.space_s().size(), np = model.space_sp().size();
  if (cond_density.rows() != np || cond_density.cols() != ns)
    throw InvalidParameter("ConstrainedState: density shape mismatch");
  if ((cond_density.array() < 0).any())
    throw InvalidParameter("ConstrainedState: conditional density must be nonnegative");
  const Eigen::VectorXd& alpha = model.space_s().weights;
  for (int e = 0; e < np; ++e) {
    double mass = cond_density.row(e).dot(alpha);
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw InvalidParameter("ConstrainedState: conditional row has no mass");
    cond_density.row(e) /= mass;
  }
  return ConstrainedState{std::move(nu_prime), std::move(cond_density),
                          model.kernel.space_s};
}

ConstrainedState flat_state(const Model& model, Measure nu_prime) {
  return make_state(model, std::move(nu_prime),
                    Eigen::MatrixXd::Ones(model.space_sp().size(),
                                          model.space_s().size()));
}

ConstrainedState kernel_state(const Model& model, Measure nu_prime) {
  return make_state(model, std::move(nu_prime),
                    model.kernel.density.transpose());
}

ConstrainedState random_state(const Model& model, Measure nu_prime,
                              std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd f(model.space_sp().size(), model.space_s().size());
  for (int e = 0; e < f.rows(); ++e)
    for (int s = 0; s < f.cols(); ++s) f(e, s) = std::exp(rng.uniform(-2.0, 2.0));
  return make_state(model, std::move(nu_prime), std::move(f));
}

Measure first_marginal(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  Eigen::VectorXd w =
      alpha.cwiseProduct(st.cond_density.transpose() * st.nu_prime.weights);
  return make_measure(model.kernel.space_s, std::move(w), 1e-9);
}

Eigen::VectorXd state_moment(const Model& model, const ConstrainedState& st) {
  return state_moment_impl(model, st);
}

double state_distance(const ConstrainedState& a, const ConstrainedState& b) {
  if (!same_space(a.nu_prime, b.nu_prime))
    throw SpaceMismatch("state_distance: different transformed spaces");
  if (a.cond_density.cols() != b.cond_density.cols())
    throw SpaceMismatch("state_distance: different initial spaces");
  // 1/2 sum_eta sum_sigma alpha_sigma |nu1' f1 - nu2' f2|
  Eigen::MatrixXd j1 = a.nu_prime.weights.asDiagonal() * a.cond_density;
  Eigen::MatrixXd j2 = b.nu_prime.weights.asDiagonal() * b.cond_density;
  return 0.5 * ((j1 - j2).cwiseAbs() * a.space_s->weights).sum();
}

ConstrainedState cflpk_apply(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  Eigen::VectorXd expo = exponent_vector(model, state_moment_impl(model, st));
  double shift = expo.maxCoeff();
  Eigen::VectorXd boltz = (expo.array() - shift).exp();

  const Eigen::MatrixXd& k = model.kernel.density;
  Eigen::MatrixXd f(st.cond_density.rows(), st.cond_density.cols());
  for (int e = 0; e < f.rows(); ++e) {
    Eigen::VectorXd num = boltz.cwiseProduct(k.col(e));
    double z = num.dot(alpha);
    if (!(z > 0.0) || !std::isfinite(z))
      throw NumericalUnderflow("cflpk_apply: normalizer underflow at eta " +
                               std::to_string(e));
    f.row(e) = (num / z).transpose();
  }
  return ConstrainedState{st.nu_prime, std::move(f), st.space_s};
}

double consistency_residual(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  Eigen::VectorXd expo = exponent_vector(model, state_moment_impl(model, st));
  double shift = expo.maxCoeff();
  Eigen::VectorXd boltz = (expo.array() - shift).exp();
  const Eigen::MatrixXd& k = model.kernel.density;

  double sup = 0.0;
  for (int e = 0; e < st.cond_density.rows(); ++e) {
    if (st.nu_prime.weights(e) <= 0.0) continue;
    double logz = shift + std::log(boltz.cwiseProduct(k.col(e)).dot(alpha));
    for (int s = 0; s < st.cond_density.cols(); ++s) {
      if (k(s, e) <= 0.0) continue;
      double f = st.cond_density(e, s);
      if (f <= 0.0) return kInf;
      double y = -expo(s) - std::log(k(s, e)) + std::log(f) + logz;
      sup = std::max(sup, std::abs(y));
    }
  }
  return sup;
}

double j_constrained(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  const Eigen::MatrixXd& k = model.kernel.density;
  double entropy = 0.0, logk_term = 0.0;
  for (int e = 0; e < st.cond_density.rows(); ++e) {
    double nu = st.nu_prime.weights(e);
    if (nu <= 0.0) continue;
    for (int s = 0; s < st.cond_density.cols(); ++s) {
      double f = st.cond_density(e, s);
      if (f <= 0.0) continue;  // 0 log 0 = 0
      double w = nu * alpha(s) * f;
      entropy += w * std::log(f);
      if (k(s, e) <= 0.0) return kInf;  // nu~ charges a null set of k
      logk_term += w * std::log(k(s, e));
    }
  }
  Eigen::VectorXd m = state_moment_impl(model, st);
  return entropy + model.interaction.f(m) - logk_term;
}

namespace {

// - sum_eta nu'(eta) log Z_eta with Z_eta = sum alpha e^{-Phi^(1)} k.
double minus_log_partition(const Model& model, const ConstrainedState& st,
                           const Eigen::VectorXd& moment) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  Eigen::VectorXd expo = exponent_vector(model, moment);
  double shift = expo.maxCoeff();
  Eigen::VectorXd boltz = (expo.array() - shift).exp();
  const Eigen::MatrixXd& k = model.kernel.density;
  double acc = 0.0;
  for (int e = 0; e < st.cond_density.rows(); ++e) {
    double nu = st.nu_prime.weights(e);
    if (nu <= 0.0) continue;
    acc -= nu * (shift + std::log(boltz.cwiseProduct(k.col(e)).dot(alpha)));
  }
  return acc;
}

}  // namespace

double psi(const Model& model, const ConstrainedState& st) {
  Eigen::VectorXd m = state_moment_impl(model, st);
  double first = model.interaction.f(m) - model.interaction.f_grad(m).dot(m);
  return first + minus_log_partition(model, st, m);
}

double psi_homogeneous(const Model& model, const ConstrainedState& st) {
  if (!model.interaction.homogeneity_degree)
    throw InvalidParameter("psi_homogeneous: no declared homogeneity degree");
  double p = *model.interaction.homogeneity_degree;
  Eigen::VectorXd m = state_moment_impl(model, st);
  return (1.0 - p) * model.interaction.f(m) + minus_log_partition(model, st, m);
}

FixedPointReport fixed_point(const Model& model, const ConstrainedState& f0,
                             const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidParameter("fixed_point: tol must be > 0");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw InvalidParameter("fixed_point: damping must be in (0, 1]");

  FixedPointReport rep;
  rep.state = f0;
  rep.final_damping = opts.damping;

  double prev_dist = kInf;
  int increase_streak = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    rep.iterations = it;
    ConstrainedState next = cflpk_apply(model, rep.state);
    if (rep.final_damping < 1.0)
      next.cond_density = (1.0 - rep.final_damping) * rep.state.cond_density +
                          rep.final_damping * next.cond_density;
    double dist = state_distance(rep.state, next);
    rep.state = std::move(next);

    // Oscillation guard: a non-decreasing sweep distance counts toward
    // the streak, so period-2 cycles (constant distances) trigger too.
    if (dist >= prev_dist * (1.0 - 1e-12)) {
      if (++increase_streak >= kOscillationWindow &&
          rep.final_damping > kMinDamping) {
        rep.final_damping *= 0.5;
        rep.damping_reduced = true;
        increase_streak = 0;
      }
    } else {
      increase_streak = 0;
    }
    prev_dist = dist;

    if (dist < opts.tol) {
      rep.residual = consistency_residual(model, rep.state);
      if (rep.residual <= opts.tol) {
        rep.converged = true;
        break;
      }
    }
  }
  if (!rep.converged) rep.residual = consistency_residual(model, rep.state);
  rep.psi_value = psi(model, rep.state);
  rep.j_value = j_constrained(model, rep.state);
  return rep;
}

std::vector<Cluster> multistart(const Model& model, const Measure& nu_prime,
                                const MultistartOptions& opts) {
  if (opts.n_starts < 1)
    throw InvalidParameter("multistart: n_starts must be >= 1");
  check_nu_prime(model, nu_prime);

  const int total = opts.n_starts + 2;
  std::vector<FixedPointReport> reports(total);
  auto run_one = [&](int i) {
    ConstrainedState start =
        i == 0   ? flat_state(model, nu_prime)
        : i == 1 ? kernel_state(model, nu_prime)
                 : random_state(model, nu_prime, mix_seed(opts.seed, i - 2));
    reports[i] = fixed_point(model, start, opts.solver);
  };
  if (opts.parallel)
    parallel_for_index(total, run_one);
  else
    for (int i = 0; i < total; ++i) run_one(i);

  std::vector<Cluster> clusters;
  for (auto& r : reports) {
    if (!r.converged) continue;
    bool placed = false;
    for (auto& c : clusters) {
      if (state_distance(c.rep.state, r.state) < opts.cluster_tol) {
        ++c.hits;
        if (r.residual < c.rep.residual) c.rep = r;
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back(Cluster{r, 1});
  }

  std::sort(clusters.begin(), clusters.end(), [&](const Cluster& a,
                                                  const Cluster& b) {
    if (a.rep.psi_value != b.rep.psi_value)
      return a.rep.psi_value < b.rep.psi_value;
    Eigen::VectorXd ma = state_moment(model, a.rep.state);
    Eigen::VectorXd mb = state_moment(model, b.rep.state);
    return std::lexicographical_compare(ma.data(), ma.data() + ma.size(),
                                        mb.data(), mb.data() + mb.size());
  });
  return clusters;
}

TransformedInteraction transformed_interaction(const Model& model,
                                               const Measure& nu_prime,
                                               const MultistartOptions& opts) {
  TransformedInteraction out;
  out.clusters = multistart(model, nu_prime, opts);
  if (out.clusters.empty())
    throw NoConsistentMeasure("transformed_interaction: no convergent cluster");
  out.phi_k = out.clusters.front().rep.psi_value;
  out.lower_confidence = out.clusters.size() == 1 && model.lipschitz >= 1.0;
  return out;
}

std::vector<double> transformed_rate(
    const Model& model, const std::vector<Measure>& nu_prime_grid,
    const MultistartOptions& opts, std::vector<TransformedInteraction>* details) {
  const int n = static_cast<int>(nu_prime_grid.size());
  std::vector<double> raw(n);
  std::vector<TransformedInteraction> tis(n);
  Measure ref = apriori_measure(model.kernel.space_sp);
  // Points are independent; each derives its own seed from its index.
  parallel_for_index(n, [&](int i) {
    MultistartOptions local = opts;
    local.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(i));
    local.parallel = false;
    tis[i] = transformed_interaction(model, nu_prime_grid[i], local);
    raw[i] = relative_entropy(nu_prime_grid[i], ref) + tis[i].phi_k;
  });
  double c = *std::min_element(raw.begin(), raw.end());
  for (double& v : raw) v -= c;
  if (details) *details = std::move(tis);
  return raw;
}

Measure initial_gamma1(const Interaction& inter, const Measure& nu) {
  Eigen::MatrixXd g = inter.observable_matrix(*nu.space);
  Eigen::VectorXd expo = -(g * inter.f_grad(moment_vector(nu, g)));
  double shift = expo.maxCoeff();
  Eigen::VectorXd w = nu.space->weights.cwiseProduct((expo.array() - shift).exp().matrix());
  double z = w.sum();
  if (!(z > 0.0)) throw NumericalUnderflow("initial_gamma1: normalizer underflow");
  return make_measure(nu.space, w / z, 1e-9);
}

namespace {

InitialReport initial_picard(const Interaction& inter, Measure start,
                             const SolverOptions& opts) {
  InitialReport rep;
  rep.nu = std::move(start);
  double damping = opts.damping;
  double prev_dist = kInf;
  int streak = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    rep.iterations = it;
    Measure image = initial_gamma1(inter, rep.nu);
    Eigen::VectorXd blended =
        (1.0 - damping) * rep.nu.weights + damping * image.weights;
    Measure next = make_measure(rep.nu.space, std::move(blended), 1e-9);
    double dist = variational_distance(rep.nu, next);
    rep.nu = std::move(next);
    if (dist > prev_dist) {
      if (++streak >= kOscillationWindow && damping > kMinDamping) {
        damping *= 0.5;
        streak = 0;
      }
    } else {
      streak = 0;
    }
    prev_dist = dist;
    if (dist < opts.tol) {
      Measure image2 = initial_gamma1(inter, rep.nu);
      double res = 0.0;
      for (int i = 0; i < rep.nu.size(); ++i) {
        if (rep.nu.space->weights(i) <= 0.0) continue;
        res = std::max(res, std::abs(std::log(rep.nu.weights(i)) -
                                     std::log(image2.weights(i))));
      }
      rep.residual = res;
      if (res <= opts.tol) {
        rep.converged = true;
        break;
      }
    }
  }
  Eigen::MatrixXd g = inter.observable_matrix(*rep.nu.space);
  rep.value = relative_entropy(rep.nu, apriori_measure(rep.nu.space)) +
              inter.f(moment_vector(rep.nu, g));
  return rep;
}

}  // namespace

std::vector<InitialCluster> initial_fixed_point(const Interaction& inter,
                                                const SpacePtr& space,
                                                const MultistartOptions& opts) {
  const int total = opts.n_starts + 1;
  std::vector<InitialReport> reports(total);
  auto run_one = [&](int i) {
    Measure start = apriori_measure(space);
    if (i > 0) {
      Rng rng(mix_seed(opts.seed, i - 1));
      Eigen::VectorXd w(space->size());
      for (int s = 0; s < w.size(); ++s)
        w(s) = space->weights(s) * std::exp(rng.uniform(-2.0, 2.0));
      start = make_measure(space, w / w.sum(), 1e-9);
    }
    reports[i] = initial_picard(inter, std::move(start), opts.solver);
  };
  if (opts.parallel)
    parallel_for_index(total, run_one);
  else
    for (int i = 0; i < total; ++i) run_one(i);

  std::vector<InitialCluster> clusters;
  for (auto& r : reports) {
    if (!r.converged) continue;
    bool placed = false;
    for (auto& c : clusters) {
      if (variational_distance(c.rep.nu, r.nu) < opts.cluster_tol) {
        ++c.hits;
        if (r.residual < c.rep.residual) c.rep = r;
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back(InitialCluster{r, 1});
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const InitialCluster& a, const InitialCluster& b) {
              if (a.rep.value != b.rep.value) return a.rep.value < b.rep.value;
              return std::lexicographical_compare(
                  a.rep.nu.weights.data(),
                  a.rep.nu.weights.data() + a.rep.nu.weights.size(),
                  b.rep.nu.weights.data(),
                  b.rep.nu.weights.data() + b.rep.nu.weights.size());
            });
  return clusters;
}

double initial_rate(const Interaction& inter, const Measure& nu,
                    const MultistartOptions& opts) {
  auto clusters = initial_fixed_point(inter, nu.space, opts);
  if (clusters.empty())
    throw NoConsistentMeasure("initial_rate: no convergent fixed point");
  Eigen::MatrixXd g = inter.observable_matrix(*nu.space);
  double value = relative_entropy(nu, apriori_measure(nu.space)) +
                 inter.f(moment_vector(nu, g));
  return value - clusters.front().rep.value;
}

}  // namespace mfg
