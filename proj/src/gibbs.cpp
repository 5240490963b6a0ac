#include "mfg/gibbs.hpp"

#include <cmath>
#include <limits>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Certificate certify(const InteractionConstants& constants, const Kernel& kernel,
                    std::string model_descriptor) {
  Certificate c;
  c.L = constants.c_of_f_g * rho_alpha_k(kernel);
  c.L_hat = constants.c_of_f_g * rho_alpha(*kernel.space_s);
  c.L1 = 4.0 * c.L;
  c.L2 = c.L1 * c.L_hat;
  if (c.L < 1.0) {
    c.L1_bar = c.L1 / (1.0 - c.L);
    c.L2_bar = 4.0 * c.L * c.L_hat / (1.0 - c.L);
    c.certified_gibbs = true;
  } else {
    c.L1_bar = kInf;
    c.L2_bar = kInf;
  }
  c.exact_constants = constants.exact;
  c.model_descriptor = std::move(model_descriptor);
  return c;
}

Certificate certify(const Model& model, std::string model_descriptor) {
  return certify(model.constants, model.kernel, std::move(model_descriptor));
}

Measure gamma1_prime_from_state(const Model& model, const ConstrainedState& st) {
  const Eigen::VectorXd& alpha = model.space_s().weights;
  const Eigen::VectorXd& alpha_p = model.space_sp().weights;
  Eigen::VectorXd moment = state_moment(model, st);
  Eigen::VectorXd expo = -(model.g_s * model.interaction.f_grad(moment));
  double shift = expo.maxCoeff();
  Eigen::VectorXd boltz = alpha.cwiseProduct((expo.array() - shift).exp().matrix());
  double den = boltz.sum();
  Eigen::VectorXd num = model.kernel.density.transpose() * boltz;  // per eta
  Eigen::VectorXd w = alpha_p.cwiseProduct(num) / den;
  // Kernel marginals hold to 1e-8, so the raw mass can sit slightly off 1.
  return make_measure(model.kernel.space_sp, std::move(w), 1e-6);
}

Measure gamma1_prime(const Model& model, const Measure& nu_prime,
                     const MultistartOptions& opts, double tie_tol) {
  auto clusters = multistart(model, nu_prime, opts);
  if (clusters.empty())
    throw NoConsistentMeasure("gamma1_prime: no convergent cluster");
  if (clusters.size() >= 2 &&
      clusters[1].rep.psi_value - clusters[0].rep.psi_value < tie_tol)
    throw NonUniqueMinimizer(std::move(clusters));
  return gamma1_prime_from_state(model, clusters.front().rep.state);
}

ContinuityReport continuity_check(const Model& model,
                                  const std::vector<std::pair<Measure, Measure>>& pairs,
                                  const MultistartOptions& opts) {
  if (model.lipschitz >= 1.0)
    throw InvalidParameter("continuity_check: requires L < 1");
  ContinuityReport report;
  report.rows.resize(pairs.size());
  parallel_for_index(static_cast<int>(pairs.size()), [&](int i) {
    MultistartOptions local = opts;
    local.parallel = false;
    local.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(i));
    auto c1 = multistart(model, pairs[i].first, local);
    auto c2 = multistart(model, pairs[i].second, local);
    if (c1.empty() || c2.empty())
      throw NoConsistentMeasure("continuity_check: fixed point search failed");
    const ConstrainedState& s1 = c1.front().rep.state;
    const ConstrainedState& s2 = c2.front().rep.state;
    ContinuityRow row;
    row.nu_distance = variational_distance(pairs[i].first, pairs[i].second);
    if (row.nu_distance <= 0.0)
      throw InvalidParameter("continuity_check: pair members must differ");
    row.state_distance = state_distance(s1, s2);
    row.gamma_distance = variational_distance(gamma1_prime_from_state(model, s1),
                                              gamma1_prime_from_state(model, s2));
    row.gamma_ratio = row.gamma_distance / row.nu_distance;
    row.state_ratio = row.state_distance / row.nu_distance;
    report.rows[i] = row;
  });
  for (const auto& r : report.rows) {
    report.max_gamma_ratio = std::max(report.max_gamma_ratio, r.gamma_ratio);
    report.max_state_ratio = std::max(report.max_state_ratio, r.state_ratio);
  }
  return report;
}

std::vector<ScanRow> bad_point_scan(const Model& model,
                                    const std::vector<Measure>& nu_prime_grid,
                                    const std::vector<double>& params,
                                    const ScanOptions& opts) {
  const int n = static_cast<int>(nu_prime_grid.size());
  if (static_cast<int>(params.size()) != n)
    throw InvalidParameter("bad_point_scan: params/grid size mismatch");

  std::vector<ScanRow> rows(n);
  parallel_for_index(n, [&](int i) {
    MultistartOptions local = opts.search;
    local.seed = mix_seed(opts.search.seed, static_cast<std::uint64_t>(i));
    local.parallel = false;
    auto clusters = multistart(model, nu_prime_grid[i], local);

    ScanRow row;
    row.index = i;
    row.param = params[i];
    row.cluster_count = static_cast<int>(clusters.size());
    row.search_incomplete = clusters.size() <= 1 && model.lipschitz >= 1.0;
    if (clusters.empty()) {
      row.bad = true;  // nothing converged: treat as undecided-bad
      row.psi_gap = 0.0;
    } else if (clusters.size() == 1) {
      row.psi_gap = kInf;
      row.gamma_prime =
          gamma1_prime_from_state(model, clusters.front().rep.state).weights;
    } else {
      row.psi_gap = clusters[1].rep.psi_value - clusters[0].rep.psi_value;
      row.bad = row.psi_gap < opts.tie_tol;
      if (!row.bad)
        row.gamma_prime =
            gamma1_prime_from_state(model, clusters.front().rep.state).weights;
    }
    rows[i] = std::move(row);
  });

  // Discontinuity indicator between adjacent grid points, flagged
  // SUSPECT past jump_factor x (grid spacing x L2 scale). Plumbing
  // heuristic, not a theorem.
  Certificate cert = certify(model);
  double l2_scale = std::isfinite(cert.L2) && cert.L2 > 0.0 ? cert.L2 : 1.0;
  for (int i = 0; i < n; ++i) {
    if (i + 1 >= n || !rows[i].gamma_prime || !rows[i + 1].gamma_prime) {
      rows[i].jump_to_next = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double jump =
        0.5 * (*rows[i].gamma_prime - *rows[i + 1].gamma_prime).cwiseAbs().sum();
    rows[i].jump_to_next = jump;
    double spacing =
        variational_distance(nu_prime_grid[i], nu_prime_grid[i + 1]);
    if (jump > opts.jump_factor * spacing * l2_scale) rows[i].suspect = true;
  }
  return rows;
}

}  // namespace mfg
