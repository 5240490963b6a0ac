#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfg/cflm.hpp"
#include "mfg/errors.hpp"

namespace mfg {

inline constexpr double kTieTol = 1e-9;

// Contraction constants of the transformed system. L < 1 certifies
// uniqueness of the consistent measure, hence Gibbsianness.
struct Certificate {
  double L = 0.0;       // C(F,g) rho_alpha(k)
  double L_hat = 0.0;   // C(F,g) rho_alpha
  double L1 = 0.0;      // 4 L
  double L1_bar = 0.0;  // L1 / (1 - L), +inf when L >= 1
  double L2 = 0.0;      // L1 L_hat
  double L2_bar = 0.0;  // 4 L L_hat / (1 - L), +inf when L >= 1
  bool certified_gibbs = false;
  bool exact_constants = false;  // closed-form override vs sampled
  std::string model_descriptor;
};

Certificate certify(const InteractionConstants& constants, const Kernel& kernel,
                    std::string model_descriptor = {});
Certificate certify(const Model& model, std::string model_descriptor = {});

// Limiting single-site kernel of the transformed system, defined when
// the Psi-minimal cluster is unique within tie_tol. A tie is the bad
// configuration signal.
struct NonUniqueMinimizer : Error {
  std::vector<Cluster> tied;
  explicit NonUniqueMinimizer(std::vector<Cluster> clusters)
      : Error("gamma1_prime: tied Psi-minimal clusters"), tied(std::move(clusters)) {}
};

Measure gamma1_prime(const Model& model, const Measure& nu_prime,
                     const MultistartOptions& opts, double tie_tol = kTieTol);

// gamma'_1 density from a solved consistent state (no search).
Measure gamma1_prime_from_state(const Model& model, const ConstrainedState& state);

struct ContinuityRow {
  double nu_distance = 0.0;
  double gamma_distance = 0.0;
  double state_distance = 0.0;
  double gamma_ratio = 0.0;
  double state_ratio = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  double max_gamma_ratio = 0.0;  // compare against L2
  double max_state_ratio = 0.0;  // compare against L1
};

// Empirical Lipschitz ratios of nu' -> gamma'_1 and nu' -> consistent
// state over the supplied pairs; requires L < 1.
ContinuityReport continuity_check(const Model& model,
                                  const std::vector<std::pair<Measure, Measure>>& pairs,
                                  const MultistartOptions& opts);

struct ScanOptions {
  MultistartOptions search{};
  double tie_tol = kTieTol;
  double jump_factor = 10.0;
};

struct ScanRow {
  int index = 0;
  double param = 0.0;
  int cluster_count = 0;
  double psi_gap = 0.0;  // +inf with a single cluster
  bool bad = false;
  bool search_incomplete = false;
  std::optional<Eigen::VectorXd> gamma_prime;  // weights, absent when BAD
  double jump_to_next = 0.0;  // NaN when either endpoint is undefined
  bool suspect = false;
};

// Per grid point: cluster structure, BAD flag (tied global minimizers),
// gamma'_1 when unique, and the adjacent-point discontinuity indicator.
std::vector<ScanRow> bad_point_scan(const Model& model,
                                    const std::vector<Measure>& nu_prime_grid,
                                    const std::vector<double>& params,
                                    const ScanOptions& opts);

}  // namespace mfg
