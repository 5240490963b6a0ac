#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfg/cflm.hpp"

namespace mfg {

using ParamMap = std::map<std::string, double>;

// A named model binding an interaction to a parametric kernel builder,
// optional exact norm constants, and closed-form scalar functions
// addressable by name (for cross-checks and the CLI).
struct ModelPreset {
  std::string name;
  Interaction interaction;
  SpacePtr space_s;
  std::function<Kernel()> kernel_builder;
  std::optional<InteractionConstants> exact_constants;
  std::map<std::string, std::function<double(const ParamMap&)>> closed_forms;

  Model build() const;  // assembles the Model with exact constants if present
};

double closed_form(const ModelPreset& preset, const std::string& name,
                   const ParamMap& args);

// Ising p-spin under rate-one spin flip: Phi(m) = -(beta/p) m^p on
// {+1,-1}. p must be a positive integer so m^p is defined on [-1,1].
// Closed forms: h_t, psi_tau(m_prime, tau), mf_rhs(m_prime, tau),
// stationarity_residual(m_prime, tau), rho_alpha_k, rho_alpha, c_f_g, L.
ModelPreset ising_pspin(double beta, int p, double t);

// tau-parameterized second-layer marginal on {+1,-1}: nu'(+1) = (1+tau)/2.
Measure tau_measure(SpacePtr two_point, double tau);

// Mean-field rotator on S^{q-1} under diffusive evolution:
// F(m) = -(beta/2)|m|^2, g = coordinates. Grid kernels exist for
// q in {2, 3}; closed forms (L, rho_alpha_k, rho_alpha, c_f_g) serve all q.
// circle_nodes / sphere grid sizes control the quadrature grids.
ModelPreset rotator(int q, double beta, double t, int circle_nodes = 128,
                    int sphere_polar = 16, int sphere_azimuth = 32);

// Local coarse-graining of an arbitrary interaction on a grid space.
// Closed form: L per the per-class spread formula.
ModelPreset coarse_grain_preset(SpacePtr space, const std::vector<int>& labels,
                                Interaction interaction,
                                int probe_count = 4096,
                                std::uint64_t probe_seed = 2024);

// C(F,g) sup_eta alpha(S_eta)^{-1/2} min_{a in S_eta}
// (sum_{sigma in S_eta} alpha d^2(sigma, a))^{1/2}.
double coarse_grain_lipschitz(const SpinSpace& space,
                              const std::vector<int>& labels, double c_of_f_g);

}  // namespace mfg
