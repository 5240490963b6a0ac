#include "mfg/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double arg(const ParamMap& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw InvalidParameter("closed form: missing argument " + key);
  return it->second;
}

double log_2cosh(double x) {
  // log(2 cosh x), overflow-safe
  return std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x)));
}

}  // namespace

Model ModelPreset::build() const {
  return make_model(interaction, kernel_builder(), exact_constants);
}

double closed_form(const ModelPreset& preset, const std::string& name,
                   const ParamMap& args) {
  auto it = preset.closed_forms.find(name);
  if (it == preset.closed_forms.end())
    throw InvalidParameter("preset " + preset.name + " has no closed form '" +
                           name + "'");
  return it->second(args);
}

Measure tau_measure(SpacePtr two_point, double tau) {
  if (tau < -1.0 || tau > 1.0)
    throw InvalidParameter("tau_measure: tau must lie in [-1, 1]");
  Eigen::VectorXd w(2);
  w << (1.0 + tau) / 2.0, (1.0 - tau) / 2.0;
  return make_measure(std::move(two_point), std::move(w));
}

ModelPreset ising_pspin(double beta, int p, double t) {
  if (beta < 0.0 || p < 1) throw InvalidParameter("ising_pspin: beta >= 0, p >= 1");
  if (t < 1e-6) throw InvalidParameter("ising_pspin: t must be >= 1e-6");

  ModelPreset preset;
  preset.name = "ising";
  preset.space_s = make_two_point();

  Interaction inter;
  inter.l = 1;
  inter.observables = coordinate_observables();
  inter.f = [beta, p](const Eigen::VectorXd& m) {
    return -(beta / p) * ipow(m(0), p);
  };
  inter.f_grad = [beta, p](const Eigen::VectorXd& m) {
    Eigen::VectorXd g(1);
    g(0) = -beta * ipow(m(0), p - 1);
    return g;
  };
  inter.f_hess = [beta, p](const Eigen::VectorXd& m) {
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = p >= 2 ? -beta * (p - 1) * ipow(m(0), p - 2) : 0.0;
    return h;
  };
  inter.homogeneity_degree = p;
  preset.interaction = inter;

  preset.kernel_builder = [t] { return spin_flip_kernel(t); };

  InteractionConstants c;
  c.delta_g = 2.0;
  c.g_lip = 1.0;
  c.hess_max = beta * (p - 1);
  c.delta_hat_phi1 = 2.0 * beta;
  c.c_of_f_g = combine_c_of_f_g(c.hess_max, c.delta_g, c.g_lip, c.delta_hat_phi1);
  c.exact = true;
  preset.exact_constants = c;

  auto h_of = [](double tt) { return spin_flip_field(tt); };
  preset.closed_forms["h_t"] = [h_of](const ParamMap& a) {
    return h_of(arg(a, "t"));
  };
  preset.closed_forms["psi_tau"] = [beta, p, t, h_of](const ParamMap& a) {
    double m = arg(a, "m_prime"), tau = arg(a, "tau");
    double h = h_of(a.count("t") ? a.at("t") : t);
    double field = beta * ipow(m, p - 1);
    return ((p - 1) * beta / p) * ipow(m, p) -
           (1.0 + tau) / 2.0 * (log_2cosh(field + h) - std::log(2.0)) -
           (1.0 - tau) / 2.0 * (log_2cosh(field - h) - std::log(2.0)) +
           log_2cosh(h);
  };
  preset.closed_forms["mf_rhs"] = [beta, p, t, h_of](const ParamMap& a) {
    double m = arg(a, "m_prime"), tau = arg(a, "tau");
    double h = h_of(a.count("t") ? a.at("t") : t);
    double field = beta * ipow(m, p - 1);
    return (1.0 + tau) / 2.0 * std::tanh(field + h) +
           (1.0 - tau) / 2.0 * std::tanh(field - h);
  };
  preset.closed_forms["stationarity_residual"] = [preset_p = p, beta, t, h_of](
                                                     const ParamMap& a) {
    double m = arg(a, "m_prime"), tau = arg(a, "tau");
    double h = h_of(a.count("t") ? a.at("t") : t);
    double field = beta * ipow(m, preset_p - 1);
    double rhs = (1.0 + tau) / 2.0 * std::tanh(field + h) +
                 (1.0 - tau) / 2.0 * std::tanh(field - h);
    // d psi_tau / dm' = beta (p-1) m'^{p-2} (m' - rhs)
    return preset_p >= 2 ? beta * (preset_p - 1) * ipow(m, preset_p - 2) * (m - rhs)
                         : 0.0;
  };
  // Two-point posterior spread: 4 / (e^{2|h_t|} + 1) under a single eta.
  preset.closed_forms["rho_alpha_k"] = [h_of](const ParamMap& a) {
    double h = std::abs(h_of(arg(a, "t")));
    return std::sqrt(4.0 / (std::exp(2.0 * h) + 1.0));
  };
  preset.closed_forms["rho_alpha"] = [](const ParamMap&) { return std::sqrt(2.0); };
  double c_fg = c.c_of_f_g;
  preset.closed_forms["c_f_g"] = [c_fg](const ParamMap&) { return c_fg; };
  preset.closed_forms["L"] = [c_fg, h_of](const ParamMap& a) {
    double h = std::abs(h_of(arg(a, "t")));
    return c_fg * std::sqrt(4.0 / (std::exp(2.0 * h) + 1.0));
  };
  return preset;
}

ModelPreset rotator(int q, double beta, double t, int circle_nodes,
                    int sphere_polar, int sphere_azimuth) {
  if (q < 2 || beta < 0.0 || t <= 0.0)
    throw InvalidParameter("rotator: q >= 2, beta >= 0, t > 0");

  ModelPreset preset;
  preset.name = "rotator";

  Interaction inter;
  inter.l = q;
  inter.observables = coordinate_observables();
  inter.f = [beta](const Eigen::VectorXd& m) { return -(beta / 2.0) * m.squaredNorm(); };
  inter.f_grad = [beta](const Eigen::VectorXd& m) { return (-beta * m).eval(); };
  inter.f_hess = [beta, q](const Eigen::VectorXd&) {
    return (-beta * Eigen::MatrixXd::Identity(q, q)).eval();
  };
  inter.homogeneity_degree = 2.0;
  preset.interaction = inter;

  if (q == 2) {
    preset.space_s = make_circle(circle_nodes);
    SpacePtr sp = preset.space_s;
    preset.kernel_builder = [sp, t] { return circle_heat_kernel(sp, t); };
  } else if (q == 3) {
    preset.space_s = make_sphere(sphere_polar, sphere_azimuth);
    SpacePtr sp = preset.space_s;
    preset.kernel_builder = [sp, t] { return sphere_heat_kernel(sp, t); };
  } else {
    preset.kernel_builder = [] () -> Kernel {
      throw GridUnsupported("rotator: grid kernels exist only for q in {2,3}");
    };
  }

  InteractionConstants c;
  c.delta_g = 2.0 * q;
  c.g_lip = 1.0;
  c.hess_max = beta;
  c.delta_hat_phi1 = 2.0 * beta;
  c.c_of_f_g = combine_c_of_f_g(c.hess_max, c.delta_g, c.g_lip, c.delta_hat_phi1);
  c.exact = true;
  preset.exact_constants = c;

  preset.closed_forms["rho_alpha_k"] = [q](const ParamMap& a) {
    return std::sqrt(2.0 * (1.0 - std::exp(-(q - 1) * arg(a, "t"))));
  };
  preset.closed_forms["rho_alpha"] = [](const ParamMap&) { return std::sqrt(2.0); };
  double c_fg = c.c_of_f_g;
  preset.closed_forms["c_f_g"] = [c_fg](const ParamMap&) { return c_fg; };
  preset.closed_forms["L"] = [](const ParamMap& a) {
    double qq = arg(a, "q"), b = arg(a, "beta"), tt = arg(a, "t");
    return 4.0 * std::sqrt(2.0) * qq * b * std::exp(b) *
           std::sqrt(1.0 - std::exp(-(qq - 1.0) * tt));
  };
  return preset;
}

double coarse_grain_lipschitz(const SpinSpace& space,
                              const std::vector<int>& labels, double c_of_f_g) {
  const int n = space.size();
  if (static_cast<int>(labels.size()) != n)
    throw InvalidParameter("coarse_grain_lipschitz: label count mismatch");
  int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  double worst = 0.0;
  for (int cls = 0; cls < n_classes; ++cls) {
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
      if (labels[i] == cls) mass += space.weights(i);
    if (mass <= 0.0)
      throw EmptyPartitionClass("coarse_grain_lipschitz: empty class " +
                                std::to_string(cls));
    // min over a in the class of the alpha-restricted second moment
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (labels[a] != cls) continue;
      double spread = 0.0;
      for (int i = 0; i < n; ++i)
        if (labels[i] == cls)
          spread += space.weights(i) * space.dist(i, a) * space.dist(i, a);
      best = std::min(best, spread);
    }
    worst = std::max(worst, std::sqrt(best) / std::sqrt(mass));
  }
  return c_of_f_g * worst;
}

ModelPreset coarse_grain_preset(SpacePtr space, const std::vector<int>& labels,
                                Interaction interaction, int probe_count,
                                std::uint64_t probe_seed) {
  ModelPreset preset;
  preset.name = "coarse";
  preset.space_s = space;
  preset.interaction = std::move(interaction);
  std::vector<int> labels_copy = labels;
  preset.kernel_builder = [space, labels_copy] {
    return coarse_grain_kernel(space, labels_copy);
  };
  // Sampled constants, shared between the closed form and certify(), so
  // the two L routes differ only in the spread computation.
  InteractionConstants c =
      compute_constants(preset.interaction, *space, probe_count, probe_seed);
  preset.exact_constants = c;
  double c_fg = c.c_of_f_g;
  preset.closed_forms["c_f_g"] = [c_fg](const ParamMap&) { return c_fg; };
  preset.closed_forms["L"] = [space, labels_copy, c_fg](const ParamMap&) {
    return coarse_grain_lipschitz(*space, labels_copy, c_fg);
  };
  return preset;
}

}  // namespace mfg
