#include "mfg/runner.hpp"

#include <cmath>
#include <fstream>

#include "mfg/errors.hpp"
#include "mfg/gibbs.hpp"
#include "mfg/io.hpp"
#include "mfg/oracle.hpp"

namespace mfg {

namespace {

constexpr int kSchemaVersion = 1;

nlohmann::json certificate_to_json(const Certificate& c) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"L", c.L},
                        {"L_hat", c.L_hat},
                        {"L1", c.L1},
                        {"L1_bar", num(c.L1_bar)},
                        {"L2", c.L2},
                        {"L2_bar", num(c.L2_bar)},
                        {"certified_gibbs", c.certified_gibbs},
                        {"constants_provenance",
                         c.exact_constants ? "exact-closed-form" : "sampled"},
                        {"model_descriptor", c.model_descriptor}};
}

Measure nu_prime_from_config(const RunConfig& cfg, const Model& model) {
  if (!cfg.nu_prime_file.empty()) {
    std::ifstream in(cfg.nu_prime_file);
    if (!in) throw InvalidParameter("cannot open nu' file: " + cfg.nu_prime_file);
    nlohmann::json j;
    in >> j;
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    Eigen::VectorXd ww = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
    return make_measure(model.kernel.space_sp, ww, 1e-9);
  }
  if (model.space_sp().size() == 2)
    return tau_measure(model.kernel.space_sp, cfg.tau);
  return apriori_measure(model.kernel.space_sp);
}

MultistartOptions search_options(const RunConfig& cfg) {
  MultistartOptions opts;
  opts.n_starts = cfg.starts;
  opts.seed = cfg.seed;
  opts.cluster_tol = cfg.cluster_tol;
  opts.solver.tol = cfg.tol;
  opts.solver.max_iter = cfg.max_iter;
  opts.solver.damping = cfg.damping;
  return opts;
}

std::string run_certify(const RunConfig& cfg) {
  ModelPreset preset = preset_from_config(cfg);
  Model model = preset.build();
  if (!cfg.dump_kernel_path.empty()) {
    std::ofstream out(cfg.dump_kernel_path, std::ios::binary);
    out << kernel_to_csv(model.kernel, cfg.hash());
  }
  std::string descriptor = cfg.model + " beta=" + format_double(cfg.beta) +
                           " t=" + format_double(cfg.t);
  Certificate cert = certify(model, descriptor);
  nlohmann::json j = certificate_to_json(cert);
  j["config_hash"] = cfg.hash();
  return j.dump(2) + "\n";
}

std::string run_fixed_point(const RunConfig& cfg) {
  ModelPreset preset = preset_from_config(cfg);
  Model model = preset.build();
  Measure nu_prime = nu_prime_from_config(cfg, model);
  TransformedInteraction ti =
      transformed_interaction(model, nu_prime, search_options(cfg));

  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : ti.clusters) {
    Eigen::VectorXd m = state_moment(model, c.rep.state);
    clusters.push_back(
        {{"psi", c.rep.psi_value},
         {"j", c.rep.j_value},
         {"residual", c.rep.residual},
         {"iterations", c.rep.iterations},
         {"hits", c.hits},
         {"magnetization_vector",
          std::vector<double>(m.data(), m.data() + m.size())}});
  }
  if (!cfg.dump_f_path.empty() && !ti.clusters.empty()) {
    CsvBuilder csv;
    std::vector<std::string> cols{"eta_index"};
    for (int s = 0; s < model.space_s().size(); ++s)
      cols.push_back("f_sigma_" + std::to_string(s));
    csv.header(cols);
    const auto& f = ti.clusters.front().rep.state.cond_density;
    for (int e = 0; e < f.rows(); ++e) {
      std::vector<std::string> cells{std::to_string(e)};
      for (int s = 0; s < f.cols(); ++s) cells.push_back(format_double(f(e, s)));
      csv.row(cells);
    }
    std::ofstream out(cfg.dump_f_path, std::ios::binary);
    out << csv.finish(cfg.hash());
  }
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"phi_k", ti.phi_k},
                   {"clusters", clusters},
                   {"flags",
                    {{"lower_confidence", ti.lower_confidence},
                     {"search_incomplete_possible", model.lipschitz >= 1.0},
                     {"classification", "by-psi-value-only"}}},
                   {"config_hash", cfg.hash()}};
  return j.dump(2) + "\n";
}

RunResult run_scan(const RunConfig& cfg) {
  ModelPreset preset = preset_from_config(cfg);
  Model model = preset.build();
  if (model.space_sp().size() != 2)
    throw InvalidParameter("scan: tau grids require a two-point transformed space");
  if (cfg.tau_grid < 2) throw InvalidParameter("scan: tau-grid must be >= 2");

  std::vector<Measure> grid;
  std::vector<double> params;
  for (int i = 0; i < cfg.tau_grid; ++i) {
    double tau = -1.0 + 2.0 * i / (cfg.tau_grid - 1);
    params.push_back(tau);
    grid.push_back(tau_measure(model.kernel.space_sp, tau));
  }

  ScanOptions opts;
  opts.search = search_options(cfg);
  auto rows = bad_point_scan(model, grid, params, opts);

  CsvBuilder csv;
  std::vector<std::string> cols{"point_index", "param",   "cluster_count",
                                "psi_gap",     "bad_flag"};
  for (int e = 0; e < model.space_sp().size(); ++e)
    cols.push_back("gamma1_prime_density_" + std::to_string(e));
  cols.push_back("jump_to_next");
  cols.push_back("suspect_flag");
  cols.push_back("search_incomplete");
  csv.header(cols);

  bool any_bad = false, any_incomplete = false;
  for (const auto& r : rows) {
    any_bad |= r.bad;
    any_incomplete |= r.search_incomplete;
    std::vector<std::string> cells{std::to_string(r.index),
                                   format_double(r.param),
                                   std::to_string(r.cluster_count),
                                   format_double(r.psi_gap),
                                   r.bad ? "1" : "0"};
    for (int e = 0; e < model.space_sp().size(); ++e) {
      // densities w.r.t. alpha'
      if (r.gamma_prime)
        cells.push_back(format_double((*r.gamma_prime)(e) /
                                      model.space_sp().weights(e)));
      else
        cells.push_back("nan");
    }
    cells.push_back(format_double(r.jump_to_next));
    cells.push_back(r.suspect ? "1" : "0");
    cells.push_back(r.search_incomplete ? "1" : "0");
    csv.row(cells);
  }

  RunResult res;
  res.output = csv.finish(cfg.hash());
  res.exit_code = any_bad ? 3 : any_incomplete ? 4 : 0;
  return res;
}

std::string run_oracle(const RunConfig& cfg) {
  auto rows = convergence_study(cfg.beta, cfg.p, cfg.t, cfg.tau, cfg.oracle_n,
                                search_options(cfg));
  CsvBuilder csv;
  csv.header({"N", "tau_realized", "exact", "limit", "error", "ratio"});
  for (const auto& r : rows)
    csv.row({std::to_string(r.N), format_double(r.tau_realized),
             format_double(r.exact), format_double(r.limit),
             format_double(r.error), format_double(r.ratio)});
  return csv.finish(cfg.hash());
}

std::string run_closed_form(const RunConfig& cfg) {
  ModelPreset preset = preset_from_config(cfg);
  if (cfg.form_name.empty())
    throw InvalidParameter("closed-form: --name is required");
  ParamMap args = cfg.form_args;
  // convenience: model parameters are available to the forms
  args.emplace("t", cfg.t);
  args.emplace("beta", cfg.beta);
  args.emplace("q", cfg.q);
  return format_double(closed_form(preset, cfg.form_name, args)) + "\n";
}

}  // namespace

ModelPreset preset_from_config(const RunConfig& cfg) {
  ModelPreset base;
  if (cfg.model == "ising") {
    base = ising_pspin(cfg.beta, cfg.p, cfg.t);
    if (!cfg.kernel.empty() && cfg.kernel != "spin-flip" && cfg.kernel != "coarse")
      throw InvalidParameter("ising pairs with --kernel spin-flip or coarse");
  } else if (cfg.model == "rotator" || cfg.model == "coarse") {
    base = rotator(cfg.model == "coarse" ? 2 : cfg.q, cfg.beta, cfg.t,
                   cfg.circle_nodes, cfg.sphere_polar, cfg.sphere_azimuth);
    if (!cfg.kernel.empty() && cfg.kernel != "heat" && cfg.kernel != "coarse")
      throw InvalidParameter("rotator pairs with --kernel heat or coarse");
  } else {
    throw InvalidParameter("unknown model: " + cfg.model);
  }

  if (cfg.model == "coarse" || cfg.kernel == "coarse") {
    if (cfg.partition_file.empty())
      throw InvalidParameter("coarse graining requires --partition");
    if (!base.space_s)
      throw InvalidParameter("coarse graining needs a grid space (q in {2,3})");
    std::vector<int> labels =
        read_partition_csv(cfg.partition_file, base.space_s->size());
    return coarse_grain_preset(base.space_s, labels, base.interaction,
                               cfg.probe_count);
  }
  return base;
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{{"subcommand", subcommand},
                        {"model", model},
                        {"beta", beta},
                        {"p", p},
                        {"q", q},
                        {"t", t},
                        {"circle_nodes", circle_nodes},
                        {"sphere_polar", sphere_polar},
                        {"sphere_azimuth", sphere_azimuth},
                        {"partition_file", partition_file},
                        {"kernel", kernel},
                        {"tau", tau},
                        {"nu_prime_file", nu_prime_file},
                        {"tau_grid", tau_grid},
                        {"tol", tol},
                        {"max_iter", max_iter},
                        {"damping", damping},
                        {"starts", starts},
                        {"seed", seed},
                        {"cluster_tol", cluster_tol},
                        {"probe_count", probe_count},
                        {"oracle_n", oracle_n},
                        {"form_name", form_name},
                        {"form_args", form_args},
                        {"dump_kernel_path", dump_kernel_path},
                        {"dump_f_path", dump_f_path}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("subcommand", c.subcommand);
  get("model", c.model);
  get("beta", c.beta);
  get("p", c.p);
  get("q", c.q);
  get("t", c.t);
  get("circle_nodes", c.circle_nodes);
  get("sphere_polar", c.sphere_polar);
  get("sphere_azimuth", c.sphere_azimuth);
  get("partition_file", c.partition_file);
  get("kernel", c.kernel);
  get("tau", c.tau);
  get("nu_prime_file", c.nu_prime_file);
  get("tau_grid", c.tau_grid);
  get("tol", c.tol);
  get("max_iter", c.max_iter);
  get("damping", c.damping);
  get("starts", c.starts);
  get("seed", c.seed);
  get("cluster_tol", c.cluster_tol);
  get("probe_count", c.probe_count);
  get("oracle_n", c.oracle_n);
  get("form_name", c.form_name);
  get("form_args", c.form_args);
  get("dump_kernel_path", c.dump_kernel_path);
  get("dump_f_path", c.dump_f_path);
  return c;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json().dump()); }

RunResult run(const RunConfig& cfg) {
  RunResult res;
  try {
    if (cfg.subcommand == "certify") {
      res.output = run_certify(cfg);
    } else if (cfg.subcommand == "fixed-point") {
      res.output = run_fixed_point(cfg);
    } else if (cfg.subcommand == "scan") {
      return run_scan(cfg);
    } else if (cfg.subcommand == "oracle") {
      res.output = run_oracle(cfg);
    } else if (cfg.subcommand == "closed-form") {
      res.output = run_closed_form(cfg);
    } else {
      throw InvalidParameter("unknown subcommand: " + cfg.subcommand);
    }
  } catch (const InvalidParameter& e) {
    res.exit_code = 2;
    res.diagnostics = nlohmann::json{{"error", "invalid_config"},
                                     {"message", e.what()}}
                          .dump() +
                      "\n";
  } catch (const Error& e) {
    res.exit_code = 5;
    res.diagnostics = nlohmann::json{{"error", "numerical_failure"},
                                     {"message", e.what()}}
                          .dump() +
                      "\n";
  }
  return res;
}

}  // namespace mfg
