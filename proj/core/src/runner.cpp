#include "semilat/runner.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "semilat/boundary.hpp"
#include "semilat/catalog.hpp"
#include "semilat/report.hpp"

namespace semilat {

namespace {

using nlohmann::json;

struct Ctx {
  Config cfg;
  std::string out_dir;
  std::uint64_t seed = 42;
  int refine = 0;
  bool quiet = false;
  json diag;
};

std::string out_path(const Ctx& ctx, const char* name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

std::function<double(double)> named_kernel(const std::string& name, double scale,
                                           const std::string& key) {
  if (name == "one") return [scale](double) { return scale; };
  if (name == "exp_decay") return [scale](double x) { return scale * std::exp(-2.0 * x); };
  if (name == "hat")
    return [scale](double x) { return scale * std::max(0.0, 1.0 - 2.0 * std::abs(x - 0.5)); };
  if (name == "signed_cos") return [scale](double x) { return scale * std::cos(M_PI * x); };
  if (name == "front")
    return [scale](double x) { return x <= 0.5 ? 2.0 * scale : 0.0; };
  throw ConfigError("config key '" + key + "': unknown kernel '" + name + "'");
}

std::function<double(double, double)> named_boundary_kernel(const std::string& name, double scale,
                                                            const std::string& key) {
  if (name == "const") return [scale](double, double) { return scale; };
  if (name == "signed_cos")
    return [scale](double, double x) { return scale * std::cos(M_PI * x); };
  if (name == "gauss")
    return [scale](double z, double x) { return scale * std::exp(-8.0 * (x - z) * (x - z)); };
  if (name == "zero") return [](double, double) { return 0.0; };
  throw ConfigError("config key '" + key + "': unknown kernel '" + name + "'");
}

std::vector<double> report_times(const Ctx& ctx, const TimeGridSpec& grid) {
  std::vector<double> def;
  for (int k = 1; k <= 8; ++k) def.push_back(grid.t_end * k / 8.0);
  std::vector<double> want = ctx.cfg.get_list("report.times", def);
  // Snap to the construction grid.
  std::vector<double> out;
  for (double t : want) {
    const double snapped =
        std::clamp(std::round(t / grid.step()), 0.0, static_cast<double>(grid.steps)) *
        grid.step();
    if (out.empty() || std::abs(out.back() - snapped) > 1e-12) out.push_back(snapped);
  }
  return out;
}

TimeGridSpec config_grid(const Ctx& ctx, double default_t_end, int default_steps) {
  TimeGridSpec grid;
  grid.t_end = ctx.cfg.get_double("time_grid.t_end", default_t_end);
  grid.steps = ctx.cfg.get_int("time_grid.steps", default_steps);
  if (grid.steps < 16) throw ConfigError("time_grid.steps must be >= 16");
  if (grid.t_end <= 0.0) throw ConfigError("time_grid.t_end must be positive");
  return grid;
}

/// Snaps the grid so the time step is an integer multiple of hx (shift
/// models need node-aligned steps).
TimeGridSpec align_grid(const TimeGridSpec& want, double hx) {
  const double h_want = want.t_end / want.steps;
  const int mult = std::max(1, static_cast<int>(std::round(h_want / hx)));
  const double h = mult * hx;
  const int steps = std::max(16, static_cast<int>(std::round(want.t_end / h)));
  return TimeGridSpec{steps * h, steps};
}

json hypothesis_json(const HypothesisReport& rep) {
  json arr = json::array();
  for (const auto& c : rep.checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"value", c.value},
                   {"threshold", c.threshold}});
  return arr;
}

json diagnostics_json(const PerturbedDiagnostics& d) {
  return json{{"kind", to_string(d.kind)},
              {"r_feedback", d.r_feedback},
              {"r_io_estimate", d.r_io_estimate},
              {"picard_iterations", d.picard_iterations},
              {"picard_residual", d.picard_residual},
              {"min_stored_entry", d.min_stored_entry},
              {"hypotheses", hypothesis_json(d.hypothesis_report)}};
}

void write_diagnostics(Ctx& ctx) {
  write_text_file(out_path(ctx, "diagnostics.json"), ctx.diag.dump(2) + "\n");
}

/// Generic per-time rows: t, ||S(t)||_sup, min entry, S_00, vp residual,
/// domination residual. Values are reported in original coordinates via the
/// recorded rescale shift mu.
void emit_time_rows(CsvTable& table, const PerturbedSemigroup& s, const TripleSpec& triple,
                    const std::vector<double>& times, double mu,
                    const std::map<double, double>* dom_residuals) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(triple.state_space()->dim());
  x /= triple.state_space()->norm(x);
  for (double t : times) {
    LinOp st = s.at(t);
    const double factor = std::exp(mu * t);
    const double dom =
        dom_residuals && dom_residuals->count(t) ? dom_residuals->at(t) : 0.0;
    table.add_row({t, factor * st.matrix().cwiseAbs().rowwise().sum().maxCoeff(),
                   factor * st.matrix().minCoeff(), factor * st.matrix()(0, 0),
                   vp_residual(s, triple, x, t), dom});
  }
}

const std::vector<std::string> kTimeHeader = {"t",        "s_norm_sup", "s_min_entry",
                                              "s_entry_00", "vp_residual", "domination_residual"};

void run_triple(Ctx& ctx, Rng& rng) {
  Eigen::MatrixXd a = ctx.cfg.require_matrix("triple.A");
  Eigen::MatrixXd b = ctx.cfg.require_matrix("triple.B");
  Eigen::MatrixXd c = ctx.cfg.require_matrix("triple.C");
  if (a.rows() != a.cols() || b.rows() != a.rows() || c.cols() != a.cols() ||
      b.cols() != c.rows())
    throw ConfigError("triple matrices have inconsistent shapes");
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());

  const std::string kind_name = ctx.cfg.get_string("triple.kind", "AM");
  TheoremKind kind;
  NormKind u_kind;
  UTag u_tag;
  if (kind_name == "AM") {
    kind = TheoremKind::AM;
    u_kind = NormKind::Sup;
    u_tag = UTag::AM;
  } else if (kind_name == "AL") {
    kind = TheoremKind::AL;
    u_kind = NormKind::L1;
    u_tag = UTag::AL;
  } else if (kind_name == "RN") {
    kind = TheoremKind::RN;
    u_kind = NormKind::Sup;
    u_tag = UTag::Dual;
  } else {
    throw ConfigError("triple.kind must be AM, AL or RN");
  }

  SpacePtr x_space = GridSpace::vector_space(n, NormKind::Sup);
  SpacePtr u_space = GridSpace::vector_space(m, u_kind);
  ModelPtr model = SemigroupModel::matrix_exp(LinOp(x_space, x_space, a));
  double mu = 0.0;
  if (model->growth_bound() >= -1e-9) {
    mu = model->growth_bound() + 0.5;
    model = rescale(model, mu);
  }
  const double lambda0 = ctx.cfg.get_double("triple.lambda0", model->growth_bound() + 1.0);

  TripleSpec triple;
  triple.model = model;
  triple.control = RegularizedControl::from_raw(*model, LinOp(u_space, x_space, b), lambda0);
  triple.observation = LinOp(x_space, u_space, c);
  triple.u_space = u_space;
  triple.u_tag = u_tag;

  ctx.diag["rescale_shift"] = mu;
  ctx.diag["lambda0"] = lambda0;
  ctx.diag["hypotheses"] = hypothesis_json(check_hypotheses(triple, kind));

  TimeGridSpec grid = config_grid(ctx, 2.0, 2000);
  const std::vector<double> times = report_times(ctx, grid);
  const double tol = ctx.cfg.get_double("tolerances.picard", 1e-10);

  PerturbedSemigroup s = construct_perturbed(triple, kind, grid, tol, times);
  ctx.diag["construction"] = diagnostics_json(s.diagnostics());

  // Closed-loop exponential cross-check at t_end (rescaled coordinates).
  Eigen::MatrixXd a_cl = model->generator()->matrix() + b * c;
  const double gap =
      (s.at(grid.t_end).matrix() - (grid.t_end * a_cl).exp()).cwiseAbs().maxCoeff();
  ctx.diag["oracle_gap_t_end"] = gap;

  CsvTable table(kTimeHeader);
  emit_time_rows(table, s, triple, times, mu, nullptr);
  table.write(out_path(ctx, "report.csv"));

  if (ctx.refine > 0) {
    CsvTable conv({"level", "h", "error", "order"});
    double prev = 0.0;
    for (int level = 0; level < ctx.refine; ++level) {
      TimeGridSpec g{grid.t_end, grid.steps * (1 << level)};
      PerturbedSemigroup sk = construct_perturbed(triple, kind, g, tol, {grid.t_end});
      const double err =
          (sk.at(grid.t_end).matrix() - (grid.t_end * a_cl).exp()).cwiseAbs().maxCoeff();
      const double order = level > 0 && err > 0.0 ? std::log2(prev / err) : 0.0;
      conv.add_row({static_cast<double>(level), g.step(), err, order});
      prev = err;
    }
    conv.write(out_path(ctx, "convergence.csv"));
  }
  (void)rng;
}

void run_conv_c0(Ctx& ctx, Rng& rng) {
  ConvC0Config config;
  config.grid_n = ctx.cfg.get_int("example.grid_n", 200);
  config.alpha = ctx.cfg.get_double("example.alpha", 1.5);
  config.b_kernel = named_kernel(ctx.cfg.get_string("example.b_kernel", "one"),
                                 ctx.cfg.get_double("example.b_scale", 1.0), "example.b_kernel");
  config.lambda_sweep = ctx.cfg.get_list("lambda_sweep", config.lambda_sweep);

  ConvC0Build build = build_conv_c0(config);
  json sweep = json::array();
  double lambda_star = -1.0;
  for (double lam : config.lambda_sweep) {
    const double r = spectral_radius_eigen(build.triple.feedback_matrix(lam));
    const double crn = build.cr_norm(lam);
    const double cert = conv_decay_certificate(lam, config.alpha);
    sweep.push_back({{"lambda", lam},
                     {"feedback_spectral_radius", r},
                     {"cr_norm", crn},
                     {"decay_certificate", cert}});
    if (lambda_star < 0.0 && r < 1.0) lambda_star = lam;
  }
  ctx.diag["lambda_sweep"] = sweep;
  ctx.diag["lambda_star"] = lambda_star;
  if (lambda_star < 0.0)
    throw HypothesisFailed("feedback_spectral_radius",
                           "no lambda in the sweep has spectral radius < 1");

  TripleSpec triple = rescale_triple(build.triple, lambda_star, 1.0);
  ctx.diag["rescale_shift"] = lambda_star;

  TimeGridSpec grid = align_grid(config_grid(ctx, 2.0, 2000), 1.0 / config.grid_n);
  const std::vector<double> times = report_times(ctx, grid);
  const double tol = ctx.cfg.get_double("tolerances.picard", 1e-10);

  CsvTable table(kTimeHeader);
  if (!build.signed_data) {
    PerturbedSemigroup s = construct_perturbed(triple, TheoremKind::AL, grid, tol, times);
    ctx.diag["construction"] = diagnostics_json(s.diagnostics());
    emit_time_rows(table, s, triple, times, lambda_star, nullptr);
  } else {
    DominatingSplit split = *build.split;
    split.b_reg_plus = triple.model->resolvent_op(triple.lambda0()) * *split.raw_plus;
    split.b_reg_minus = triple.model->resolvent_op(triple.lambda0()) * *split.raw_minus;
    DominatedPair pair =
        construct_dominated(triple, split, grid, tol, rng, TheoremKind::AL, 1e-8);
    ctx.diag["construction"] = diagnostics_json(pair.s_tilde.diagnostics());
    ctx.diag["domination_excess"] = pair.max_time_excess;
    std::map<double, double> dom;
    for (double t : times)
      dom[t] = (pair.s.at(t).matrix().cwiseAbs() - pair.s_tilde.at(t).matrix()).maxCoeff();
    emit_time_rows(table, pair.s, triple, times, lambda_star, &dom);
  }
  table.write(out_path(ctx, "report.csv"));

  if (ctx.refine > 0) {
    // Gap between the discrete Sup->L1 norm of C R(1,A) and the continuum
    // decay certificate; one-sided by construction.
    CsvTable conv({"level", "h", "error", "order"});
    const double cert = conv_decay_certificate(1.0, config.alpha);
    double prev = 0.0;
    for (int level = 0; level < ctx.refine; ++level) {
      ConvC0Config ck = config;
      ck.grid_n = config.grid_n << level;
      ConvC0Build bk = build_conv_c0(ck);
      const double err = std::abs(cert - bk.cr_norm(1.0));
      const double order = level > 0 && err > 0.0 ? std::log2(prev / err) : 0.0;
      conv.add_row({static_cast<double>(level), 1.0 / ck.grid_n, err, order});
      prev = err;
    }
    conv.write(out_path(ctx, "convergence.csv"));
  }
}

void run_rank_one(Ctx& ctx, Rng& rng) {
  RankOneConfig config;
  config.grid_n = ctx.cfg.get_int("example.grid_n", 200);
  config.p = ctx.cfg.get_double("example.p", 2.0);
  config.b = named_kernel(ctx.cfg.get_string("example.b_kernel", "one"),
                          ctx.cfg.get_double("example.b_scale", 1.0), "example.b_kernel");
  config.phi_density = named_kernel(ctx.cfg.get_string("example.phi", "one"),
                                    ctx.cfg.get_double("example.phi_scale", 1.0), "example.phi");

  RankOneBuild build = build_rank_one_lp(config);
  std::vector<double> sweep_lambdas =
      ctx.cfg.get_list("lambda_sweep", {0.0, 0.5, 1.0, 2.0, 5.0, 10.0});
  json sweep = json::array();
  double lambda_star = -1.0;
  const bool canonical = ctx.cfg.get_string("example.b_kernel", "one") == "one" &&
                         ctx.cfg.get_string("example.phi", "one") == "one";
  for (double lam : sweep_lambdas) {
    const double v = build.feedback_map(lam);
    json row{{"lambda", lam}, {"phi_resolvent_b", v}};
    if (canonical && lam > 0.0)
      row["closed_form"] = (std::exp(-lam) - 1.0 + lam) / (lam * lam);
    sweep.push_back(row);
    if (lambda_star < 0.0 && std::abs(v) < 1.0) lambda_star = lam;
  }
  ctx.diag["lambda_sweep"] = sweep;
  ctx.diag["lambda_star"] = lambda_star;
  ctx.diag["host_consistency_resolvent"] = build.host_consistency.max_resolvent_residual;
  ctx.diag["host_consistency_semigroup"] = build.host_consistency.max_semigroup_residual;
  if (lambda_star < 0.0)
    throw HypothesisFailed("feedback_spectral_radius",
                           "no lambda in the sweep has |Phi R(lambda,A) b| < 1");

  TripleSpec triple = rescale_triple(build.triple, lambda_star, 1.0);
  ctx.diag["rescale_shift"] = lambda_star;

  const double hx = 1.0 / (config.grid_n - 1);
  TimeGridSpec grid = align_grid(config_grid(ctx, 2.0, 2000), hx);
  const std::vector<double> times = report_times(ctx, grid);
  const double tol = ctx.cfg.get_double("tolerances.picard", 1e-10);

  CsvTable table(kTimeHeader);
  if (!build.signed_data) {
    PerturbedSemigroup s = construct_perturbed(triple, TheoremKind::RN, grid, tol, times);
    ctx.diag["construction"] = diagnostics_json(s.diagnostics());
    emit_time_rows(table, s, triple, times, lambda_star, nullptr);
  } else {
    DominatingSplit split = *build.split;
    split.b_reg_plus = triple.model->resolvent_op(triple.lambda0()) * *split.raw_plus;
    split.b_reg_minus = triple.model->resolvent_op(triple.lambda0()) * *split.raw_minus;
    DominatedPair pair =
        construct_dominated(triple, split, grid, tol, rng, TheoremKind::RN, 1e-8);
    ctx.diag["construction"] = diagnostics_json(pair.s_tilde.diagnostics());
    ctx.diag["domination_excess"] = pair.max_time_excess;
    std::map<double, double> dom;
    for (double t : times)
      dom[t] = (pair.s.at(t).matrix().cwiseAbs() - pair.s_tilde.at(t).matrix()).maxCoeff();
    emit_time_rows(table, pair.s, triple, times, lambda_star, &dom);
  }
  table.write(out_path(ctx, "report.csv"));

  if (ctx.refine > 0) {
    CsvTable conv({"level", "h", "error", "order"});
    std::vector<double> feedback_at_one(ctx.refine + 1);
    for (int level = 0; level <= ctx.refine; ++level) {
      RankOneConfig ck = config;
      ck.grid_n = config.grid_n << level;
      feedback_at_one[level] = build_rank_one_lp(ck).feedback_map(1.0);
    }
    double prev = 0.0;
    for (int level = 0; level < ctx.refine; ++level) {
      const double err = std::abs(feedback_at_one[level] - feedback_at_one[ctx.refine]);
      const double order = level > 0 && err > 0.0 ? std::log2(prev / err) : 0.0;
      conv.add_row(
          {static_cast<double>(level), 1.0 / (config.grid_n << level), err, order});
      prev = err;
    }
    conv.write(out_path(ctx, "convergence.csv"));
  }
}

void run_heat(Ctx& ctx, Rng& rng) {
  HeatFeedbackConfig config;
  config.grid_n = ctx.cfg.get_int("example.grid_n", 200);
  config.kernel = named_boundary_kernel(ctx.cfg.get_string("kernel", "const"),
                                        ctx.cfg.get_double("kernel_scale", 0.5), "kernel");
  config.lambda_sweep = ctx.cfg.get_list("lambda_sweep", config.lambda_sweep);
  config.time_grid = config_grid(ctx, 0.5, 64);
  config.report_times = report_times(ctx, config.time_grid);
  config.tol = ctx.cfg.get_double("tolerances.picard", 1e-10);

  HeatScenarioReport rep = heat_feedback_scenario(config, rng);
  ctx.diag["lambda_star"] = rep.lambda_star;
  ctx.diag["route_agreement"] = rep.route_agreement;
  ctx.diag["domination_excess"] = rep.domination_excess;
  ctx.diag["signed_kernel"] = rep.signed_kernel;

  CsvTable table({"lambda", "spectral_radius_phi_Llambda", "norm_Llambda_one"});
  for (const auto& row : rep.sweep)
    table.add_row({row.lambda, row.spectral_radius_phi_llambda, row.norm_llambda_one});
  table.add_section({"t", "min_entry_S", "domination_residual", "mass"});
  for (const auto& row : rep.times)
    table.add_row({row.t, row.min_entry_s, row.domination_residual, row.mass});
  table.write(out_path(ctx, "report.csv"));

  if (ctx.refine > 0) {
    // Boundary-solver convergence: || L_4 (1,1) ||_{L2} against the closed
    // cosh form of the continuum problem.
    CsvTable conv({"level", "h", "error", "order"});
    const double s = 2.0;  // sqrt(lambda) at lambda = 4
    const double exact =
        std::sqrt((0.5 + std::sinh(s) / (2.0 * s)) / std::pow(std::cosh(s / 2.0), 2));
    double prev = 0.0;
    for (int level = 0; level < ctx.refine; ++level) {
      const int nk = ((config.grid_n - 1) << level) + 1;
      BoundaryModel mk = BoundaryModel::laplacian_1d(nk, config.kernel);
      Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(2);
      const double val = mk.interior()->norm(mk.dirichlet_map(4.0).matrix() * ones2);
      const double err = std::abs(val - exact);
      const double order = level > 0 && err > 0.0 ? std::log2(prev / err) : 0.0;
      conv.add_row({static_cast<double>(level), 1.0 / (nk - 1), err, order});
      prev = err;
    }
    conv.write(out_path(ctx, "convergence.csv"));
  }
}

}  // namespace

int run_scenario(Config cfg, const RunOptions& opts) {
  Ctx ctx;
  ctx.cfg = std::move(cfg);
  ctx.quiet = opts.quiet;
  try {
    ctx.out_dir = !opts.output_dir.empty() ? opts.output_dir
                                           : ctx.cfg.get_string("output_dir", "out");
    ctx.seed = opts.seed >= 0 ? static_cast<std::uint64_t>(opts.seed)
                              : static_cast<std::uint64_t>(ctx.cfg.get_int("seed", 42));
    ctx.refine = opts.refine_levels >= 0 ? opts.refine_levels : ctx.cfg.get_int("refine.levels", 0);
    const std::string scenario = ctx.cfg.require_string("scenario");
    ctx.diag["scenario"] = scenario;
    ctx.diag["seed"] = ctx.seed;
    Rng rng(ctx.seed);

    if (scenario == "triple") {
      run_triple(ctx, rng);
    } else if (scenario == "conv_c0") {
      run_conv_c0(ctx, rng);
    } else if (scenario == "rank_one_lp") {
      run_rank_one(ctx, rng);
    } else if (scenario == "heat_feedback") {
      run_heat(ctx, rng);
    } else {
      throw ConfigError("unknown scenario '" + scenario + "'");
    }
    ctx.diag["status"] = "ok";
    write_diagnostics(ctx);
    if (!ctx.quiet)
      std::cout << "[semilat] " << ctx.cfg.require_string("scenario") << " -> " << ctx.out_dir
                << std::endl;
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const HypothesisFailed& e) {
    std::cerr << "hypothesis failed [" << e.which() << "]: " << e.what() << std::endl;
    ctx.diag["status"] = "hypothesis_failed";
    ctx.diag["failed_hypothesis"] = e.which();
    ctx.diag["message"] = e.what();
    if (!ctx.out_dir.empty()) write_diagnostics(ctx);
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    ctx.diag["status"] = "numerical_error";
    ctx.diag["message"] = e.what();
    if (!ctx.out_dir.empty()) write_diagnostics(ctx);
    return 3;
  }
}

int run_scenario(const std::string& config_path, const RunOptions& opts) {
  try {
    Config cfg = Config::parse_file(config_path);
    return run_scenario(std::move(cfg), opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace semilat
