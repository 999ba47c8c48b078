#include "semilat/boundary.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace semilat {

BoundaryModel BoundaryModel::laplacian_1d(int n_nodes,
                                          std::function<double(double, double)> kernel,
                                          NormKind x_kind, double p) {
  if (n_nodes < 4) throw Error("laplacian_1d: need at least 4 grid nodes");
  BoundaryModel model;
  const int n = n_nodes - 2;
  model.h_ = 1.0 / (n_nodes - 1);
  const double h = model.h_;

  Eigen::VectorXd nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = (i + 1) * h;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  model.interior_ =
      std::make_shared<GridSpace>(std::move(nodes), std::move(w), h / 2.0, 1.0 - h / 2.0,
                                  x_kind, p);
  model.boundary_ = GridSpace::vector_space(2, NormKind::Sup);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = -2.0 / (h * h);
    if (i > 0) a(i, i - 1) = 1.0 / (h * h);
    if (i + 1 < n) a(i, i + 1) = 1.0 / (h * h);
  }
  model.a_dirichlet_ = LinOp(model.interior_, model.interior_, std::move(a));

  model.coupling_ = Eigen::MatrixXd::Zero(n, 2);
  model.coupling_(0, 0) = 1.0 / (h * h);
  model.coupling_(n - 1, 1) = 1.0 / (h * h);

  Eigen::MatrixXd phi(2, n);
  for (int i = 0; i < n; ++i) {
    const double x = (i + 1) * h;
    phi(0, i) = h * kernel(0.0, x);
    phi(1, i) = h * kernel(1.0, x);
  }
  model.phi_ = LinOp(model.interior_, model.boundary_, std::move(phi));
  return model;
}

LinOp BoundaryModel::dirichlet_map(double lambda) const {
  const int n = interior_->dim();
  const int nf = n + 2;
  const double h = h_;

  // Full-grid system: interior rows lambda f - D2 f = 0, trace rows f = g.
  auto solve_full = [&](double lam) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nf, nf);
    m(0, 0) = 1.0;
    m(nf - 1, nf - 1) = 1.0;
    for (int i = 1; i + 1 < nf; ++i) {
      m(i, i) = lam + 2.0 / (h * h);
      m(i, i - 1) = -1.0 / (h * h);
      m(i, i + 1) = -1.0 / (h * h);
    }
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, 2);
    rhs(0, 0) = 1.0;
    rhs(nf - 1, 1) = 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    Eigen::MatrixXd f = lu.solve(rhs);
    const double resid = (m * f - rhs).cwiseAbs().maxCoeff();
    if (!f.allFinite() || resid > 1e-8) {
      std::ostringstream msg;
      msg << "dirichlet_map: boundary solve failed at lambda=" << lam << " (residual " << resid
          << ")";
      throw SingularBVP(msg.str());
    }
    return f;
  };

  Eigen::MatrixXd full = solve_full(lambda);
  // Trace of the solution must reproduce the boundary data.
  const double trace_resid = std::max(std::abs(full(0, 0) - 1.0) + std::abs(full(0, 1)),
                                      std::abs(full(nf - 1, 1) - 1.0) + std::abs(full(nf - 1, 0)));
  if (trace_resid > 1e-10) throw SingularBVP("dirichlet_map: trace rows not satisfied");

  Eigen::MatrixXd interior_part = full.middleRows(1, n);

  // Two-parameter identity L_lambda = (mu - A) R(lambda, A) L_mu.
  const double mu = lambda + 1.0;
  Eigen::MatrixXd lmu = solve_full(mu).middleRows(1, n);
  const Eigen::MatrixXd& ad = a_dirichlet_.matrix();
  Eigen::MatrixXd lhs =
      (lambda * Eigen::MatrixXd::Identity(n, n) - ad).partialPivLu().solve(
          mu * lmu - ad * lmu);
  const double ident_resid = (lhs - interior_part).cwiseAbs().maxCoeff();
  if (ident_resid > 1e-8)
    throw Error("dirichlet_map: two-parameter resolvent identity violated");

  return LinOp(boundary_, interior_, std::move(interior_part));
}

ModelPtr BoundaryModel::heat_model(int mode_count) const {
  return SemigroupModel::heat1d(interior_, mode_count);
}

TripleSpec BoundaryModel::feedback_triple(int mode_count) const {
  TripleSpec triple;
  triple.model = heat_model(mode_count);
  const double lambda0 = 1.0;
  triple.control = RegularizedControl::from_raw(
      *triple.model, LinOp(boundary_, interior_, coupling_), lambda0);
  triple.observation = phi_;
  triple.u_space = boundary_;
  triple.u_tag = UTag::AM;
  triple.z_flag = ZFlag::All;
  return triple;
}

BoundaryGeneratorResult boundary_generator(const BoundaryModel& model, double lambda_check,
                                           const TimeGridSpec& grid,
                                           const std::vector<double>& store_times, double tol,
                                           Rng& rng) {
  BoundaryGeneratorResult out;
  TripleSpec triple = model.feedback_triple();

  LinOp l_lambda = model.dirichlet_map(lambda_check);
  LinOp phi_l = LinOp(model.boundary(), model.boundary(),
                      model.phi().matrix() * l_lambda.matrix());
  out.r_check = spectral_radius_eigen(phi_l);
  if (out.r_check >= 1.0) {
    std::ostringstream msg;
    msg << "spectral radius " << out.r_check << " >= 1 at lambda=" << lambda_check;
    throw HypothesisFailed("phi_dirichlet_spectral_radius", msg.str());
  }

  const Eigen::MatrixXd& phi = model.phi().matrix();
  out.positive_route = phi.minCoeff() >= -1e-12;

  // Route (a): trace elimination, A_eff = A_D + N Phi.
  Eigen::MatrixXd a_eff = model.a_dirichlet().matrix() + model.coupling() * phi;

  // Route (b): factorized resolvent of the boundary triple; the two must
  // produce the same resolvent.
  const int n = model.interior()->dim();
  Eigen::MatrixXd direct =
      (lambda_check * Eigen::MatrixXd::Identity(n, n) - a_eff)
          .partialPivLu()
          .solve(Eigen::MatrixXd::Identity(n, n));
  TripleSpec fact_triple = triple;
  Eigen::MatrixXd fact = resolvent_factorization(fact_triple, lambda_check).matrix();
  out.route_agreement = (direct - fact).cwiseAbs().maxCoeff();
  if (out.route_agreement > 1e-6) {
    std::ostringstream msg;
    msg << "boundary_generator: routes disagree by " << out.route_agreement;
    throw InconsistentRepresentations(msg.str());
  }

  out.domination_excess = 0.0;
  if (out.positive_route) {
    PerturbedDiagnostics diag;
    diag.kind = TheoremKind::AM;
    diag.hypothesis_report = check_hypotheses(triple, TheoremKind::AM);
    diag.r_feedback = spectral_radius_eigen(triple.feedback_matrix(0.0));
    out.s = detail::construct_closed_loop(triple, grid, store_times, std::move(diag));
  } else {
    DominatingSplit split{triple.control.b_reg,
                          LinOp::zero(model.boundary(), model.interior()),
                          LinOp(model.boundary(), model.interior(), model.coupling()),
                          LinOp::zero(model.boundary(), model.interior()),
                          LinOp(model.interior(), model.boundary(), phi.cwiseAbs())};
    DominatedPair pair =
        construct_dominated(triple, split, grid, tol, rng, TheoremKind::AM, 1e-8);
    out.s = std::move(pair.s);
    out.s_tilde = std::move(pair.s_tilde);
    out.domination_excess = pair.max_time_excess;
  }
  return out;
}

HeatScenarioReport heat_feedback_scenario(const HeatFeedbackConfig& config, Rng& rng) {
  if (!config.kernel) throw Error("heat_feedback_scenario: kernel required");
  BoundaryModel model = BoundaryModel::laplacian_1d(config.grid_n, config.kernel);

  HeatScenarioReport rep;
  rep.lambda_star = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd ones_boundary = Eigen::VectorXd::Ones(2);
  for (double lam : config.lambda_sweep) {
    LinOp l_lam = model.dirichlet_map(lam);
    HeatLambdaRow row;
    row.lambda = lam;
    row.spectral_radius_phi_llambda = spectral_radius_eigen(
        LinOp(model.boundary(), model.boundary(), model.phi().matrix() * l_lam.matrix()));
    row.norm_llambda_one = model.interior()->norm(l_lam.matrix() * ones_boundary);
    rep.sweep.push_back(row);
    if (std::isnan(rep.lambda_star) && row.spectral_radius_phi_llambda < 1.0)
      rep.lambda_star = lam;
  }

  std::vector<double> report_times = config.report_times;
  if (report_times.empty()) {
    for (int k = 1; k <= 8; ++k) report_times.push_back(config.time_grid.t_end * k / 8.0);
  }

  rep.route_agreement = 0.0;
  rep.domination_excess = 0.0;
  rep.signed_kernel = model.phi().matrix().minCoeff() < -1e-12;
  if (!std::isnan(rep.lambda_star)) {
    BoundaryGeneratorResult gen = boundary_generator(model, rep.lambda_star, config.time_grid,
                                                     report_times, config.tol, rng);
    rep.route_agreement = gen.route_agreement;
    rep.domination_excess = gen.domination_excess;

    Eigen::VectorXd u0 = Eigen::VectorXd::Ones(model.interior()->dim());
    const Eigen::VectorXd& w = model.interior()->weights();
    for (double t : report_times) {
      LinOp st = gen.s.at(t);
      HeatTimeRow row;
      row.t = t;
      row.min_entry_s = st.matrix().minCoeff();
      row.domination_residual = 0.0;
      if (gen.s_tilde) {
        row.domination_residual =
            (st.matrix().cwiseAbs() - gen.s_tilde->at(t).matrix()).maxCoeff();
      }
      row.mass = w.dot(st.matrix() * u0);
      rep.times.push_back(row);
    }
  }
  return rep;
}

}  // namespace semilat
