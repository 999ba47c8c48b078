#include "semilat/catalog.hpp"

#include <cmath>

namespace semilat {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double whole,
                        double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = simpson(f, a, mid);
  const double right = simpson(f, mid, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, mid, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, mid, b, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  return adaptive_simpson(f, a, b, simpson(f, a, b), tol, 40);
}

}  // namespace

double conv_decay_certificate(double lambda, double alpha) {
  if (!(alpha >= 1.0 && alpha < 2.0)) throw BadAlpha("conv_decay_certificate: alpha not in [1,2)");
  if (lambda <= 0.0) throw Error("conv_decay_certificate: lambda must be positive");
  const double eps = std::min(0.5, 1.0 / lambda);
  // Series on [0, eps]: (1 - e^{-lam x}) = sum_k (-1)^{k+1} (lam x)^k / k!.
  double series = 0.0;
  double lam_pow = 1.0;  // lambda^{k-1}
  double factorial = 1.0;
  for (int k = 1; k <= 40; ++k) {
    factorial *= k;
    const double term =
        lam_pow * std::pow(eps, k + 1.0 - alpha) / ((k + 1.0 - alpha) * factorial);
    series += (k % 2 == 1 ? term : -term);
    lam_pow *= lambda;
    if (std::abs(term) < 1e-16 * std::max(1.0, std::abs(series))) break;
  }
  auto integrand = [&](double x) {
    return std::pow(x, -alpha) * (1.0 - std::exp(-lambda * x)) / lambda;
  };
  return series + (eps < 1.0 ? integrate(integrand, eps, 1.0, 1e-11) : 0.0);
}

ConvC0Build build_conv_c0(const ConvC0Config& config) {
  if (!(config.alpha >= 1.0 && config.alpha < 2.0))
    throw BadAlpha("build_conv_c0: alpha not in [1,2)");
  if (!config.b_kernel) throw Error("build_conv_c0: kernel required");
  const int n = config.grid_n;
  const double h = 1.0 / n;

  Eigen::VectorXd nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = (i + 1) * h;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
  auto x_space = std::make_shared<GridSpace>(nodes, w, 0.0, 1.0, NormKind::Sup);
  auto u_space = std::make_shared<GridSpace>(nodes, w, 0.0, 1.0, NormKind::L1);

  ModelPtr model = SemigroupModel::nilpotent_right_shift(x_space);

  // B u = b * u, one-sided rectangle quadrature over (0, x_i].
  Eigen::MatrixXd b_mat = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) b_mat(i, j) = h * config.b_kernel(nodes[i] - nodes[j]);
  LinOp braw(u_space, x_space, std::move(b_mat));

  // C f = f(x) / x^alpha on the excluded-origin grid.
  Eigen::MatrixXd c_mat = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) c_mat(i, i) = std::pow(nodes[i], -config.alpha);
  LinOp c_op(x_space, u_space, std::move(c_mat));

  TripleSpec triple;
  triple.model = model;
  triple.control = RegularizedControl::from_raw(*model, braw, 0.0);
  triple.observation = c_op;
  triple.u_space = u_space;
  triple.u_tag = UTag::AL;
  triple.z_flag = ZFlag::BoundedScaledValues;

  ConvC0Build build{triple, config.alpha, false, std::nullopt, {}};
  build.signed_data = braw.matrix().minCoeff() < -1e-14;
  if (build.signed_data) {
    Eigen::MatrixXd b_plus = braw.matrix().cwiseMax(0.0);
    Eigen::MatrixXd b_minus = (-braw.matrix()).cwiseMax(0.0);
    LinOp raw_p(u_space, x_space, b_plus);
    LinOp raw_m(u_space, x_space, b_minus);
    build.split = DominatingSplit{model->resolvent_op(0.0) * raw_p,
                                  model->resolvent_op(0.0) * raw_m, raw_p, raw_m, c_op};
  }
  build.cr_norm = [model, c_op](double lambda) {
    return op_norm(c_op * model->resolvent_op(lambda)).upper;
  };
  return build;
}

RankOneBuild build_rank_one_lp(const RankOneConfig& config) {
  if (!config.b || !config.phi_density) throw Error("build_rank_one_lp: b and phi required");
  if (!(config.p >= 1.0)) throw Error("build_rank_one_lp: p must be >= 1");
  const int n = config.grid_n;

  auto x_space = GridSpace::uniform_trapezoid(
      n, 0.0, 1.0, config.p == 1.0 ? NormKind::L1 : NormKind::Lp, config.p);
  auto host_space = GridSpace::uniform_trapezoid(n, 0.0, 1.0, NormKind::L1);
  auto u_space = GridSpace::vector_space(1, NormKind::Sup);

  ModelPtr model = SemigroupModel::nilpotent_left_shift(x_space);
  ModelPtr host_model = SemigroupModel::nilpotent_left_shift(host_space);

  Eigen::MatrixXd b_col(n, 1);
  for (int i = 0; i < n; ++i) b_col(i, 0) = config.b(x_space->nodes()[i]);
  LinOp braw(u_space, x_space, b_col);

  Eigen::MatrixXd phi_row(1, n);
  for (int i = 0; i < n; ++i)
    phi_row(0, i) = x_space->weights()[i] * config.phi_density(x_space->nodes()[i]);
  LinOp c_op(x_space, u_space, phi_row);

  TripleSpec triple;
  triple.model = model;
  // b lives on the L1 host grid; same nodes, so the regularized column is
  // computed there and carried over verbatim.
  triple.control = RegularizedControl::from_raw(*host_model, LinOp(u_space, host_space, b_col),
                                                /*lambda0=*/0.0);
  triple.control.raw = braw;
  triple.control.b_reg = LinOp(u_space, x_space, triple.control.b_reg.matrix());
  triple.observation = c_op;
  triple.u_space = u_space;
  triple.u_tag = UTag::Dual;
  triple.z_flag = ZFlag::ContinuousProxy;

  RankOneBuild build{triple, false, std::nullopt, {}, {}};
  build.signed_data = b_col.minCoeff() < -1e-14 || phi_row.minCoeff() < -1e-14;
  if (build.signed_data) {
    Eigen::MatrixXd b_plus = b_col.cwiseMax(0.0);
    Eigen::MatrixXd b_minus = (-b_col).cwiseMax(0.0);
    DominatingSplit split{
        LinOp(u_space, x_space, host_model->resolvent_op(0.0).matrix() * b_plus),
        LinOp(u_space, x_space, host_model->resolvent_op(0.0).matrix() * b_minus),
        LinOp(u_space, x_space, b_plus), LinOp(u_space, x_space, b_minus),
        LinOp(x_space, u_space, phi_row.cwiseAbs())};
    build.split = split;
  }

  Rng consistency_rng(20240801u);
  build.host_consistency = subspace_consistency_check(*host_model, *model, {0.0, 0.5, 2.0},
                                                      {0.1, 0.5, 1.0}, consistency_rng, 10);

  ModelPtr fm = model;
  LinOp craw = c_op;
  Eigen::MatrixXd bc = b_col;
  build.feedback_map = [fm, craw, bc](double lambda) {
    return (craw.matrix() * fm->resolvent_op(lambda).matrix() * bc)(0, 0);
  };
  return build;
}

}  // namespace semilat
