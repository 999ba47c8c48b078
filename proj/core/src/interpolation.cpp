#include "semilat/interpolation.hpp"

#include <cmath>

#include "semilat/errors.hpp"

namespace semilat {

TimeOperator::TimeOperator(Eigen::MatrixXd matrix, int n_components)
    : mat_(std::move(matrix)), n_components_(n_components) {
  if (n_components_ < 1 || mat_.rows() != mat_.cols() || mat_.rows() % n_components_ != 0)
    throw Error("TimeOperator: matrix must be square with time-major component blocks");
}

double TimeOperator::sup_norm() const { return mat_.cwiseAbs().rowwise().sum().maxCoeff(); }

double TimeOperator::l1_norm() const { return mat_.cwiseAbs().colwise().sum().maxCoeff(); }

double TimeOperator::vector_p_norm(const Eigen::VectorXd& f, double p) const {
  return std::pow(f.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

namespace {

// Nonnegative sample supported on a random time window.
Eigen::VectorXd compact_sample(int n_times, int n_components, Rng& rng) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_times * n_components);
  const int lo = rng.uniform_int(0, n_times / 2);
  const int hi = rng.uniform_int(lo + 1, n_times);
  for (int t = lo; t < hi; ++t)
    for (int c = 0; c < n_components; ++c) f[t * n_components + c] = rng.unit();
  return f;
}

}  // namespace

double holder_positive_check(const TimeOperator& t, double p, int trials, Rng& rng) {
  if (!t.positive()) throw NotPositiveOperator("holder_positive_check: operator is not positive");
  if (!(p > 1.0)) throw Error("holder_positive_check: p must exceed 1");
  const double q = p / (p - 1.0);
  const Eigen::MatrixXd& m = t.matrix();
  double violation = 0.0;
  for (int k = 0; k < trials; ++k) {
    Eigen::VectorXd f = compact_sample(t.n_times(), t.n_components(), rng);
    Eigen::VectorXd g = compact_sample(t.n_times(), t.n_components(), rng);
    Eigen::VectorXd lhs = m * f.cwiseProduct(g);
    Eigen::VectorXd rhs = (m * f.array().pow(p).matrix()).array().pow(1.0 / p) *
                          (m * g.array().pow(q).matrix()).array().pow(1.0 / q);
    violation = std::max(violation, (lhs - rhs).maxCoeff());
  }
  return violation;
}

RieszThorinReport riesz_thorin_check(const TimeOperator& t, const std::vector<double>& p_list,
                                     int trials, Rng& rng) {
  if (!t.positive()) throw NotPositiveOperator("riesz_thorin_check: operator is not positive");
  RieszThorinReport rep;
  rep.m0 = t.sup_norm();
  rep.m1 = t.l1_norm();
  rep.max_excess = 0.0;
  const Eigen::MatrixXd& m = t.matrix();
  const Eigen::Index n = m.cols();

  std::vector<Eigen::VectorXd> probes;
  probes.reserve(static_cast<size_t>(trials) + 2);
  probes.push_back(Eigen::VectorXd::Ones(n));
  for (int k = 0; k < trials; ++k)
    probes.push_back(compact_sample(t.n_times(), t.n_components(), rng));

  for (double p : p_list) {
    double emp = 0.0;
    // Analytic maximizer candidates: basis vectors and the constant vector.
    for (Eigen::Index j = 0; j < n; ++j) {
      const double num = t.vector_p_norm(m.col(j), p);
      emp = std::max(emp, num);  // ||e_j||_p == 1
    }
    for (const auto& f : probes) {
      const double fn = t.vector_p_norm(f, p);
      if (fn > 0.0) emp = std::max(emp, t.vector_p_norm(m * f, p) / fn);
    }
    const double bound = std::pow(rep.m0, 1.0 - 1.0 / p) * std::pow(rep.m1, 1.0 / p);
    rep.p_values.push_back(p);
    rep.empirical.push_back(emp);
    rep.bound.push_back(bound);
    rep.max_excess = std::max(rep.max_excess, emp - bound);
  }
  return rep;
}

}  // namespace semilat
