#include "semilat/operator.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace semilat {

namespace {

double inf_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

LinOp::LinOp(SpacePtr domain, SpacePtr codomain, Eigen::MatrixXd matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), mat_(std::move(matrix)) {
  if (!domain_ || !codomain_) throw Error("LinOp: null space");
  if (mat_.rows() != codomain_->dim() || mat_.cols() != domain_->dim())
    throw SpaceMismatch("LinOp: matrix shape does not match spaces");
}

LinOp LinOp::identity(const SpacePtr& space) {
  return LinOp(space, space, Eigen::MatrixXd::Identity(space->dim(), space->dim()));
}

LinOp LinOp::zero(const SpacePtr& domain, const SpacePtr& codomain) {
  return LinOp(domain, codomain, Eigen::MatrixXd::Zero(codomain->dim(), domain->dim()));
}

Eigen::VectorXd LinOp::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mat_.cols()) throw SpaceMismatch("LinOp::apply: dimension mismatch");
  return mat_ * x;
}

LatticeVector LinOp::apply(const LatticeVector& x) const {
  if (!x.space->same_space(*domain_)) throw SpaceMismatch("LinOp::apply: wrong domain space");
  return {codomain_, mat_ * x.values};
}

LinOp LinOp::operator*(const LinOp& rhs) const {
  if (rhs.codomain_->dim() != domain_->dim())
    throw SpaceMismatch("LinOp composition: dimension mismatch");
  return LinOp(rhs.domain_, codomain_, mat_ * rhs.mat_);
}

LinOp LinOp::operator+(const LinOp& rhs) const {
  if (mat_.rows() != rhs.mat_.rows() || mat_.cols() != rhs.mat_.cols())
    throw SpaceMismatch("LinOp sum: shape mismatch");
  return LinOp(domain_, codomain_, mat_ + rhs.mat_);
}

LinOp LinOp::operator-(const LinOp& rhs) const {
  if (mat_.rows() != rhs.mat_.rows() || mat_.cols() != rhs.mat_.cols())
    throw SpaceMismatch("LinOp difference: shape mismatch");
  return LinOp(domain_, codomain_, mat_ - rhs.mat_);
}

namespace {

// ||row functional||: dual norm of a single-output operator.
double functional_norm(const Eigen::VectorXd& row, const GridSpace& dom) {
  switch (dom.norm_kind()) {
    case NormKind::L1: {
      double best = 0.0;
      for (Eigen::Index j = 0; j < row.size(); ++j)
        best = std::max(best, std::abs(row[j]) / dom.weights()[j]);
      return best;
    }
    case NormKind::Sup:
      return row.cwiseAbs().sum();
    case NormKind::Lp: {
      const double q = dom.p() / (dom.p() - 1.0);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < row.size(); ++j)
        acc += dom.weights()[j] * std::pow(std::abs(row[j]) / dom.weights()[j], q);
      return std::pow(acc, 1.0 / q);
    }
  }
  return 0.0;
}

double unit_scalar_norm(const GridSpace& space) {
  // Norm of the scalar 1 in a one-dimensional space.
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  return space.norm(one);
}

}  // namespace

NormEstimate op_norm(const LinOp& op, Rng* rng, int probes) {
  const GridSpace& dom = *op.domain();
  const GridSpace& cod = *op.codomain();
  const Eigen::MatrixXd& m = op.matrix();
  const Eigen::MatrixXd a = m.cwiseAbs();
  const NormKind dk = dom.norm_kind();
  const NormKind ck = cod.norm_kind();

  // Rank-one shapes have closed-form norms for every kind.
  if (cod.dim() == 1) {
    const double v = functional_norm(m.row(0).transpose(), dom) * unit_scalar_norm(cod);
    return {v, v, true};
  }
  if (dom.dim() == 1) {
    const double v = cod.norm(m.col(0)) / unit_scalar_norm(dom);
    return {v, v, true};
  }
  // Extreme points of the weighted-L1 ball are scaled basis vectors.
  if (dk == NormKind::L1) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      best = std::max(best, cod.norm(m.col(j)) / dom.weights()[j]);
    return {best, best, true};
  }
  // Sup codomain: decouples into per-row functional norms.
  if (ck == NormKind::Sup) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      best = std::max(best, functional_norm(m.row(i).transpose(), dom));
    return {best, best, true};
  }
  if (dk == NormKind::Sup && ck == NormKind::L1) {
    const double bound = cod.weights().dot(a.rowwise().sum());
    const bool signed_entries = m.minCoeff() < 0.0 && m.maxCoeff() > 0.0;
    if (!signed_entries) return {bound, bound, true};
    // Signed case: the bound is the norm of |T|; probe sign vectors below it.
    double lower = cod.norm(m * Eigen::VectorXd::Ones(m.cols()));
    if (rng) {
      for (int t = 0; t < probes; ++t) {
        Eigen::VectorXd s(m.cols());
        for (Eigen::Index j = 0; j < m.cols(); ++j) s[j] = rng->unit() < 0.5 ? -1.0 : 1.0;
        lower = std::max(lower, cod.norm(m * s));
      }
    }
    return {lower, bound, false};
  }
  if (dk == NormKind::Lp && ck == NormKind::Lp && std::abs(dom.p() - 2.0) < 1e-14 &&
      std::abs(cod.p() - 2.0) < 1e-14) {
    // Weighted L2: largest singular value of W_c^{1/2} T W_d^{-1/2}.
    Eigen::MatrixXd scaled = cod.weights().cwiseSqrt().asDiagonal() * m *
                             dom.weights().cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    const double v = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    return {v, v, true};
  }

  // Remaining kinds (Sup->Lp, Lp->Lp with p != 2, Lp->L1): probe supremum
  // for a certified lower bound, interpolation through |T| for the upper.
  auto retagged_norm = [&](NormKind k) {
    auto dsp = std::make_shared<GridSpace>(dom.nodes(), dom.weights(), dom.interval_a(),
                                           dom.interval_b(), k);
    auto csp = std::make_shared<GridSpace>(cod.nodes(), cod.weights(), cod.interval_a(),
                                           cod.interval_b(), k);
    return op_norm(LinOp(dsp, csp, a)).upper;
  };
  const double m1 = retagged_norm(NormKind::L1);
  const double m0 = retagged_norm(NormKind::Sup);
  double upper;
  if (dk == NormKind::Sup && ck == NormKind::Lp) {
    // Single-vector interpolation of the codomain norm.
    const double theta = 1.0 / cod.p();
    const double m_sup_l1 = cod.weights().dot(a.rowwise().sum());
    upper = std::pow(m_sup_l1, theta) * std::pow(m0, 1.0 - theta);
  } else if (dk == NormKind::Lp && ck == NormKind::Lp) {
    const double theta = 1.0 / dom.p();
    upper = std::pow(m1, theta) * std::pow(m0, 1.0 - theta);
  } else {
    // Lp -> L1: factor the codomain embedding Lp(w) -> L1(w).
    const double theta = 1.0 / dom.p();
    const double lp_lp = std::pow(m1, theta) * std::pow(m0, 1.0 - theta);
    upper = std::pow(cod.weights().sum(), 1.0 - 1.0 / dom.p()) * lp_lp;
  }

  double lower = 0.0;
  auto consider = [&](const Eigen::VectorXd& x) {
    const double nx = dom.norm(x);
    if (nx > 0.0) lower = std::max(lower, cod.norm(m * x) / nx);
  };
  for (Eigen::Index j = 0; j < m.cols(); ++j) consider(Eigen::VectorXd::Unit(m.cols(), j));
  consider(Eigen::VectorXd::Ones(m.cols()));
  // Power iteration on |T| picks a near-extremal direction.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m.cols());
  for (int it = 0; it < 20; ++it) {
    Eigen::VectorXd y = a.transpose() * (a * x);
    const double n = y.norm();
    if (n <= 0.0) break;
    x = y / n;
  }
  consider(x.cwiseAbs());
  if (rng) {
    for (int t = 0; t < probes; ++t) consider(rng->uniform_vec(m.cols(), -1.0, 1.0));
  }
  return {std::min(lower, upper), upper, false};
}

double op_norm_upper(const LinOp& op) { return op_norm(op).upper; }

LinOp resolvent(const LinOp& a, double lambda) {
  if (!a.square()) throw SpaceMismatch("resolvent: operator must be square");
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd m = lambda * Eigen::MatrixXd::Identity(n, n) - a.matrix();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::MatrixXd r = lu.solve(Eigen::MatrixXd::Identity(n, n));
  const double residual = (m * r - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!r.allFinite() || residual > 1e-8) {
    std::ostringstream msg;
    msg << "resolvent: solve at lambda=" << lambda << " failed (residual " << residual << ")";
    throw SingularResolvent(msg.str());
  }
  return LinOp(a.domain(), a.codomain(), std::move(r));
}

double spectral_radius_eigen(const LinOp& op) {
  if (!op.square()) throw SpaceMismatch("spectral_radius: operator must be square");
  if (op.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(op.matrix(), /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

GelfandReport spectral_radius_gelfand(const LinOp& op, int n_max) {
  if (!op.square()) throw SpaceMismatch("spectral_radius: operator must be square");
  if (n_max < 1) throw Error("spectral_radius_gelfand: n_max must be >= 1");
  GelfandReport rep;
  Eigen::MatrixXd cur = op.matrix();
  double logscale = 0.0;
  int n = 1;
  auto record = [&]() {
    const double nn = inf_norm(cur);
    const double est = nn > 0.0 ? std::exp((logscale + std::log(nn)) / n) : 0.0;
    rep.powers.push_back(n);
    rep.estimates.push_back(est);
  };
  record();
  while (n < n_max) {
    const int step = std::min(n, n_max - n);  // squaring, last step may multiply partially
    if (step == n) {
      cur = cur * cur;
      n *= 2;
    } else {
      // Finish with a single multiply chain for non-dyadic n_max.
      Eigen::MatrixXd base = op.matrix();
      for (int k = 0; k < step; ++k) cur = cur * base;
      n += step;
    }
    const double nn = inf_norm(cur);
    if (nn > 1e120 || (nn > 0.0 && nn < 1e-120)) {
      logscale += std::log(nn);
      cur /= nn;
    }
    record();
  }
  rep.value = rep.estimates.back();
  return rep;
}

double spectral_radius(const LinOp& op, SpectralMethod method, int n_max) {
  if (method == SpectralMethod::Eigen) return spectral_radius_eigen(op);
  return spectral_radius_gelfand(op, n_max).value;
}

LinOp neumann_inverse(const LinOp& op, double tol) {
  if (!op.square()) throw SpaceMismatch("neumann_inverse: operator must be square");
  const double r = spectral_radius_eigen(op);
  if (r >= 1.0) {
    std::ostringstream msg;
    msg << "neumann_inverse: spectral radius " << r << " >= 1";
    throw DivergentSeries(msg.str());
  }
  const Eigen::Index n = op.rows();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  double prev_inc = std::numeric_limits<double>::infinity();
  int growing = 0;
  for (int it = 0; it < 200000; ++it) {
    term = term * op.matrix();
    acc += term;
    const double inc = inf_norm(term);
    if (inc <= tol) {
      LinOp result(op.domain(), op.codomain(), acc);
      const double resid =
          inf_norm((Eigen::MatrixXd::Identity(n, n) - op.matrix()) * acc -
                   Eigen::MatrixXd::Identity(n, n));
      if (resid > 10.0 * tol && resid > 1e-12)
        throw DivergentSeries("neumann_inverse: truncated series residual too large");
      return result;
    }
    if (inc > prev_inc) {
      if (++growing >= 10) throw DivergentSeries("neumann_inverse: increments grew 10 times");
    } else {
      growing = 0;
    }
    prev_inc = inc;
  }
  throw DivergentSeries("neumann_inverse: iteration cap reached");
}

PositivityReport op_positivity_check(const LinOp& op, double tol, Rng* rng, int probes) {
  PositivityReport rep{};
  rep.min_entry = op.matrix().size() ? op.matrix().minCoeff() : 0.0;
  rep.positive = rep.min_entry >= -tol;
  rep.probe_violation = 0.0;
  if (rep.positive && rng) {
    for (int t = 0; t < probes; ++t) {
      Eigen::VectorXd x = rng->uniform_vec(op.cols(), -1.0, 1.0);
      Eigen::VectorXd lhs = (op.matrix() * x).cwiseAbs();
      Eigen::VectorXd rhs = op.matrix() * x.cwiseAbs();
      rep.probe_violation = std::max(rep.probe_violation, (lhs - rhs).maxCoeff());
    }
  }
  return rep;
}

DominationReport domination_check(const LinOp& s, const LinOp& t, double tol, Rng* rng) {
  if (s.rows() != t.rows() || s.cols() != t.cols())
    throw SpaceMismatch("domination_check: shape mismatch");
  DominationReport rep{};
  rep.max_excess = (s.matrix().cwiseAbs() - t.matrix()).maxCoeff();
  rep.dominated = rep.max_excess <= tol;

  // Sampled definition on the cone; includes basis vectors, which make the
  // probe route equivalent to the entrywise route.
  bool probe_ok = true;
  const double scale = std::max(1.0, t.matrix().cwiseAbs().maxCoeff());
  auto check_probe = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd lhs = (s.matrix() * x).cwiseAbs();
    Eigen::VectorXd rhs = t.matrix() * x;
    if ((lhs - rhs).maxCoeff() > tol * x.cwiseAbs().maxCoeff() + 1e-13 * scale) probe_ok = false;
  };
  for (Eigen::Index j = 0; j < s.cols(); ++j) check_probe(Eigen::VectorXd::Unit(s.cols(), j));
  if (rng) {
    for (int it = 0; it < 30; ++it) check_probe(rng->uniform_vec(s.cols(), 0.0, 1.0));
  }
  rep.probe_route_agrees = (probe_ok == rep.dominated);

  rep.sr_s = spectral_radius_eigen(s);
  rep.sr_t = spectral_radius_eigen(t);
  rep.sr_ok = true;
  rep.power_norms_ok = true;
  if (rep.dominated) {
    rep.sr_ok = rep.sr_s <= rep.sr_t + 1e-8;
    Eigen::MatrixXd sp = s.matrix();
    Eigen::MatrixXd tp = t.matrix();
    for (int n = 1; n <= 8; ++n) {
      if (inf_norm(sp) > inf_norm(tp) + tol) {
        rep.power_norms_ok = false;
        break;
      }
      sp = sp * s.matrix();
      tp = tp * t.matrix();
    }
  }
  return rep;
}

}  // namespace semilat
