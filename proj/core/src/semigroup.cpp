#include "semilat/semigroup.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <sstream>

namespace semilat {

LinOp SemigroupModel::evaluate(double t) const {
  if (t < 0.0) throw NegativeTime("semigroup_eval: t must be >= 0");
  LinOp base = eval_base(t);
  if (mu_ == 0.0) return base;
  return std::exp(-mu_ * t) * base;
}

LinOp SemigroupModel::resolvent_op(double lambda) const {
  // R(lambda, A - mu) = R(lambda + mu, A)
  return resolvent_base(lambda + mu_);
}

namespace {

// Exponential moments over a subinterval of length L:
//   m0 = int_0^L e^{-lam u} du,  m1 = int_0^L u e^{-lam u} du.
// Series fallback avoids cancellation for small |lam*L|.
void exp_moments(double lam, double L, double& m0, double& m1) {
  const double z = lam * L;
  if (std::abs(z) < 1e-4) {
    m0 = L * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    m1 = L * L * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
  } else {
    const double e = std::exp(-z);
    m0 = (1.0 - e) / lam;
    m1 = (1.0 - e * (1.0 + z)) / (lam * lam);
  }
}

class MatrixExpModel final : public SemigroupModel {
public:
  MatrixExpModel(LinOp a, double mu) : SemigroupModel(a.domain(), mu), a_(std::move(a)) {
    if (!a_.square()) throw SpaceMismatch("matrix_exp: generator must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(a_.matrix(), false);
    gb_ = es.eigenvalues().real().maxCoeff();
  }

  std::string kind_name() const override { return "matrix_exp"; }

  std::optional<LinOp> generator() const override {
    Eigen::MatrixXd g = a_.matrix();
    g.diagonal().array() -= mu_;
    return LinOp(space_, space_, std::move(g));
  }

  std::shared_ptr<const SemigroupModel> rescaled(double mu) const override {
    return std::make_shared<MatrixExpModel>(a_, mu_ + mu);
  }

protected:
  LinOp eval_base(double t) const override {
    Eigen::MatrixXd e = (t * a_.matrix()).exp();
    return LinOp(space_, space_, std::move(e));
  }

  LinOp resolvent_base(double lambda) const override { return resolvent(a_, lambda); }

  double base_growth_bound() const override { return gb_; }

private:
  LinOp a_;
  double gb_;
};

class ShiftModel final : public SemigroupModel {
public:
  ShiftModel(SpacePtr space, bool left, double mu)
      : SemigroupModel(std::move(space), mu), left_(left) {
    const auto& x = space_->nodes();
    const int n = space_->dim();
    if (left_) {
      if (std::abs(x[n - 1] - space_->interval_b()) > 1e-13)
        throw Error("nilpotent_left_shift: grid must contain the right endpoint");
    } else {
      if (x[0] < space_->interval_a() - 1e-13)
        throw Error("nilpotent_right_shift: nodes must lie in the interval");
    }
  }

  std::string kind_name() const override {
    return left_ ? "nilpotent_left_shift" : "nilpotent_right_shift";
  }

  std::shared_ptr<const SemigroupModel> rescaled(double mu) const override {
    return std::make_shared<ShiftModel>(space_, left_, mu_ + mu);
  }

protected:
  LinOp eval_base(double t) const override {
    const auto& x = space_->nodes();
    const int n = space_->dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double z = left_ ? x[i] + t : x[i] - t;
      add_interp_row(m, i, z);
    }
    return LinOp(space_, space_, std::move(m));
  }

  LinOp resolvent_base(double lambda) const override {
    // Exact Laplace transform of t -> T(t): entries are integrals of the
    // interpolation hats against the exponential kernel.
    const auto& x = space_->nodes();
    const int n = space_->dim();
    const double a = space_->interval_a();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (left_) {
        // int_{x_i}^{b} e^{-lam (s - x_i)} f(s) ds over node intervals ahead.
        for (int k = i; k + 1 < n; ++k)
          accum_segment(m, i, lambda, x[i], x[k], x[k + 1], k, k + 1);
      } else {
        // int_a^{x_i} e^{-lam (x_i - r)} f(r) dr; virtual zero node at a.
        if (x[0] > a + 1e-15 && i >= 0)
          accum_segment_rev(m, i, lambda, x[i], a, std::min(x[0], x[i]), -1, 0, a, x[0]);
        for (int k = 0; k + 1 <= i; ++k)
          accum_segment_rev(m, i, lambda, x[i], x[k], x[k + 1], k, k + 1, x[k], x[k + 1]);
      }
    }
    return LinOp(space_, space_, std::move(m));
  }

  double base_growth_bound() const override { return -1.0; }

private:
  void add_interp_row(Eigen::MatrixXd& m, int i, double z) const {
    const auto& x = space_->nodes();
    const int n = space_->dim();
    const double a = space_->interval_a();
    const double b = space_->interval_b();
    if (z > b + 1e-15 || z < a - 1e-15) return;
    if (z < x[0]) {
      // Virtual zero node at a (C0 constraint on the excluded endpoint).
      if (x[0] - a > 1e-15) m(i, 0) = (z - a) / (x[0] - a);
      return;
    }
    if (z >= x[n - 1]) {
      if (z <= x[n - 1] + 1e-15) m(i, n - 1) = 1.0;
      return;
    }
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x[mid] <= z ? lo : hi) = mid;
    }
    const double w = (z - x[lo]) / (x[lo + 1] - x[lo]);
    m(i, lo) = 1.0 - w;
    m(i, lo + 1) = w;
  }

  // Left shift: contribution of f over [p,q] (nodes jl -> jr) to row i,
  // kernel e^{-lam (s - s0)}, f linear between the two node values.
  void accum_segment(Eigen::MatrixXd& m, int i, double lam, double s0, double p, double q,
                     int jl, int jr) const {
    if (q <= p) return;
    const double L = q - p;
    double m0, m1;
    exp_moments(lam, L, m0, m1);
    const double pref = std::exp(-lam * (p - s0));
    // f(p+u) = f_l (1 - u/L) + f_r (u/L)
    m(i, jl) += pref * (m0 - m1 / L);
    m(i, jr) += pref * (m1 / L);
  }

  // Right shift: int over r in [p,q] of e^{-lam (x_i - r)} f(r) dr, where f
  // is linear on [pl,pr] between node jl (value 0 if jl < 0) and node jr.
  void accum_segment_rev(Eigen::MatrixXd& m, int i, double lam, double xi, double p, double q,
                         int jl, int jr, double pl, double pr) const {
    if (q <= p) return;
    // Substitute u = x_i - r, running over [xi - q, xi - p].
    const double ua = xi - q;
    const double L = q - p;
    double m0, m1;
    exp_moments(lam, L, m0, m1);
    const double pref = std::exp(-lam * ua);
    // r = xi - (ua + v), v in [0, L]; weight on node jr: (r - pl)/(pr - pl).
    const double span = pr - pl;
    // (r - pl)/span = ((xi - ua - pl) - v)/span
    const double c0 = (xi - ua - pl) / span;
    const double wr0 = pref * (c0 * m0 - m1 / span);
    if (jr >= 0) m(i, jr) += wr0;
    if (jl >= 0) m(i, jl) += pref * m0 - wr0;
  }

  bool left_;
};

class Heat1DModel final : public SemigroupModel {
public:
  Heat1DModel(SpacePtr space, int mode_count, double mu)
      : SemigroupModel(std::move(space), mu) {
    const int n = space_->dim();
    const auto& x = space_->nodes();
    if (n < 2) throw Error("heat1d: need at least two interior nodes");
    h_ = x[1] - x[0];
    for (int i = 0; i + 1 < n; ++i)
      if (std::abs(x[i + 1] - x[i] - h_) > 1e-12)
        throw Error("heat1d: interior grid must be uniform");
    modes_ = mode_count < 1 ? n : std::min(mode_count, n);
    basis_.resize(n, n);
    eigs_.resize(n);
    const double scale = std::sqrt(2.0 / (n + 1));
    for (int k = 0; k < n; ++k) {
      const double s = std::sin((k + 1) * M_PI / (2.0 * (n + 1)));
      eigs_[k] = -4.0 / (h_ * h_) * s * s;
      for (int i = 0; i < n; ++i)
        basis_(i, k) = scale * std::sin((k + 1) * M_PI * (i + 1) / (n + 1.0));
    }
  }

  std::string kind_name() const override { return "heat1d"; }

  std::optional<LinOp> generator() const override {
    const int n = space_->dim();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      g(i, i) = -2.0 / (h_ * h_) - mu_;
      if (i > 0) g(i, i - 1) = 1.0 / (h_ * h_);
      if (i + 1 < n) g(i, i + 1) = 1.0 / (h_ * h_);
    }
    return LinOp(space_, space_, std::move(g));
  }

  std::shared_ptr<const SemigroupModel> rescaled(double mu) const override {
    return std::make_shared<Heat1DModel>(space_, modes_, mu_ + mu);
  }

protected:
  LinOp eval_base(double t) const override {
    const int n = space_->dim();
    if (t == 0.0) return LinOp::identity(space_);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < modes_; ++k) d[k] = std::exp(eigs_[k] * t);
    Eigen::MatrixXd m = basis_ * d.asDiagonal() * basis_.transpose();
    return LinOp(space_, space_, std::move(m));
  }

  LinOp resolvent_base(double lambda) const override {
    const int n = space_->dim();
    Eigen::VectorXd d(n);
    for (int k = 0; k < n; ++k) {
      const double gap = lambda - eigs_[k];
      if (std::abs(gap) < 1e-12)
        throw SingularResolvent("heat1d: lambda hits a Dirichlet eigenvalue");
      d[k] = 1.0 / gap;
    }
    Eigen::MatrixXd m = basis_ * d.asDiagonal() * basis_.transpose();
    return LinOp(space_, space_, std::move(m));
  }

  double base_growth_bound() const override { return eigs_[0]; }

private:
  double h_;
  int modes_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigs_;
};

}  // namespace

ModelPtr SemigroupModel::matrix_exp(const LinOp& a) {
  return std::make_shared<MatrixExpModel>(a, 0.0);
}

ModelPtr SemigroupModel::nilpotent_left_shift(const SpacePtr& space) {
  return std::make_shared<ShiftModel>(space, true, 0.0);
}

ModelPtr SemigroupModel::nilpotent_right_shift(const SpacePtr& space) {
  return std::make_shared<ShiftModel>(space, false, 0.0);
}

ModelPtr SemigroupModel::heat1d(const SpacePtr& space, int mode_count) {
  return std::make_shared<Heat1DModel>(space, mode_count, 0.0);
}

ModelPtr rescale(const ModelPtr& model, double mu) { return model->rescaled(mu); }

double growth_bound_estimate(const SemigroupModel& model, double horizon, int samples) {
  if (horizon <= 0.0) throw Error("growth_bound_estimate: horizon must be positive");
  if (samples < 2) samples = 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int j = 1; j <= samples; ++j) {
    const double t = horizon * j / samples;
    const double nrm = op_norm(model.evaluate(t)).upper;
    const double y = std::log(std::max(nrm, 1e-300));
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
  }
  const double slope = (samples * sxy - sx * sy) / (samples * sxx - sx * sx);
  double eig = -std::numeric_limits<double>::infinity();
  if (auto g = model.generator()) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g->matrix(), false);
    eig = es.eigenvalues().real().maxCoeff();
  }
  return std::max(slope, eig);
}

SubspaceReport subspace_consistency_check(const SemigroupModel& fine,
                                          const SemigroupModel& coarse,
                                          const std::vector<double>& lambdas,
                                          const std::vector<double>& times, Rng& rng,
                                          int probes) {
  const auto& xc = coarse.space()->nodes();
  const auto& xf = fine.space()->nodes();
  std::vector<int> idx(xc.size());
  for (Eigen::Index i = 0; i < xc.size(); ++i) {
    int found = -1;
    for (Eigen::Index j = 0; j < xf.size(); ++j)
      if (std::abs(xf[j] - xc[i]) <= 1e-12) {
        found = static_cast<int>(j);
        break;
      }
    if (found < 0) throw EmbeddingMismatch("subspace_consistency_check: incompatible grids");
    idx[static_cast<size_t>(i)] = found;
  }

  auto embed = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(xf.size());
    for (Eigen::Index j = 0; j < xf.size(); ++j) {
      const double z = xf[j];
      if (z <= xc[0]) {
        out[j] = v[0];
      } else if (z >= xc[xc.size() - 1]) {
        out[j] = v[v.size() - 1];
      } else {
        Eigen::Index lo = 0, hi = xc.size() - 1;
        while (hi - lo > 1) {
          const Eigen::Index mid = (lo + hi) / 2;
          (xc[mid] <= z ? lo : hi) = mid;
        }
        const double w = (z - xc[lo]) / (xc[lo + 1] - xc[lo]);
        out[j] = (1.0 - w) * v[lo] + w * v[lo + 1];
      }
    }
    return out;
  };
  auto restrict_fine = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(xc.size());
    for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
    return out;
  };

  // Random draws from a smooth family: rough node noise cannot converge
  // under grid refinement, smooth combinations do at the interpolation order.
  auto smooth_probe = [&]() {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(xc.size());
    const double a = coarse.space()->interval_a();
    const double len = coarse.space()->interval_b() - a;
    for (int k = 0; k <= 4; ++k) {
      const double amp = rng.uniform(-1.0, 1.0);
      const double phase = rng.uniform(0.0, 2.0 * M_PI);
      for (Eigen::Index i = 0; i < xc.size(); ++i)
        x[i] += amp * std::cos(k * M_PI * (xc[i] - a) / len + phase);
    }
    return x;
  };

  SubspaceReport rep{0.0, 0.0};
  for (int p = 0; p < probes; ++p) {
    Eigen::VectorXd x = smooth_probe();
    Eigen::VectorXd xe = embed(x);
    for (double lam : lambdas) {
      Eigen::VectorXd d =
          restrict_fine(fine.resolvent_op(lam).apply(xe)) - coarse.resolvent_op(lam).apply(x);
      rep.max_resolvent_residual =
          std::max(rep.max_resolvent_residual, d.cwiseAbs().maxCoeff());
    }
    for (double t : times) {
      Eigen::VectorXd d = restrict_fine(fine.evaluate(t).apply(xe)) - coarse.evaluate(t).apply(x);
      rep.max_semigroup_residual =
          std::max(rep.max_semigroup_residual, d.cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

RegularizedControl RegularizedControl::from_raw(const SemigroupModel& model, const LinOp& raw,
                                                double lambda0) {
  LinOp b_reg = model.resolvent_op(lambda0) * raw;
  return RegularizedControl{std::move(b_reg), lambda0, raw};
}

LinOp control_resolvent(const SemigroupModel& model, const RegularizedControl& control,
                        double lambda) {
  if (control.raw) return model.resolvent_op(lambda) * (*control.raw);
  // Resolvent identity: R(lam, A_{-1}) B = B_reg + (lam0 - lam) R(lam, A) B_reg.
  if (lambda == control.lambda0) return control.b_reg;
  return control.b_reg + (control.lambda0 - lambda) * (model.resolvent_op(lambda) * control.b_reg);
}

LinOp control_a_inverse(const SemigroupModel& model, const RegularizedControl& control) {
  if (model.growth_bound() >= 0.0) {
    std::ostringstream msg;
    msg << "growth bound " << model.growth_bound() << " >= 0; rescale before using lambda=0";
    throw NotRescaled(msg.str());
  }
  return -1.0 * control_resolvent(model, control, 0.0);
}

}  // namespace semilat
