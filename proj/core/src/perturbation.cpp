#include "semilat/perturbation.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace semilat {

std::string to_string(TheoremKind kind) {
  switch (kind) {
    case TheoremKind::AM: return "AM";
    case TheoremKind::AL: return "AL";
    case TheoremKind::RN: return "RN";
    case TheoremKind::DOM: return "DOM";
  }
  return "?";
}

bool HypothesisReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const HypothesisCheck* HypothesisReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

Eigen::VectorXd TimeGridSpec::times() const {
  if (steps < 1 || t_end <= 0.0) throw Error("TimeGridSpec: need steps >= 1 and t_end > 0");
  return Eigen::VectorXd::LinSpaced(steps + 1, 0.0, t_end);
}

int PerturbedSemigroup::snap_index(double t) const {
  if (times_.size() == 0) throw Error("PerturbedSemigroup: empty evaluator");
  const int idx = static_cast<int>(std::llround(t / h_));
  if (idx < 0 || idx >= times_.size() || std::abs(t - idx * h_) > 1e-9 * std::max(1.0, t))
    throw Error("PerturbedSemigroup: t is not on the construction grid");
  return idx;
}

LinOp PerturbedSemigroup::at(double t) const {
  const int idx = snap_index(t);
  auto it = stored_.find(idx);
  if (it != stored_.end()) return LinOp(space_, space_, it->second);
  if (closed_loop_) {
    Eigen::MatrixXd s = (t * (*closed_loop_)).exp();
    return LinOp(space_, space_, std::move(s));
  }
  // Pure forward pass through the controllability recurrence.
  std::vector<int> want{idx};
  Eigen::MatrixXd z = engine_->bt_snapshots(fixed_point_, want)[0];
  Eigen::MatrixXd s = model_->evaluate(t).matrix() + z;
  return LinOp(space_, space_, std::move(s));
}

std::vector<double> PerturbedSemigroup::stored_times() const {
  std::vector<double> out;
  out.reserve(stored_.size());
  for (const auto& [idx, m] : stored_) out.push_back(idx * h_);
  return out;
}

TimeGridFn PerturbedSemigroup::output_trajectory(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd vals(obs_.rows(), times_.size());
  if (closed_loop_) {
    const Eigen::MatrixXd eh = (h_ * (*closed_loop_)).exp();
    Eigen::VectorXd cur = x;
    vals.col(0) = obs_ * cur;
    for (Eigen::Index i = 1; i < times_.size(); ++i) {
      cur = eh * cur;
      vals.col(i) = obs_ * cur;
    }
  } else {
    for (Eigen::Index i = 0; i < times_.size(); ++i)
      vals.col(i) = fixed_point_[static_cast<size_t>(i)] * x;
  }
  return TimeGridFn(times_, std::move(vals), u_space_);
}

ControlPositivityReport check_control_positivity(const TripleSpec& triple,
                                                 const std::vector<double>& lambda_samples,
                                                 double tol) {
  ControlPositivityReport rep;
  rep.positive = true;
  rep.min_entry = 0.0;
  for (double lam : lambda_samples) {
    LinOp rb = triple.control_resolvent_at(lam);
    const auto check = op_positivity_check(rb, tol);
    rep.lambdas.push_back(lam);
    rep.min_entries.push_back(check.min_entry);
    rep.min_entry = std::min(rep.min_entry, check.min_entry);
    if (!check.positive) rep.positive = false;
  }
  return rep;
}

double feedback_spectral_radius(const TripleSpec& triple, double lambda) {
  LinOp k = triple.feedback_matrix(lambda);
  const double r = spectral_radius_eigen(k);
  if (lambda > 0.0 && triple.model->growth_bound() < 0.0) {
    LinOp k0 = triple.feedback_matrix(0.0);
    if (k.matrix().minCoeff() >= -1e-12 && k0.matrix().minCoeff() >= -1e-12) {
      const double r0 = spectral_radius_eigen(k0);
      if (r > r0 + 1e-8)
        throw Error("feedback_spectral_radius: monotone bound violated on positive data");
    }
  }
  return r;
}

namespace {

std::vector<double> default_positivity_lambdas(const TripleSpec& triple) {
  std::vector<double> ls;
  const double gb = triple.model->growth_bound();
  for (double l : {0.0, 0.5, 2.0, triple.lambda0()})
    if (l > gb + 1e-9) ls.push_back(l);
  return ls;
}

void throw_on_failure(const HypothesisReport& rep) {
  if (const HypothesisCheck* f = rep.first_failure()) {
    std::ostringstream msg;
    if (f->name == "feedback_spectral_radius" || f->name == "tilde_feedback_spectral_radius")
      msg << "spectral radius " << f->value << " >= 1 at lambda=0";
    else
      msg << f->name << " failed (value " << f->value << ", threshold " << f->threshold << ")";
    throw HypothesisFailed(f->name, msg.str());
  }
}

std::vector<int> storage_indices(const Eigen::VectorXd& times, double h, int nx,
                                 const std::vector<double>& store_times) {
  std::vector<int> idx;
  const int m = static_cast<int>(times.size()) - 1;
  if (store_times.empty()) {
    const double full = static_cast<double>(m + 1) * nx * nx;
    if (full <= 8e6) {
      idx.resize(m + 1);
      for (int i = 0; i <= m; ++i) idx[i] = i;
    } else {
      idx = {0, m};
    }
  } else {
    idx.push_back(0);
    for (double t : store_times) {
      const int i = static_cast<int>(std::llround(t / h));
      if (i < 0 || i > m || std::abs(t - i * h) > 1e-9 * std::max(1.0, t))
        throw Error("construct: store time is not on the grid");
      idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }
  return idx;
}

}  // namespace

HypothesisReport check_hypotheses(const TripleSpec& triple, TheoremKind kind, double tol) {
  HypothesisReport rep;
  const double gb = triple.model->growth_bound();
  rep.checks.push_back({"growth_bound_negative", gb < 0.0, gb, 0.0});
  if (gb >= 0.0) return rep;

  if (kind != TheoremKind::DOM) {
    const UTag want_tag = kind == TheoremKind::AM   ? UTag::AM
                          : kind == TheoremKind::AL ? UTag::AL
                                                    : UTag::Dual;
    const bool tag_ok = triple.u_tag == want_tag;
    rep.checks.push_back({"u_space_tag", tag_ok, tag_ok ? 1.0 : 0.0, 1.0});

    auto bpos = check_control_positivity(triple, default_positivity_lambdas(triple), tol);
    rep.checks.push_back({"control_positive", bpos.positive, bpos.min_entry, -tol});
    const double cmin = triple.observation.matrix().minCoeff();
    rep.checks.push_back({"observation_positive", cmin >= -tol, cmin, -tol});
  }

  if (kind == TheoremKind::AL) {
    const bool bounded = triple.control.raw.has_value() || triple.model->generator().has_value();
    rep.checks.push_back({"control_maps_into_state_space", bounded, bounded ? 1.0 : 0.0, 1.0});
  }

  if (kind == TheoremKind::RN) {
    // Compatibility against the scenario Z-rule; the bounded-scaled-values
    // rule reports its sup rather than gating.
    double zval = 1.0;
    bool zok = true;
    if (triple.z_flag == ZFlag::BoundedScaledValues) {
      zval = triple.control.b_reg.matrix().cwiseAbs().maxCoeff();
      zok = std::isfinite(zval);
    }
    rep.checks.push_back({"compatibility_z_rule", zok, zval, 0.0});
  }

  const double r = spectral_radius_eigen(triple.feedback_matrix(0.0));
  rep.checks.push_back({"feedback_spectral_radius", r < 1.0, r, 1.0});
  return rep;
}

namespace detail {

PerturbedSemigroup construct_vp_unchecked(const TripleSpec& triple, const TimeGridSpec& grid,
                                          double tol, const std::vector<double>& store_times,
                                          PerturbedDiagnostics diag) {
  PerturbedSemigroup s;
  s.space_ = triple.state_space();
  s.u_space_ = triple.u_space;
  s.obs_ = triple.observation.matrix();
  s.times_ = grid.times();
  s.h_ = grid.step();
  s.model_ = triple.model;
  s.engine_ = std::make_shared<VpEngine>(triple, s.times_);

  const int nx = s.space_->dim();
  const double r = spectral_radius_eigen(triple.feedback_matrix(0.0));
  const double r_cap = std::min(std::max(r, 1e-3), 0.995);
  const int cap = std::max(50, 10 * static_cast<int>(std::ceil(std::log(tol) / std::log(r_cap))));

  auto rhs = s.engine_->observability_rhs(Eigen::MatrixXd::Identity(nx, nx));
  auto outcome = s.engine_->picard(rhs, tol, cap);
  s.fixed_point_ = std::move(outcome.v);

  const std::vector<int> idx = storage_indices(s.times_, s.h_, nx, store_times);
  auto zs = s.engine_->bt_snapshots(s.fixed_point_, idx);
  double min_entry = 0.0;
  for (size_t k = 0; k < idx.size(); ++k) {
    Eigen::MatrixXd mat = triple.model->evaluate(idx[k] * s.h_).matrix() + zs[k];
    min_entry = std::min(min_entry, mat.minCoeff());
    s.stored_.emplace(idx[k], std::move(mat));
  }

  diag.r_feedback = r;
  diag.r_io_estimate = outcome.rate_estimate;
  diag.picard_iterations = outcome.iterations;
  diag.picard_residual = outcome.residual;
  diag.min_stored_entry = min_entry;
  s.diag_ = std::move(diag);
  return s;
}

PerturbedSemigroup construct_closed_loop(const TripleSpec& triple, const TimeGridSpec& grid,
                                         const std::vector<double>& store_times,
                                         PerturbedDiagnostics diag) {
  auto gen = triple.model->generator();
  if (!gen) throw Error("construct_closed_loop: model has no generator matrix");
  Eigen::MatrixXd braw;
  if (triple.control.raw) {
    braw = triple.control.raw->matrix();
  } else {
    Eigen::MatrixXd shift =
        triple.lambda0() * Eigen::MatrixXd::Identity(gen->rows(), gen->cols()) - gen->matrix();
    braw = shift * triple.control.b_reg.matrix();
  }
  PerturbedSemigroup s;
  s.space_ = triple.state_space();
  s.u_space_ = triple.u_space;
  s.obs_ = triple.observation.matrix();
  s.times_ = grid.times();
  s.h_ = grid.step();
  s.model_ = triple.model;
  s.closed_loop_ = gen->matrix() + braw * triple.observation.matrix();

  const std::vector<int> idx = storage_indices(
      s.times_, s.h_, s.space_->dim(),
      store_times.empty() ? std::vector<double>{grid.t_end} : store_times);
  const Eigen::MatrixXd eh = (s.h_ * (*s.closed_loop_)).exp();
  Eigen::MatrixXd cur =
      Eigen::MatrixXd::Identity(s.space_->dim(), s.space_->dim());
  double min_entry = 0.0;
  size_t next = 0;
  for (int i = 0; i <= grid.steps && next < idx.size(); ++i) {
    if (i > 0) cur = eh * cur;
    if (idx[next] == i) {
      min_entry = std::min(min_entry, cur.minCoeff());
      s.stored_.emplace(i, cur);
      ++next;
    }
  }
  diag.min_stored_entry = min_entry;
  s.diag_ = std::move(diag);
  return s;
}

}  // namespace detail

PerturbedSemigroup construct_perturbed(const TripleSpec& triple, TheoremKind kind,
                                       const TimeGridSpec& grid, double tol,
                                       const std::vector<double>& store_times) {
  if (kind == TheoremKind::DOM)
    throw Error("construct_perturbed: use construct_dominated for the DOM kind");
  HypothesisReport hyp = check_hypotheses(triple, kind, 1e-10);
  throw_on_failure(hyp);
  PerturbedDiagnostics diag;
  diag.kind = kind;
  diag.hypothesis_report = std::move(hyp);
  return detail::construct_vp_unchecked(triple, grid, tol, store_times, std::move(diag));
}

LinOp resolvent_factorization(const TripleSpec& triple, double lambda) {
  LinOp ra = triple.model->resolvent_op(lambda);
  LinOp rb = triple.control_resolvent_at(lambda);
  Eigen::MatrixXd k = triple.observation.matrix() * rb.matrix();
  const double r = spectral_radius_eigen(LinOp(triple.u_space, triple.u_space, k));
  if (r >= 1.0) {
    std::ostringstream msg;
    msg << "spectral radius " << r << " >= 1 at lambda=" << lambda;
    throw HypothesisFailed("feedback_spectral_radius", msg.str());
  }
  Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(k.rows(), k.cols()) - k)
                            .partialPivLu()
                            .solve(Eigen::MatrixXd::Identity(k.rows(), k.cols()));
  Eigen::MatrixXd res =
      ra.matrix() + rb.matrix() * inv * triple.observation.matrix() * ra.matrix();
  return LinOp(triple.state_space(), triple.state_space(), std::move(res));
}

double vp_residual(const PerturbedSemigroup& s, const TripleSpec& triple,
                   const Eigen::VectorXd& x, double t) {
  TimeGridFn traj = s.output_trajectory(x);
  LatticeVector bt = controllability_map(triple, traj, t);
  Eigen::VectorXd lhs = s.at(t).apply(x);
  Eigen::VectorXd rhs = triple.model->evaluate(t).apply(x) + bt.values;
  return triple.state_space()->norm(lhs - rhs);
}

DominatedPair construct_dominated(const TripleSpec& triple, const DominatingSplit& split,
                                  const TimeGridSpec& grid, double tol, Rng& rng,
                                  TheoremKind tilde_kind, double domination_tol) {
  HypothesisReport hyp;

  TripleSpec plus = triple;
  plus.control = RegularizedControl{split.b_reg_plus, triple.lambda0(), split.raw_plus};
  TripleSpec minus = triple;
  minus.control = RegularizedControl{split.b_reg_minus, triple.lambda0(), split.raw_minus};
  const auto lambdas = default_positivity_lambdas(triple);
  auto pos_p = check_control_positivity(plus, lambdas, tol);
  auto pos_m = check_control_positivity(minus, lambdas, tol);
  hyp.checks.push_back({"b_plus_positive", pos_p.positive, pos_p.min_entry, -tol});
  hyp.checks.push_back({"b_minus_positive", pos_m.positive, pos_m.min_entry, -tol});

  const double split_gap =
      (triple.control.b_reg.matrix() - (split.b_reg_plus.matrix() - split.b_reg_minus.matrix()))
          .cwiseAbs()
          .maxCoeff();
  hyp.checks.push_back({"b_split_consistent", split_gap <= 1e-9, split_gap, 1e-9});

  // |C x| <= C~ x on the positive cone; basis probes make it entrywise.
  double cdom_excess = -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd& c = triple.observation.matrix();
  const Eigen::MatrixXd& ct = split.c_tilde.matrix();
  auto probe_c = [&](const Eigen::VectorXd& x) {
    cdom_excess = std::max(cdom_excess, ((c * x).cwiseAbs() - ct * x).maxCoeff());
  };
  for (Eigen::Index j = 0; j < c.cols(); ++j) probe_c(Eigen::VectorXd::Unit(c.cols(), j));
  for (int k = 0; k < 50; ++k) probe_c(rng.uniform_vec(c.cols(), 0.0, 1.0));
  hyp.checks.push_back({"observation_dominated", cdom_excess <= tol, cdom_excess, tol});

  TripleSpec tilde = triple;
  std::optional<LinOp> raw_tilde;
  if (split.raw_plus && split.raw_minus) raw_tilde = *split.raw_plus + *split.raw_minus;
  tilde.control =
      RegularizedControl{split.b_reg_plus + split.b_reg_minus, triple.lambda0(), raw_tilde};
  tilde.observation = split.c_tilde;
  const double r_tilde = spectral_radius_eigen(tilde.feedback_matrix(0.0));
  hyp.checks.push_back({"tilde_feedback_spectral_radius", r_tilde < 1.0, r_tilde, 1.0});
  throw_on_failure(hyp);

  DominatedPair pair;
  pair.hypothesis_report = hyp;
  pair.max_time_excess = 0.0;
  pair.max_resolvent_excess = 0.0;
  pair.s_tilde = construct_perturbed(tilde, tilde_kind, grid, tol);

  PerturbedDiagnostics sdiag;
  sdiag.kind = TheoremKind::DOM;
  sdiag.hypothesis_report = hyp;
  if (triple.model->generator()) {
    pair.s = detail::construct_closed_loop(triple, grid, pair.s_tilde.stored_times(), sdiag);
  } else {
    // No generator matrix (shift models): the dominated VP fixed point still
    // converges, |F^n| <= F~^n entrywise.
    pair.s =
        detail::construct_vp_unchecked(triple, grid, tol, pair.s_tilde.stored_times(), sdiag);
  }

  for (double t : pair.s_tilde.stored_times()) {
    Eigen::MatrixXd diff = pair.s.at(t).matrix().cwiseAbs() - pair.s_tilde.at(t).matrix();
    pair.max_time_excess = std::max(pair.max_time_excess, diff.maxCoeff());
  }
  if (pair.max_time_excess > domination_tol) {
    std::ostringstream msg;
    msg << "domination excess " << pair.max_time_excess << " > " << domination_tol
        << " (discretization too coarse or bad split)";
    throw DominationViolated(msg.str());
  }

  for (double lam : {0.5, 1.0, 2.0}) {
    LinOp r_signed = resolvent_factorization(triple, lam);
    LinOp r_dom = resolvent_factorization(tilde, lam);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x = rng.uniform_vec(r_signed.cols(), 0.0, 1.0);
      Eigen::VectorXd diff = (r_signed.matrix() * x).cwiseAbs() - r_dom.matrix() * x;
      pair.max_resolvent_excess = std::max(pair.max_resolvent_excess, diff.maxCoeff());
    }
  }
  return pair;
}

std::vector<WLemmaRow> wlemma_inequality_check(const TripleSpec& triple,
                                               const DominatingSplit& split,
                                               const std::vector<double>& lambda_samples) {
  std::vector<WLemmaRow> rows;
  TripleSpec tilde = triple;
  std::optional<LinOp> raw_tilde;
  if (split.raw_plus && split.raw_minus) raw_tilde = *split.raw_plus + *split.raw_minus;
  tilde.control =
      RegularizedControl{split.b_reg_plus + split.b_reg_minus, triple.lambda0(), raw_tilde};
  tilde.observation = split.c_tilde;

  const double r_tilde_0 = spectral_radius_eigen(tilde.feedback_matrix(0.0));
  for (double lam : lambda_samples) {
    WLemmaRow row{};
    row.lambda = lam;
    LinOp ra = triple.model->resolvent_op(lam);
    row.c_resolvent_slack =
        op_norm(triple.observation * ra).upper - op_norm(tilde.observation * ra).upper;
    row.control_slack = op_norm(triple.control_resolvent_at(lam)).upper -
                        op_norm(tilde.control_resolvent_at(lam)).upper;
    row.feedback_norm_slack =
        op_norm(triple.feedback_matrix(lam)).upper - op_norm(tilde.feedback_matrix(lam)).upper;
    const double r_signed = spectral_radius_eigen(triple.feedback_matrix(lam));
    const double r_dom = spectral_radius_eigen(tilde.feedback_matrix(lam));
    row.spectral_chain_slack = std::max(r_signed - r_dom, r_dom - r_tilde_0);
    row.ok = row.c_resolvent_slack <= 1e-8 && row.control_slack <= 1e-8 &&
             row.feedback_norm_slack <= 1e-8 && row.spectral_chain_slack <= 1e-8;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace semilat
