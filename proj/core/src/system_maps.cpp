#include "semilat/system_maps.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "semilat/detail/vp_engine.hpp"

namespace semilat {

namespace detail {

double seq_sup_norm(const VpEngine::Seq& a) {
  double m = 0.0;
  for (const auto& blk : a)
    if (blk.size()) m = std::max(m, blk.cwiseAbs().maxCoeff());
  return m;
}

double seq_sup_diff(const VpEngine::Seq& a, const VpEngine::Seq& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].size()) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

VpEngine::VpEngine(const TripleSpec& triple, const Eigen::VectorXd& times) : times_(times) {
  if (times_.size() < 2 || std::abs(times_[0]) > 1e-12)
    throw Error("vp engine: time grid must start at 0 with at least one step");
  m_ = static_cast<int>(times_.size()) - 1;
  h_ = times_[m_] / m_;
  for (int i = 0; i <= m_; ++i)
    if (std::abs(times_[i] - i * h_) > 1e-9 * std::max(1.0, times_[m_]))
      throw Error("vp engine: time grid must be uniform");

  const SemigroupModel& model = *triple.model;
  if (model.growth_bound() >= 0.0) {
    std::ostringstream msg;
    msg << "growth bound " << model.growth_bound() << " >= 0; rescale before constructing";
    throw NotRescaled(msg.str());
  }
  const std::string kind = model.kind_name();
  if (kind == "nilpotent_left_shift" || kind == "nilpotent_right_shift") {
    const auto& x = model.space()->nodes();
    const double hx = x[1] - x[0];
    const double ratio = h_ / hx;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw Error("vp engine: shift models need the time step aligned to the node spacing");
  }

  nx_ = model.space()->dim();
  nu_ = triple.u_space->dim();
  c_ = triple.observation.matrix();
  Eigen::MatrixXd g = triple.control_a_inv().matrix();
  Eigen::MatrixXd th = model.evaluate(h_).matrix();
  eg_ = th * g - g;

  Eigen::Index nnz = 0;
  for (Eigen::Index j = 0; j < th.cols(); ++j)
    for (Eigen::Index i = 0; i < th.rows(); ++i)
      if (th(i, j) != 0.0) ++nnz;
  sparse_step_ = nnz * 4 < th.size();
  if (sparse_step_) {
    th_sparse_ = th.sparseView();
    th_sparse_.makeCompressed();
  } else {
    th_dense_ = std::move(th);
  }
}

Eigen::MatrixXd VpEngine::step_apply(const Eigen::MatrixXd& z) const {
  if (sparse_step_) return th_sparse_ * z;
  return th_dense_ * z;
}

VpEngine::Seq VpEngine::apply_io(const Seq& v) const {
  const Eigen::Index w = v[0].cols();
  Seq out(static_cast<size_t>(m_) + 1);
  out[0] = Eigen::MatrixXd::Zero(nu_, w);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(nx_, w);
  for (int i = 1; i <= m_; ++i) {
    Eigen::MatrixXd s = 0.5 * (v[i - 1] + v[i]);
    z = step_apply(z) + eg_ * s;
    out[i] = c_ * z;
  }
  return out;
}

VpEngine::Seq VpEngine::observability_rhs(const Eigen::MatrixXd& x_cols) const {
  Seq out(static_cast<size_t>(m_) + 1);
  Eigen::MatrixXd w = x_cols;
  out[0] = c_ * w;
  for (int i = 1; i <= m_; ++i) {
    w = step_apply(w);
    out[i] = c_ * w;
  }
  return out;
}

VpEngine::PicardOutcome VpEngine::picard(const Seq& f, double tol, int max_iter) const {
  PicardOutcome res;
  res.v = f;
  Seq d = apply_io(f);
  double prev_inc = seq_sup_norm(d);
  double max_ratio = 0.0;
  int growing = 0;
  int it = 0;
  while (true) {
    ++it;
    const double inc = seq_sup_norm(d);
    if (it >= 2 && prev_inc > 0.0) max_ratio = std::max(max_ratio, inc / prev_inc);
    for (size_t i = 0; i < res.v.size(); ++i) res.v[i] += d[i];
    if (inc <= tol) {
      res.iterations = it;
      res.final_increment = inc;
      res.rate_estimate = max_ratio;
      Seq next = apply_io(d);
      res.residual = seq_sup_norm(next);
      return res;
    }
    if (it >= max_iter)
      throw DivergentIteration("picard iteration cap reached without convergence");
    if (it >= 2 && inc > prev_inc) {
      if (++growing >= 10)
        throw DivergentIteration(
            "picard increments grew 10 times in a row (spectral radius >= 1?)");
    } else if (it >= 2) {
      growing = 0;
    }
    prev_inc = inc;
    d = apply_io(d);
  }
}

std::vector<Eigen::MatrixXd> VpEngine::bt_snapshots(const Seq& v,
                                                    const std::vector<int>& indices) const {
  const Eigen::Index w = v[0].cols();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(indices.size());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(nx_, w);
  size_t next = 0;
  while (next < indices.size() && indices[next] == 0) {
    out.push_back(z);
    ++next;
  }
  for (int i = 1; i <= m_ && next < indices.size(); ++i) {
    Eigen::MatrixXd s = 0.5 * (v[i - 1] + v[i]);
    z = step_apply(z) + eg_ * s;
    while (next < indices.size() && indices[next] == i) {
      out.push_back(z);
      ++next;
    }
  }
  if (next != indices.size()) throw Error("bt_snapshots: index beyond the time grid");
  return out;
}

}  // namespace detail

StepFunction::StepFunction(Eigen::VectorXd breakpoints, Eigen::MatrixXd values, SpacePtr u_space)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)),
      u_space_(std::move(u_space)) {
  if (breakpoints_.size() < 2) throw Error("StepFunction: need at least one interval");
  if (std::abs(breakpoints_[0]) > 1e-12) throw Error("StepFunction: breakpoints start at 0");
  for (Eigen::Index k = 1; k < breakpoints_.size(); ++k)
    if (!(breakpoints_[k] > breakpoints_[k - 1]))
      throw Error("StepFunction: breakpoints must be ascending");
  if (values_.cols() != breakpoints_.size() - 1 || values_.rows() != u_space_->dim())
    throw SpaceMismatch("StepFunction: value shape mismatch");
}

Eigen::VectorXd StepFunction::value_at(double s) const {
  if (s < 0.0 || s >= support_end()) return Eigen::VectorXd::Zero(values_.rows());
  Eigen::Index lo = 0, hi = breakpoints_.size() - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (breakpoints_[mid] <= s ? lo : hi) = mid;
  }
  return values_.col(lo);
}

TimeGridFn::TimeGridFn(Eigen::VectorXd times, Eigen::MatrixXd values, SpacePtr u_space)
    : times_(std::move(times)), values_(std::move(values)), u_space_(std::move(u_space)) {
  if (times_.size() < 2) throw Error("TimeGridFn: need at least two samples");
  if (std::abs(times_[0]) > 1e-12) throw Error("TimeGridFn: times start at 0");
  for (Eigen::Index k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1])) throw Error("TimeGridFn: times must be ascending");
  if (values_.cols() != times_.size() || values_.rows() != u_space_->dim())
    throw SpaceMismatch("TimeGridFn: value shape mismatch");
}

Eigen::VectorXd TimeGridFn::eval(double t) const {
  if (t <= times_[0]) return values_.col(0);
  const Eigen::Index last = times_.size() - 1;
  if (t >= times_[last]) return values_.col(last);
  Eigen::Index lo = 0, hi = last;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    (times_[mid] <= t ? lo : hi) = mid;
  }
  const double w = (t - times_[lo]) / (times_[lo + 1] - times_[lo]);
  return (1.0 - w) * values_.col(lo) + w * values_.col(lo + 1);
}

StepFunction TimeGridFn::to_step() const {
  Eigen::MatrixXd mid(values_.rows(), values_.cols() - 1);
  for (Eigen::Index k = 0; k + 1 < values_.cols(); ++k)
    mid.col(k) = 0.5 * (values_.col(k) + values_.col(k + 1));
  return StepFunction(times_, std::move(mid), u_space_);
}

double TimeGridFn::sup_time_norm() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < values_.cols(); ++k)
    m = std::max(m, u_space_->norm(values_.col(k)));
  return m;
}

double TimeGridFn::l1_time_norm() const {
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < values_.cols(); ++k) {
    const double dt = times_[k + 1] - times_[k];
    acc += 0.5 * dt * (u_space_->norm(values_.col(k)) + u_space_->norm(values_.col(k + 1)));
  }
  return acc;
}

double TimeGridFn::lp_time_norm(double p) const {
  double acc = 0.0;
  for (Eigen::Index k = 0; k + 1 < values_.cols(); ++k) {
    const double dt = times_[k + 1] - times_[k];
    acc += 0.5 * dt *
           (std::pow(u_space_->norm(values_.col(k)), p) +
            std::pow(u_space_->norm(values_.col(k + 1)), p));
  }
  return std::pow(acc, 1.0 / p);
}

bool TimeGridFn::uniform_grid(double tol) const {
  const Eigen::Index m = times_.size() - 1;
  const double h = times_[m] / static_cast<double>(m);
  for (Eigen::Index i = 0; i <= m; ++i)
    if (std::abs(times_[i] - i * h) > tol * std::max(1.0, times_[m])) return false;
  return true;
}

LatticeVector controllability_map(const TripleSpec& triple, const StepFunction& u, double t) {
  if (t < 0.0) throw NegativeTime("controllability_map: t must be >= 0");
  if (!u.u_space()->same_geometry(*triple.u_space))
    throw SpaceMismatch("controllability_map: input lives in the wrong control space");
  const SemigroupModel& model = *triple.model;
  Eigen::MatrixXd g = triple.control_a_inv().matrix();  // throws NotRescaled when gb >= 0
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(model.space()->dim());
  const auto& bp = u.breakpoints();
  for (Eigen::Index k = 0; k + 1 < bp.size(); ++k) {
    const double p = bp[k];
    if (p >= t) break;
    const double q = std::min(bp[k + 1], t);
    Eigen::VectorXd gu = g * u.values().col(k);
    acc += model.evaluate(t - p).matrix() * gu - model.evaluate(t - q).matrix() * gu;
  }
  return {model.space(), std::move(acc)};
}

LatticeVector controllability_map(const TripleSpec& triple, const TimeGridFn& u, double t) {
  return controllability_map(triple, u.to_step(), t);
}

ObservabilityResult observability_map(const TripleSpec& triple, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& times) {
  const SemigroupModel& model = *triple.model;
  const Eigen::MatrixXd& c = triple.observation.matrix();
  Eigen::MatrixXd vals(triple.u_dim(), times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k)
    vals.col(k) = c * model.evaluate(times[k]).apply(x);
  TimeGridFn fn(times, std::move(vals), triple.u_space);

  double l1 = 0.0;
  for (Eigen::Index k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    Eigen::VectorXd midval = c * model.evaluate(0.5 * (times[k] + times[k + 1])).apply(x);
    l1 += dt * triple.u_space->norm(midval);
  }

  ObservabilityResult res{std::move(fn), l1, std::nullopt, true};
  if (triple.u_tag == UTag::AL && model.growth_bound() < 0.0) {
    LinOp ca_inv = -1.0 * (triple.observation * model.resolvent_op(0.0));
    const double bound = op_norm(ca_inv).upper * model.space()->norm(x);
    res.al_bound = bound;
    if (x.minCoeff() >= 0.0)
      res.al_bound_ok = l1 <= bound + 1e-6 * std::max(1.0, bound);
  }
  return res;
}

TimeGridFn io_operator_apply(const TripleSpec& triple, const TimeGridFn& u) {
  if (u.uniform_grid()) {
    detail::VpEngine engine(triple, u.times());
    detail::VpEngine::Seq v(u.samples());
    for (int i = 0; i < u.samples(); ++i) v[i] = u.values().col(i);
    detail::VpEngine::Seq out = engine.apply_io(v);
    Eigen::MatrixXd vals(triple.u_dim(), u.samples());
    for (int i = 0; i < u.samples(); ++i) vals.col(i) = out[i];
    return TimeGridFn(u.times(), std::move(vals), triple.u_space);
  }
  const StepFunction step = u.to_step();
  const Eigen::MatrixXd& c = triple.observation.matrix();
  Eigen::MatrixXd vals(triple.u_dim(), u.samples());
  for (int i = 0; i < u.samples(); ++i)
    vals.col(i) = c * controllability_map(triple, step, u.times()[i]).values;
  return TimeGridFn(u.times(), std::move(vals), triple.u_space);
}

namespace {

double time_norm_of(const TimeGridFn& fn, TimeNorm kind, double p) {
  SpacePtr tagged;
  switch (kind) {
    case TimeNorm::Sup:
      tagged = retag(fn.u_space(), NormKind::Sup);
      break;
    case TimeNorm::L1:
      tagged = retag(fn.u_space(), NormKind::L1);
      break;
    case TimeNorm::Lp:
      tagged = retag(fn.u_space(), NormKind::Lp, p);
      break;
  }
  TimeGridFn tmp(fn.times(), fn.values(), tagged);
  switch (kind) {
    case TimeNorm::Sup:
      return tmp.sup_time_norm();
    case TimeNorm::L1:
      return tmp.l1_time_norm();
    case TimeNorm::Lp:
      return tmp.lp_time_norm(p);
  }
  return 0.0;
}

// Compactly supported C^2 bump combination, the paper-style probe family.
Eigen::MatrixXd bump_values(const Eigen::VectorXd& times, int nu, Rng& rng, bool nonnegative) {
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(nu, times.size());
  const double t_end = times[times.size() - 1];
  for (int comp = 0; comp < nu; ++comp) {
    const int bumps = rng.uniform_int(1, 3);
    for (int b = 0; b < bumps; ++b) {
      const double center = rng.uniform(0.15 * t_end, 0.7 * t_end);
      const double width = rng.uniform(0.05 * t_end, 0.25 * t_end);
      const double coef = nonnegative ? rng.uniform(0.1, 1.0) : rng.uniform(-1.0, 1.0);
      for (Eigen::Index k = 0; k < times.size(); ++k) {
        const double s = (times[k] - center) / width;
        if (std::abs(s) < 1.0) vals(comp, k) += coef * std::pow(1.0 - s * s, 3);
      }
    }
  }
  return vals;
}

}  // namespace

IoPowerBoundReport io_power_bound_check(const TripleSpec& triple, int n_max, TimeNorm norm_kind,
                                        double p, const Eigen::VectorXd& times, int probes,
                                        Rng& rng) {
  if (n_max < 1 || n_max > 8) throw Error("io_power_bound_check: n_max must be in [1, 8]");
  IoPowerBoundReport rep;
  rep.empirical.assign(n_max, 0.0);
  rep.bound.assign(n_max, 0.0);

  // Matrix bounds ||(C A_{-1}^{-1} B)^n|| in the norm matching the time norm.
  Eigen::MatrixXd k0 = (triple.observation * triple.control_a_inv()).matrix();
  SpacePtr u_sup = retag(triple.u_space, NormKind::Sup);
  SpacePtr u_l1 = retag(triple.u_space, NormKind::L1);
  Eigen::MatrixXd kn = k0;
  for (int n = 1; n <= n_max; ++n) {
    const double b_sup = op_norm(LinOp(u_sup, u_sup, kn)).upper;
    const double b_l1 = op_norm(LinOp(u_l1, u_l1, kn)).upper;
    switch (norm_kind) {
      case TimeNorm::Sup:
        rep.bound[n - 1] = b_sup;
        break;
      case TimeNorm::L1:
        rep.bound[n - 1] = b_l1;
        break;
      case TimeNorm::Lp:
        rep.bound[n - 1] = std::pow(b_l1, 1.0 / p) * std::pow(b_sup, 1.0 - 1.0 / p);
        break;
    }
    if (n < n_max) kn = kn * k0;
  }

  for (int t = 0; t < probes; ++t) {
    TimeGridFn u(times, bump_values(times, triple.u_dim(), rng, false), triple.u_space);
    const double un = time_norm_of(u, norm_kind, p);
    if (un <= 0.0) continue;
    TimeGridFn v = u;
    for (int n = 1; n <= n_max; ++n) {
      v = io_operator_apply(triple, v);
      rep.empirical[n - 1] = std::max(rep.empirical[n - 1], time_norm_of(v, norm_kind, p) / un);
    }
  }
  rep.max_excess = 0.0;
  for (int n = 0; n < n_max; ++n)
    rep.max_excess = std::max(rep.max_excess, rep.empirical[n] - rep.bound[n]);
  return rep;
}

PicardResult picard_resolve(const TripleSpec& triple, const TimeGridFn& f, double tol) {
  detail::VpEngine engine(triple, f.times());
  detail::VpEngine::Seq seq(f.samples());
  for (int i = 0; i < f.samples(); ++i) seq[i] = f.values().col(i);

  double r_est = spectral_radius_eigen(triple.feedback_matrix(triple.lambda0()));
  r_est = std::min(std::max(r_est, 1e-3), 0.995);
  const int cap = std::max(50, 10 * static_cast<int>(std::ceil(std::log(tol) / std::log(r_est))));

  auto outcome = engine.picard(seq, tol, cap);
  Eigen::MatrixXd vals(triple.u_dim(), f.samples());
  for (int i = 0; i < f.samples(); ++i) vals.col(i) = outcome.v[i];
  return PicardResult{TimeGridFn(f.times(), std::move(vals), triple.u_space), outcome.iterations,
                      outcome.final_increment, outcome.rate_estimate, outcome.residual};
}

double estimate_tail_rate(const TimeGridFn& f) {
  const Eigen::Index n = f.samples();
  const Eigen::Index start = (3 * n) / 4;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  bool all_zero = true;
  for (Eigen::Index k = start; k < n; ++k) {
    const double nrm = f.values().col(k).cwiseAbs().maxCoeff();
    if (nrm > 1e-250) all_zero = false;
    const double y = std::log(std::max(nrm, 1e-250));
    const double t = f.times()[k];
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++count;
  }
  if (all_zero || count < 2) return -1.0;
  const double denom = count * sxx - sx * sx;
  if (denom <= 0.0) return -1.0;
  return (count * sxy - sx * sy) / denom;
}

Eigen::VectorXd laplace_transform(const TimeGridFn& f, double lambda, double tail_rate) {
  if (lambda <= 0.0) throw Error("laplace_transform: lambda must be positive");
  if (tail_rate >= 0.0) {
    std::ostringstream msg;
    msg << "laplace_transform: tail rate " << tail_rate << " >= 0";
    throw NonDecayingTail(msg.str());
  }
  const Eigen::Index n = f.samples();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(f.values().rows());
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double dt = f.times()[k + 1] - f.times()[k];
    acc += 0.5 * dt *
           (std::exp(-lambda * f.times()[k]) * f.values().col(k) +
            std::exp(-lambda * f.times()[k + 1]) * f.values().col(k + 1));
  }
  const double t_end = f.times()[n - 1];
  acc += f.values().col(n - 1) * (std::exp(-lambda * t_end) / (lambda - tail_rate));
  return acc;
}

Eigen::VectorXd laplace_transform(const TimeGridFn& f, double lambda) {
  return laplace_transform(f, lambda, estimate_tail_rate(f));
}

double laplace_identity_residual(const TripleSpec& triple, const TimeGridFn& u, double lambda,
                                 double picard_tol) {
  PicardResult solved = picard_resolve(triple, u, picard_tol);
  Eigen::VectorXd lhs = laplace_transform(solved.fn, lambda);
  Eigen::VectorXd u_hat = laplace_transform(u, lambda);
  const Eigen::MatrixXd k = triple.feedback_matrix(lambda).matrix();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k.rows(), k.cols()) - k;
  Eigen::VectorXd rhs = m.partialPivLu().solve(u_hat);
  return triple.u_space->norm(lhs - rhs);
}

}  // namespace semilat
