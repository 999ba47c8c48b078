#pragma once

#include <optional>
#include <vector>

#include "semilat/triple.hpp"

namespace semilat {

/// U-valued step function: value col k holds on [breakpoints[k], breakpoints[k+1]).
class StepFunction {
public:
  StepFunction(Eigen::VectorXd breakpoints, Eigen::MatrixXd values, SpacePtr u_space);

  const Eigen::VectorXd& breakpoints() const { return breakpoints_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const SpacePtr& u_space() const { return u_space_; }
  double support_end() const { return breakpoints_[breakpoints_.size() - 1]; }

  /// Componentwise sup of |values|; dominates |u(s)| everywhere.
  Eigen::VectorXd ubar() const { return values_.cwiseAbs().rowwise().maxCoeff(); }
  Eigen::VectorXd value_at(double s) const;

private:
  Eigen::VectorXd breakpoints_;
  Eigen::MatrixXd values_;
  SpacePtr u_space_;
};

/// U-valued function sampled on a time grid starting at 0, linearly
/// interpolated between samples.
class TimeGridFn {
public:
  TimeGridFn(Eigen::VectorXd times, Eigen::MatrixXd values, SpacePtr u_space);

  const Eigen::VectorXd& times() const { return times_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const SpacePtr& u_space() const { return u_space_; }
  int samples() const { return static_cast<int>(times_.size()); }

  Eigen::VectorXd eval(double t) const;
  /// Step approximation on the same grid with midpoint values.
  StepFunction to_step() const;

  double sup_time_norm() const;        // sup_t |u(t)|_U
  double l1_time_norm() const;         // trapezoid of |u(t)|_U
  double lp_time_norm(double p) const; // trapezoid of |u(t)|_U^p, then root

  bool uniform_grid(double tol = 1e-9) const;

private:
  Eigen::VectorXd times_;
  Eigen::MatrixXd values_;
  SpacePtr u_space_;
};

/// Controllability map B_t u via the exact step-function telescoping
/// identity; continuous inputs are step-approximated first. Requires the
/// triple rescaled to a negative growth bound (NotRescaled otherwise).
LatticeVector controllability_map(const TripleSpec& triple, const StepFunction& u, double t);
LatticeVector controllability_map(const TripleSpec& triple, const TimeGridFn& u, double t);

struct ObservabilityResult {
  TimeGridFn fn;                 // s -> C T(s) x on the sample grid
  double l1_time_norm;           // midpoint quadrature of |C T(s) x|_U
  std::optional<double> al_bound;  // ||C A^{-1}|| * ||x|| for AL triples
  bool al_bound_ok;              // l1_time_norm <= al_bound + tol (positive x)
};

ObservabilityResult observability_map(const TripleSpec& triple, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& times);

/// (F_inf u)(t) = C B_t u on the grid of u.
TimeGridFn io_operator_apply(const TripleSpec& triple, const TimeGridFn& u);

enum class TimeNorm { Sup, L1, Lp };

struct IoPowerBoundReport {
  std::vector<double> empirical;  // probe supremum of ||F^n u|| / ||u||
  std::vector<double> bound;      // matrix bound ||(C A_{-1}^{-1} B)^n||
  double max_excess;
};

IoPowerBoundReport io_power_bound_check(const TripleSpec& triple, int n_max, TimeNorm norm_kind,
                                        double p, const Eigen::VectorXd& times, int probes,
                                        Rng& rng);

struct PicardResult {
  TimeGridFn fn;
  int iterations;
  double final_increment;
  double rate_estimate;   // observed increment contraction
  double residual;        // sup norm of v - f - F v
};

/// Fixed point of v = f + F_inf v by Picard iteration from v0 = f.
/// Requires r(C A_{-1}^{-1} B) < 1; throws DivergentIteration when the
/// increment norms grow 10 times in a row or the iteration cap is hit.
PicardResult picard_resolve(const TripleSpec& triple, const TimeGridFn& f, double tol);

double estimate_tail_rate(const TimeGridFn& f);

/// int_0^inf e^{-lambda t} f(t) dt: trapezoid over the grid plus the
/// exponential tail correction f(T_end) e^{-lambda T_end} / (lambda - rate).
/// Throws NonDecayingTail when the tail rate is >= 0.
Eigen::VectorXd laplace_transform(const TimeGridFn& f, double lambda, double tail_rate);
Eigen::VectorXd laplace_transform(const TimeGridFn& f, double lambda);

/// | L((I-F)^{-1} u)(lambda) - (I - C R(lambda,A_{-1}) B)^{-1} u_hat(lambda) |
/// in the U norm.
double laplace_identity_residual(const TripleSpec& triple, const TimeGridFn& u, double lambda,
                                 double picard_tol = 1e-10);

}  // namespace semilat
