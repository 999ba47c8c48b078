#pragma once

#include <memory>
#include <optional>
#include <string>

#include "semilat/operator.hpp"

namespace semilat {

/// Evaluator for a positive C0-semigroup T(t) on a GridSpace, with its
/// resolvent R(lambda, A) and growth-bound metadata. Rescaling by mu turns
/// the model into the one generated by A - mu*I; the accumulated shift is
/// recorded so results can be reported in original coordinates.
///
/// Models are immutable; evaluations are pure and safe to run concurrently.
class SemigroupModel {
public:
  virtual ~SemigroupModel() = default;

  LinOp evaluate(double t) const;
  LinOp resolvent_op(double lambda) const;

  double growth_bound() const { return base_growth_bound() - mu_; }
  double rescale_shift() const { return mu_; }
  const SpacePtr& space() const { return space_; }
  virtual std::optional<LinOp> generator() const { return std::nullopt; }
  virtual std::string kind_name() const = 0;
  virtual std::shared_ptr<const SemigroupModel> rescaled(double mu) const = 0;

  static std::shared_ptr<const SemigroupModel> matrix_exp(const LinOp& a);
  /// (T(t)f)(x) = f(x+t) for x+t <= b, 0 beyond; linear interpolation
  /// between nodes. The grid must contain the right endpoint.
  static std::shared_ptr<const SemigroupModel> nilpotent_left_shift(const SpacePtr& space);
  /// (T(t)f)(x) = f(x-t) for x-t above the left endpoint, 0 beyond; a
  /// virtual zero node at the left endpoint realizes the C0 constraint when
  /// the grid excludes it.
  static std::shared_ptr<const SemigroupModel> nilpotent_right_shift(const SpacePtr& space);
  /// Dirichlet heat semigroup on an interior grid, diagonal in the discrete
  /// sine basis; mode_count caps the retained modes for t > 0.
  static std::shared_ptr<const SemigroupModel> heat1d(const SpacePtr& space, int mode_count = 64);

protected:
  SemigroupModel(SpacePtr space, double mu) : space_(std::move(space)), mu_(mu) {}
  virtual LinOp eval_base(double t) const = 0;
  virtual LinOp resolvent_base(double lambda) const = 0;
  virtual double base_growth_bound() const = 0;

  SpacePtr space_;
  double mu_ = 0.0;
};

using ModelPtr = std::shared_ptr<const SemigroupModel>;

/// Model for A - mu*I: T_new(t) = e^{-mu t} T(t).
ModelPtr rescale(const ModelPtr& model, double mu);

/// Safe upper estimate of omega_0: max of the log-norm regression slope
/// over sampled times and (for matrix models) the largest eigenvalue real
/// part.
double growth_bound_estimate(const SemigroupModel& model, double horizon, int samples);

struct SubspaceReport {
  double max_resolvent_residual;
  double max_semigroup_residual;
};

/// Checks that the restriction of the fine model's resolvent and semigroup
/// to the coarse grid reproduces the coarse model (Appendix-style subspace
/// consistency). Coarse nodes must occur among the fine nodes.
SubspaceReport subspace_consistency_check(const SemigroupModel& fine, const SemigroupModel& coarse,
                                          const std::vector<double>& lambdas,
                                          const std::vector<double>& times, Rng& rng,
                                          int probes = 20);

/// Control operator in regularized coordinates: b_reg = R(lambda0, A_{-1}) B.
/// When the unregularized action maps into X (bounded B), `raw` holds it and
/// exact resolvent formulas use it directly.
struct RegularizedControl {
  LinOp b_reg;
  double lambda0;
  std::optional<LinOp> raw;

  static RegularizedControl from_raw(const SemigroupModel& model, const LinOp& raw,
                                     double lambda0);
};

/// R(lambda, A_{-1}) B, via the raw action when available and the resolvent
/// identity through b_reg otherwise.
LinOp control_resolvent(const SemigroupModel& model, const RegularizedControl& control,
                        double lambda);

/// A_{-1}^{-1} B = -R(0, A_{-1}) B; requires growth_bound < 0 (NotRescaled).
LinOp control_a_inverse(const SemigroupModel& model, const RegularizedControl& control);

}  // namespace semilat
