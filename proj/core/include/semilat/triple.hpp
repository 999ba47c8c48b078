#pragma once

#include "semilat/semigroup.hpp"

namespace semilat {

/// Norm-family role of the control/observation space U.
enum class UTag { AM, AL, Dual };

/// Scenario-supplied rule standing in for the space Z between D(A) and X.
enum class ZFlag { All, BoundedScaledValues, ContinuousProxy };

/// The (A, B, C) triple: semigroup model for A, control operator in
/// regularized coordinates, observation matrix C, and the tags the theorem
/// hypotheses dispatch on.
struct TripleSpec {
  ModelPtr model;
  RegularizedControl control;
  LinOp observation;  // C : X (domain proxy) -> U
  SpacePtr u_space;
  UTag u_tag = UTag::AM;
  ZFlag z_flag = ZFlag::All;

  double lambda0() const { return control.lambda0; }
  const SpacePtr& state_space() const { return model->space(); }
  int u_dim() const { return u_space->dim(); }

  /// R(lambda, A_{-1}) B : U -> X.
  LinOp control_resolvent_at(double lambda) const {
    return control_resolvent(*model, control, lambda);
  }
  /// A_{-1}^{-1} B : U -> X (requires negative growth bound).
  LinOp control_a_inv() const { return control_a_inverse(*model, control); }
  /// C R(lambda, A_{-1}) B : U -> U.
  LinOp feedback_matrix(double lambda) const {
    LinOp m = observation * control_resolvent_at(lambda);
    return LinOp(u_space, u_space, m.matrix());
  }
};

/// Triple for A - mu*I with the control re-regularized at new_lambda0. The
/// paper's "assume omega_0(A) < 0 and take lambda = 0" device.
inline TripleSpec rescale_triple(const TripleSpec& t, double mu, double new_lambda0) {
  if (mu == 0.0 && new_lambda0 == t.lambda0()) return t;
  TripleSpec out = t;
  out.model = t.model->rescaled(mu);
  if (t.control.raw) {
    LinOp raw = *t.control.raw;
    out.control = RegularizedControl::from_raw(*out.model, raw, new_lambda0);
  } else {
    LinOp b = control_resolvent(*t.model, t.control, new_lambda0 + mu);
    out.control = RegularizedControl{b, new_lambda0, std::nullopt};
  }
  return out;
}

}  // namespace semilat
