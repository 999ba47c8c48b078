#pragma once

#include <functional>

#include "semilat/perturbation.hpp"

namespace semilat {

/// Greiner-style boundary setup for the 1D Laplacian on [0,1]: interior
/// grid, two-point boundary space, trace-eliminated Dirichlet operator and a
/// kernel-integral feedback functional Phi.
class BoundaryModel {
public:
  /// n_nodes counts the full grid including both endpoints; the state space
  /// holds the n_nodes - 2 interior values. kernel(z, x) is sampled at
  /// z in {0, 1}.
  static BoundaryModel laplacian_1d(int n_nodes, std::function<double(double, double)> kernel,
                                    NormKind x_kind = NormKind::Lp, double p = 2.0);

  const SpacePtr& interior() const { return interior_; }
  const SpacePtr& boundary() const { return boundary_; }
  const LinOp& phi() const { return phi_; }
  const LinOp& a_dirichlet() const { return a_dirichlet_; }
  /// Boundary-to-interior coupling N with (lambda - A_D) L_lambda = N.
  const Eigen::MatrixXd& coupling() const { return coupling_; }
  double mesh() const { return h_; }

  /// Dirichlet map g -> f solving (lambda - A_m) f = 0, Lf = g on the full
  /// grid (returned on the interior). Verifies the two-parameter resolvent
  /// identity and L L_lambda = Id; throws SingularBVP when the solve fails.
  LinOp dirichlet_map(double lambda) const;

  ModelPtr heat_model(int mode_count = 0) const;

  /// Triple (A_Dirichlet, B = L_A, C = Phi) with B in regularized
  /// coordinates; raw action is the coupling matrix N.
  TripleSpec feedback_triple(int mode_count = 0) const;

private:
  SpacePtr interior_;
  SpacePtr boundary_;
  LinOp phi_;
  LinOp a_dirichlet_;
  Eigen::MatrixXd coupling_;
  double h_ = 0.0;
  BoundaryModel() = default;
};

struct BoundaryGeneratorResult {
  PerturbedSemigroup s;
  std::optional<PerturbedSemigroup> s_tilde;  // signed-kernel domination route
  double r_check;                             // r(Phi L_lambda) at lambda_check
  double route_agreement;                     // resolvent gap between routes (a) and (b)
  double domination_excess;                   // signed route only
  bool positive_route;
};

/// Builds the boundary-perturbed semigroup two ways and cross-checks them:
/// (a) closed loop of the trace-eliminated matrix A_D + N Phi, and (b) the
/// factorized resolvent of the triple (A, L_A, Phi). Disagreement beyond
/// 1e-6 throws InconsistentRepresentations. Signed Phi is routed through the
/// domination construction against |Phi|.
BoundaryGeneratorResult boundary_generator(const BoundaryModel& model, double lambda_check,
                                           const TimeGridSpec& grid,
                                           const std::vector<double>& store_times, double tol,
                                           Rng& rng);

struct HeatFeedbackConfig {
  int grid_n = 200;
  std::function<double(double, double)> kernel;
  std::vector<double> lambda_sweep{1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 200.0};
  TimeGridSpec time_grid{0.5, 64};
  std::vector<double> report_times;  // defaults to 8 equispaced grid times
  double tol = 1e-10;
};

struct HeatLambdaRow {
  double lambda;
  double spectral_radius_phi_llambda;
  double norm_llambda_one;
};

struct HeatTimeRow {
  double t;
  double min_entry_s;
  double domination_residual;
  double mass;
};

struct HeatScenarioReport {
  std::vector<HeatLambdaRow> sweep;
  std::vector<HeatTimeRow> times;
  double lambda_star;       // first sweep lambda with r(Phi L_lambda) < 1
  double route_agreement;
  double domination_excess;
  bool signed_kernel;
};

HeatScenarioReport heat_feedback_scenario(const HeatFeedbackConfig& config, Rng& rng);

}  // namespace semilat
