#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "semilat/triple.hpp"

namespace semilat::detail {

/// Shared evaluation core for the variation-of-parameters machinery on a
/// uniform time grid. All quantities are telescoped through the one-step
/// operator T(h): the controllability state follows
///   z_i = T(h) z_{i-1} + Eg s_i,   Eg = (T(h) - I) A_{-1}^{-1} B,
/// which reproduces the step-function identity exactly whenever the model
/// satisfies the semigroup law at grid multiples (matrix exponentials, node-
/// aligned shifts, spectral heat).
class VpEngine {
public:
  using Seq = std::vector<Eigen::MatrixXd>;  // one U- or X-valued block per grid time

  VpEngine(const TripleSpec& triple, const Eigen::VectorXd& times);

  int steps() const { return m_; }
  double step() const { return h_; }
  int state_dim() const { return nx_; }
  int u_dim() const { return nu_; }
  const Eigen::VectorXd& times() const { return times_; }

  /// F_inf applied to a grid function (midpoint step approximation).
  Seq apply_io(const Seq& v) const;

  /// Rows C T(t_i) X for the columns of x (identity by default).
  Seq observability_rhs(const Eigen::MatrixXd& x_cols) const;

  struct PicardOutcome {
    Seq v;
    int iterations;
    double final_increment;
    double rate_estimate;
    double residual;
  };

  /// Neumann/Picard iteration v = f + F v accumulated through increments.
  PicardOutcome picard(const Seq& f, double tol, int max_iter) const;

  /// B_{t_i} applied to the step approximation of v, for the requested grid
  /// indices (ascending). Returns one X-valued block per index.
  std::vector<Eigen::MatrixXd> bt_snapshots(const Seq& v, const std::vector<int>& indices) const;

  /// One-step transition applied to a block of X-valued columns.
  Eigen::MatrixXd step_apply(const Eigen::MatrixXd& z) const;

  const Eigen::MatrixXd& eg() const { return eg_; }
  const Eigen::MatrixXd& c() const { return c_; }

private:
  Eigen::VectorXd times_;
  double h_;
  int m_;
  int nx_;
  int nu_;
  bool sparse_step_;
  Eigen::SparseMatrix<double> th_sparse_;
  Eigen::MatrixXd th_dense_;
  Eigen::MatrixXd eg_;  // (T(h) - I) A_{-1}^{-1} B
  Eigen::MatrixXd c_;
};

double seq_sup_norm(const VpEngine::Seq& a);
double seq_sup_diff(const VpEngine::Seq& a, const VpEngine::Seq& b);

}  // namespace semilat::detail
