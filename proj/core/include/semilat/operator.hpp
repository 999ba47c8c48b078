#pragma once

#include <Eigen/Core>
#include <vector>

#include "semilat/lattice.hpp"

namespace semilat {

/// Dense linear operator between two GridSpaces. Rows follow the codomain,
/// columns the domain. Operator norms are taken with respect to the norm
/// kinds of the attached spaces.
class LinOp {
public:
  /// Empty operator; any use before assignment throws.
  LinOp() = default;
  LinOp(SpacePtr domain, SpacePtr codomain, Eigen::MatrixXd matrix);

  static LinOp identity(const SpacePtr& space);
  static LinOp zero(const SpacePtr& domain, const SpacePtr& codomain);

  const SpacePtr& domain() const { return domain_; }
  const SpacePtr& codomain() const { return codomain_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }
  Eigen::Index rows() const { return mat_.rows(); }
  Eigen::Index cols() const { return mat_.cols(); }
  bool square() const { return mat_.rows() == mat_.cols(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  LatticeVector apply(const LatticeVector& x) const;

  LinOp operator*(const LinOp& rhs) const;
  LinOp operator+(const LinOp& rhs) const;
  LinOp operator-(const LinOp& rhs) const;
  friend LinOp operator*(double s, const LinOp& op) {
    return LinOp(op.domain_, op.codomain_, s * op.mat_);
  }

private:
  SpacePtr domain_;
  SpacePtr codomain_;
  Eigen::MatrixXd mat_;
};

/// Operator-norm estimate. `exact` marks closed-form kinds (L1->L1,
/// Sup->Sup, L1->Sup, nonnegative Sup->L1, weighted L2->L2, and rank-one
/// shapes); otherwise `lower` is a certified probe supremum and `upper` an
/// interpolation bound through |T|.
struct NormEstimate {
  double lower;
  double upper;
  bool exact;
};

NormEstimate op_norm(const LinOp& op, Rng* rng = nullptr, int probes = 200);

/// Certified upper bound on the operator norm (== value when exact).
double op_norm_upper(const LinOp& op);

/// (lambda*I - A)^{-1}. Throws SingularResolvent when the solve fails or the
/// multiply-back residual exceeds 1e-8.
LinOp resolvent(const LinOp& a, double lambda);

enum class SpectralMethod { Eigen, Gelfand };

struct GelfandReport {
  std::vector<int> powers;
  std::vector<double> estimates;  // ||T^n||^{1/n} along `powers`
  double value;                   // estimate at the final power
};

double spectral_radius_eigen(const LinOp& op);
GelfandReport spectral_radius_gelfand(const LinOp& op, int n_max);
double spectral_radius(const LinOp& op, SpectralMethod method, int n_max = 64);

/// Sum of the Neumann series (I - T)^{-1} = sum T^n, truncated when the
/// increment norm drops below tol. Requires r(T) < 1 (eigen route), throws
/// DivergentSeries otherwise or when increments grow 10 times in a row.
LinOp neumann_inverse(const LinOp& op, double tol);

struct PositivityReport {
  bool positive;
  double min_entry;
  double probe_violation;  // max componentwise excess of |Tx| over T|x|
};

PositivityReport op_positivity_check(const LinOp& op, double tol = 1e-10, Rng* rng = nullptr,
                                     int probes = 50);

struct DominationReport {
  bool dominated;        // |S| <= T + tol entrywise
  double max_excess;     // max entry of |S| - T
  bool probe_route_agrees;
  double sr_s;
  double sr_t;
  bool sr_ok;            // r(S) <= r(T) + 1e-8 when dominated
  bool power_norms_ok;   // ||S^n|| <= ||T^n|| + tol for n <= 8 when dominated
};

DominationReport domination_check(const LinOp& s, const LinOp& t, double tol = 1e-10,
                                  Rng* rng = nullptr);

}  // namespace semilat
