#pragma once

#include <Eigen/Core>
#include <vector>

#include "semilat/rng.hpp"

namespace semilat {

/// Positive operator on R^N-valued grid functions of time, stored on
/// stacked coordinates (time-major blocks of N components) with uniform
/// time weights. The endpoint norms are the plain max row sum (Sup) and max
/// column sum (L1); the uniform weights cancel in every operator norm.
class TimeOperator {
public:
  TimeOperator(Eigen::MatrixXd matrix, int n_components);

  const Eigen::MatrixXd& matrix() const { return mat_; }
  int n_components() const { return n_components_; }
  int n_times() const { return static_cast<int>(mat_.rows()) / n_components_; }
  bool positive(double tol = 1e-12) const { return mat_.minCoeff() >= -tol; }

  double sup_norm() const;  // M0
  double l1_norm() const;   // M1
  double vector_p_norm(const Eigen::VectorXd& f, double p) const;

private:
  Eigen::MatrixXd mat_;
  int n_components_;
};

/// Componentwise violation of T(fg) <= (T f^p)^{1/p} (T g^{p'})^{1/p'} over
/// random nonnegative compactly supported pairs. Throws NotPositiveOperator.
double holder_positive_check(const TimeOperator& t, double p, int trials, Rng& rng);

struct RieszThorinReport {
  double m0;
  double m1;
  std::vector<double> p_values;
  std::vector<double> empirical;  // probe supremum of ||Tf||_p / ||f||_p
  std::vector<double> bound;      // M0^{1-1/p} M1^{1/p}
  double max_excess;
};

RieszThorinReport riesz_thorin_check(const TimeOperator& t, const std::vector<double>& p_list,
                                     int trials, Rng& rng);

}  // namespace semilat
