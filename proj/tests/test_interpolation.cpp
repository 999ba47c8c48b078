#include <gtest/gtest.h>

#include <cmath>

#include "semilat/interpolation.hpp"
#include "semilat/errors.hpp"

using namespace semilat;

TEST(Holder, IdentityAndAveragingOperators) {
  Rng rng(1);
  TimeOperator id(Eigen::MatrixXd::Identity(12, 12), 2);
  EXPECT_LE(holder_positive_check(id, 2.0, 50, rng), 1e-12);

  const int n = 12;
  TimeOperator avg(Eigen::MatrixXd::Constant(n, n, 1.0 / n), 2);
  EXPECT_LE(holder_positive_check(avg, 2.0, 50, rng), 1e-12);
  EXPECT_LE(holder_positive_check(avg, 1.5, 50, rng), 1e-12);
}

TEST(Holder, RandomPositiveOperators) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int nt = rng.uniform_int(3, 8);
    const int nc = rng.uniform_int(1, 3);
    TimeOperator t(rng.uniform_mat(nt * nc, nt * nc, 0.0, 1.0), nc);
    EXPECT_LE(holder_positive_check(t, rng.uniform(1.2, 4.0), 20, rng), 1e-9);
  }
}

TEST(Holder, RejectsSignedOperators) {
  Rng rng(3);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m(0, 1) = -0.2;
  EXPECT_THROW(holder_positive_check(TimeOperator(m, 1), 2.0, 5, rng), NotPositiveOperator);
}

TEST(RieszThorin, IdentityAndDiagonalClosedForms) {
  Rng rng(4);
  TimeOperator id(Eigen::MatrixXd::Identity(10, 10), 1);
  auto rep = riesz_thorin_check(id, {1.5, 2.0, 3.0}, 30, rng);
  EXPECT_NEAR(rep.m0, 1.0, 1e-14);
  EXPECT_NEAR(rep.m1, 1.0, 1e-14);
  for (size_t k = 0; k < rep.p_values.size(); ++k) {
    EXPECT_NEAR(rep.empirical[k], 1.0, 1e-12);
    EXPECT_NEAR(rep.bound[k], 1.0, 1e-14);
  }

  // diag(2, 1/2): M0 = M1 = 2 and the L2 norm is exactly 2 <= 2.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  auto rep2 = riesz_thorin_check(TimeOperator(d, 1), {2.0}, 30, rng);
  EXPECT_NEAR(rep2.m0, 2.0, 1e-14);
  EXPECT_NEAR(rep2.m1, 2.0, 1e-14);
  EXPECT_NEAR(rep2.empirical[0], 2.0, 1e-12);
  EXPECT_LE(rep2.max_excess, 1e-9);
}

TEST(RieszThorin, RandomPositiveOperatorsBelowTheBound) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int nt = rng.uniform_int(4, 10);
    const int nc = rng.uniform_int(1, 2);
    TimeOperator t(rng.uniform_mat(nt * nc, nt * nc, 0.0, 1.0), nc);
    auto rep = riesz_thorin_check(t, {1.5, 2.0, 3.0}, 20, rng);
    EXPECT_LE(rep.max_excess, 1e-9);
  }
}

TEST(RieszThorin, LogConvexityChordAtFivePoints) {
  Rng rng(6);
  TimeOperator t(rng.uniform_mat(20, 20, 0.0, 1.0), 2);
  auto rep = riesz_thorin_check(t, {1.25, 1.5, 2.0, 3.0, 6.0}, 40, rng);
  for (size_t k = 0; k < rep.p_values.size(); ++k) {
    const double theta = 1.0 / rep.p_values[k];
    const double chord = theta * std::log(rep.m1) + (1.0 - theta) * std::log(rep.m0);
    EXPECT_LE(std::log(rep.empirical[k]), chord + 1e-12);
  }
}

TEST(RieszThorin, PositivityPreservedOnProbes) {
  Rng rng(7);
  Eigen::MatrixXd m = rng.uniform_mat(15, 15, 0.0, 1.0);
  TimeOperator t(m, 3);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd f = rng.uniform_vec(15, 0.0, 1.0);
    EXPECT_GE((m * f).minCoeff(), 0.0);
  }
  Eigen::MatrixXd bad = m;
  bad(3, 3) = -0.5;
  EXPECT_THROW(riesz_thorin_check(TimeOperator(bad, 3), {2.0}, 5, rng), NotPositiveOperator);
}
