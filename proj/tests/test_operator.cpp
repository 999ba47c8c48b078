#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "semilat/operator.hpp"
#include "support/oracles.hpp"

using namespace semilat;

namespace {

SpacePtr sup_space(int n) { return GridSpace::vector_space(n, NormKind::Sup); }

LinOp make_op(const Eigen::MatrixXd& m) {
  return LinOp(sup_space(static_cast<int>(m.cols())), sup_space(static_cast<int>(m.rows())), m);
}

}  // namespace

TEST(Resolvent, ScalarAlgebraCases) {
  LinOp a = make_op(-Eigen::MatrixXd::Identity(2, 2));
  LinOp r = resolvent(a, 1.0);
  EXPECT_LT((r.matrix() - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-14);

  LinOp zero = make_op(Eigen::MatrixXd::Zero(3, 3));
  LinOp r2 = resolvent(zero, 2.0);
  EXPECT_LT((r2.matrix() - 0.5 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Resolvent, MultiplyBackResidual) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd m = rng.uniform_mat(5, 5, -1.0, 1.0);
    LinOp a = make_op(m);
    const double lambda = m.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
    LinOp r = resolvent(a, lambda);
    Eigen::MatrixXd check =
        (lambda * Eigen::MatrixXd::Identity(5, 5) - m) * r.matrix() -
        Eigen::MatrixXd::Identity(5, 5);
    EXPECT_LE(check.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Resolvent, SingularLambdaThrows) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.0, 0.0, 2.0;
  EXPECT_THROW(resolvent(make_op(m), 1.0), SingularResolvent);
}

TEST(Resolvent, ResolventIdentity) {
  Rng rng(77);
  Eigen::MatrixXd m = rng.uniform_mat(6, 6, -0.5, 0.5);
  LinOp a = make_op(m);
  const double bound = m.cwiseAbs().rowwise().sum().maxCoeff();
  for (int trial = 0; trial < 10; ++trial) {
    const double l1 = bound + rng.uniform(0.5, 3.0);
    const double l2 = bound + rng.uniform(0.5, 3.0);
    Eigen::MatrixXd lhs = resolvent(a, l1).matrix() - resolvent(a, l2).matrix();
    Eigen::MatrixXd rhs = (l2 - l1) * resolvent(a, l1).matrix() * resolvent(a, l2).matrix();
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SpectralRadius, TrivialCases) {
  EXPECT_NEAR(spectral_radius_eigen(make_op(Eigen::MatrixXd::Identity(3, 3))), 1.0, 1e-12);
  Eigen::MatrixXd nilp(2, 2);
  nilp << 0, 1, 0, 0;
  EXPECT_NEAR(spectral_radius_eigen(make_op(nilp)), 0.0, 1e-12);
}

TEST(SpectralRadius, CharacteristicPolynomialOracle) {
  Eigen::Matrix2d m;
  m << 0.3, 0.1, 0.2, 0.4;
  const double expected = oracles::spectral_radius_2x2(m);
  EXPECT_NEAR(spectral_radius_eigen(make_op(m)), expected, 1e-12);
  auto gelfand = spectral_radius_gelfand(make_op(m), 64);
  EXPECT_NEAR(gelfand.value, expected, 0.05);
}

TEST(SpectralRadius, GelfandDyadicSequenceIsMonotone) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(2, 8);
    LinOp t = make_op(rng.uniform_mat(n, n, 0.0, 1.0));
    const double eig = spectral_radius_eigen(t);
    auto rep = spectral_radius_gelfand(t, 64);
    for (size_t k = 1; k < rep.estimates.size(); ++k)
      EXPECT_LE(rep.estimates[k], rep.estimates[k - 1] + 1e-12);
    EXPECT_GE(rep.value + 1e-12, eig);
    EXPECT_NEAR(rep.value, eig, 0.05);
  }
}

TEST(NeumannInverse, ClosedFormsAndDirectSolveOracle) {
  EXPECT_LT((neumann_inverse(make_op(Eigen::MatrixXd::Zero(3, 3)), 1e-12).matrix() -
             Eigen::MatrixXd::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LT((neumann_inverse(make_op(0.5 * Eigen::MatrixXd::Identity(2, 2)), 1e-14).matrix() -
             2.0 * Eigen::MatrixXd::Identity(2, 2))
                .cwiseAbs()
                .maxCoeff(),
            1e-10);

  Rng rng(41);
  Eigen::MatrixXd raw = rng.uniform_mat(6, 6, 0.0, 1.0);
  LinOp t0 = make_op(raw);
  LinOp t = (0.7 / spectral_radius_eigen(t0)) * t0;
  LinOp inv = neumann_inverse(t, 1e-10);
  Eigen::MatrixXd direct = (Eigen::MatrixXd::Identity(6, 6) - t.matrix())
                               .partialPivLu()
                               .solve(Eigen::MatrixXd::Identity(6, 6));
  EXPECT_LE((inv.matrix() - direct).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(NeumannInverse, DivergenceDetected) {
  EXPECT_THROW(neumann_inverse(make_op(1.5 * Eigen::MatrixXd::Identity(2, 2)), 1e-10),
               DivergentSeries);
}

TEST(NeumannInverse, TailDecaysAtTheSpectralRate) {
  Rng rng(43);
  Eigen::MatrixXd raw = rng.uniform_mat(5, 5, 0.0, 1.0);
  const double r = 0.6;
  Eigen::MatrixXd t = raw * (r / spectral_radius_eigen(make_op(raw)));
  Eigen::MatrixXd direct = (Eigen::MatrixXd::Identity(5, 5) - t)
                               .partialPivLu()
                               .solve(Eigen::MatrixXd::Identity(5, 5));
  // Tail norm after N terms against C * r^N: the log-linear fit slope must
  // not exceed log r by more than 0.05.
  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(5, 5);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(5, 5);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = 0; n <= 40; ++n) {
    if (n >= 10) {
      const double tail = (direct - partial).cwiseAbs().rowwise().sum().maxCoeff();
      const double y = std::log(tail);
      sx += n;
      sy += y;
      sxx += static_cast<double>(n) * n;
      sxy += n * y;
      ++count;
    }
    partial += power;
    power = power * t;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  EXPECT_LE(slope, std::log(r) + 0.05);
}

TEST(Positivity, EntrywiseAndProbeRoutes) {
  Rng rng(17);
  auto id_rep = op_positivity_check(make_op(Eigen::MatrixXd::Identity(3, 3)), 1e-10, &rng);
  EXPECT_TRUE(id_rep.positive);
  EXPECT_EQ(id_rep.min_entry, 0.0);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(1, 2) = -0.1;
  EXPECT_FALSE(op_positivity_check(make_op(bad), 1e-12).positive);

  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 9);
    auto rep = op_positivity_check(make_op(rng.uniform_mat(n, n, 0.0, 1.0)), 1e-10, &rng);
    EXPECT_TRUE(rep.positive);
    EXPECT_LE(rep.probe_violation, 1e-12);
  }
}

TEST(Domination, TrivialAndScalarCases) {
  Rng rng(23);
  Eigen::MatrixXd t = rng.uniform_mat(4, 4, 0.0, 1.0);
  auto self = domination_check(make_op(t), make_op(t), 1e-10, &rng);
  EXPECT_TRUE(self.dominated);
  EXPECT_TRUE(self.probe_route_agrees);

  Eigen::MatrixXd s1(1, 1), t1(1, 1);
  s1 << -0.2;
  t1 << 0.3;
  auto scalar = domination_check(make_op(s1), make_op(t1), 1e-10, &rng);
  EXPECT_TRUE(scalar.dominated);
  EXPECT_NEAR(scalar.sr_s, 0.2, 1e-14);
  EXPECT_NEAR(scalar.sr_t, 0.3, 1e-14);
  EXPECT_TRUE(scalar.sr_ok);
}

TEST(Domination, RandomSignedFractionsSatisfyPropSpr) {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(2, 8);
    Eigen::MatrixXd t = rng.uniform_mat(n, n, 0.0, 1.0);
    Eigen::MatrixXd s(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s(i, j) = (rng.unit() < 0.5 ? -1.0 : 1.0) * rng.unit() * t(i, j);
    auto rep = domination_check(make_op(s), make_op(t), 1e-10, &rng);
    EXPECT_TRUE(rep.dominated);
    EXPECT_TRUE(rep.probe_route_agrees);
    EXPECT_LE(rep.sr_s, rep.sr_t + 1e-8);
    EXPECT_TRUE(rep.sr_ok);
    EXPECT_TRUE(rep.power_norms_ok);
  }
}

TEST(OpNorm, ClosedFormsDominateProbes) {
  Rng rng(61);
  const int n = 7;
  auto check_kind = [&](NormKind dk, NormKind ck, double p) {
    auto dom = GridSpace::uniform_trapezoid(n, 0.0, 1.0, dk, p);
    auto cod = GridSpace::uniform_trapezoid(n, 0.0, 2.0, ck, p);
    LinOp t(dom, cod, rng.uniform_mat(n, n, -1.0, 1.0));
    Rng probe_rng(123);
    auto est = op_norm(t, &probe_rng, 200);
    EXPECT_LE(est.lower, est.upper + 1e-12);
    // Monte-Carlo lower bound can never beat a certified upper bound.
    Rng mc(321);
    for (int k = 0; k < 300; ++k) {
      Eigen::VectorXd x = mc.uniform_vec(n, -1.0, 1.0);
      const double nx = dom->norm(x);
      if (nx > 0.0) EXPECT_LE(cod->norm(t.matrix() * x) / nx, est.upper * (1.0 + 1e-12));
    }
    if (est.exact) {
      // The probe supremum should come close to an exact norm.
      double best = 0.0;
      for (int k = 0; k < 4000; ++k) {
        Eigen::VectorXd x = mc.uniform_vec(n, -1.0, 1.0);
        const double nx = dom->norm(x);
        if (nx > 0.0) best = std::max(best, cod->norm(t.matrix() * x) / nx);
      }
      EXPECT_GE(best, 0.5 * est.upper);
    }
  };
  check_kind(NormKind::L1, NormKind::L1, 2.0);
  check_kind(NormKind::Sup, NormKind::Sup, 2.0);
  check_kind(NormKind::L1, NormKind::Sup, 2.0);
  check_kind(NormKind::Sup, NormKind::L1, 2.0);
  check_kind(NormKind::Lp, NormKind::Lp, 2.0);
  check_kind(NormKind::Lp, NormKind::Lp, 3.0);
  check_kind(NormKind::Sup, NormKind::Lp, 2.5);
  check_kind(NormKind::Lp, NormKind::L1, 3.0);
}

TEST(OpNorm, RankOneShapesAreExact) {
  auto dom = GridSpace::uniform_trapezoid(9, 0.0, 1.0, NormKind::Lp, 2.0);
  auto cod = GridSpace::vector_space(1, NormKind::Sup);
  Rng rng(5);
  Eigen::MatrixXd row = rng.uniform_mat(1, 9, -1.0, 1.0);
  auto est = op_norm(LinOp(dom, cod, row));
  EXPECT_TRUE(est.exact);
  // Weighted dual norm of the functional.
  double acc = 0.0;
  for (int j = 0; j < 9; ++j)
    acc += dom->weights()[j] * std::pow(std::abs(row(0, j)) / dom->weights()[j], 2.0);
  EXPECT_NEAR(est.upper, std::sqrt(acc), 1e-12);
}
