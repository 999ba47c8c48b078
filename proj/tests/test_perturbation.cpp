#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "semilat/perturbation.hpp"
#include "support/oracles.hpp"

using namespace semilat;

namespace {

TripleSpec scalar_triple(double a_val, double b_val, double c_val, UTag tag = UTag::AM) {
  auto sx = GridSpace::vector_space(1, NormKind::Sup);
  auto su = GridSpace::vector_space(1, tag == UTag::AL ? NormKind::L1 : NormKind::Sup);
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << a_val;
  b << b_val;
  c << c_val;
  ModelPtr model = SemigroupModel::matrix_exp(LinOp(sx, sx, a));
  TripleSpec triple;
  triple.model = model;
  triple.control =
      RegularizedControl::from_raw(*model, LinOp(su, sx, b), model->growth_bound() + 1.0);
  triple.observation = LinOp(sx, su, c);
  triple.u_space = su;
  triple.u_tag = tag;
  return triple;
}

}  // namespace

TEST(ControlPositivity, TrivialScalarAndSignInspection) {
  TripleSpec zero = scalar_triple(-1.0, 0.0, 1.0);
  auto rep0 = check_control_positivity(zero, {0.0, 0.5, 2.0});
  EXPECT_TRUE(rep0.positive);

  // Scalar A = -1, B = 1: R(lambda, A) B = 1/(lambda+1) > 0.
  TripleSpec pos = scalar_triple(-1.0, 1.0, 1.0);
  auto rep1 = check_control_positivity(pos, {0.0, 0.5, 2.0});
  EXPECT_TRUE(rep1.positive);
  for (size_t k = 0; k < rep1.lambdas.size(); ++k)
    EXPECT_NEAR(rep1.min_entries[k], 1.0 / (rep1.lambdas[k] + 1.0), 1e-12);

  // Rank-one b with a negative node fails at every lambda.
  Rng rng(3);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 5, 1, 0.5, UTag::AM);
  Eigen::MatrixXd bad = rt.b;
  bad(2, 0) = -0.7;
  TripleSpec bad_triple = rt.triple;
  bad_triple.control = RegularizedControl::from_raw(
      *rt.triple.model, LinOp(rt.triple.u_space, rt.triple.state_space(), bad), rt.lambda0);
  auto rep2 = check_control_positivity(bad_triple, {0.0, 0.5, 2.0});
  EXPECT_FALSE(rep2.positive);
  for (double me : rep2.min_entries) EXPECT_LT(me, 0.0);
}

TEST(FeedbackSpectralRadius, ScalarValuesAndMonotoneBound) {
  TripleSpec zero_c = scalar_triple(-2.0, 1.0, 0.0);
  EXPECT_EQ(feedback_spectral_radius(zero_c, 0.0), 0.0);

  TripleSpec triple = scalar_triple(-2.0, 1.0, 1.0);
  EXPECT_NEAR(feedback_spectral_radius(triple, 0.0), 0.5, 1e-12);
  for (double lam : {0.5, 1.0, 3.0})
    EXPECT_LE(feedback_spectral_radius(triple, lam), 0.5 + 1e-12);
}

TEST(CheckHypotheses, ReportsNamedFailures) {
  TripleSpec triple = scalar_triple(-2.0, 1.0, 2.4, UTag::AM);  // r = 1.2
  auto rep = check_hypotheses(triple, TheoremKind::AM);
  ASSERT_FALSE(rep.all_passed());
  EXPECT_EQ(rep.first_failure()->name, "feedback_spectral_radius");
  EXPECT_NEAR(rep.first_failure()->value, 1.2, 1e-12);
  try {
    construct_perturbed(triple, TheoremKind::AM, {1.0, 100}, 1e-10);
    FAIL() << "expected HypothesisFailed";
  } catch (const HypothesisFailed& e) {
    EXPECT_EQ(e.which(), "feedback_spectral_radius");
    EXPECT_NE(std::string(e.what()).find(">= 1"), std::string::npos);
  }

  TripleSpec wrong_tag = scalar_triple(-2.0, 1.0, 1.0, UTag::AL);
  EXPECT_THROW(construct_perturbed(wrong_tag, TheoremKind::AM, {1.0, 100}, 1e-10),
               HypothesisFailed);

  TripleSpec neg_c = scalar_triple(-2.0, 1.0, -0.4, UTag::AM);
  try {
    construct_perturbed(neg_c, TheoremKind::AM, {1.0, 100}, 1e-10);
    FAIL() << "expected HypothesisFailed";
  } catch (const HypothesisFailed& e) {
    EXPECT_EQ(e.which(), "observation_positive");
  }
}

TEST(ConstructPerturbed, ZeroObservationReproducesTheSemigroup) {
  TripleSpec triple = scalar_triple(-2.0, 1.0, 0.0);
  PerturbedSemigroup s = construct_perturbed(triple, TheoremKind::AM, {2.0, 200}, 1e-10);
  for (double t : {0.0, 0.5, 1.0, 2.0})
    EXPECT_NEAR(s.at(t).matrix()(0, 0), std::exp(-2.0 * t), 1e-12);
  EXPECT_EQ(s.diagnostics().picard_iterations, 1);
}

TEST(ConstructPerturbed, ScalarClosedLoopOracle) {
  // A = -2, B = C = 1: A_BC = -1.
  TripleSpec triple = scalar_triple(-2.0, 1.0, 1.0);
  PerturbedSemigroup s = construct_perturbed(triple, TheoremKind::AM, {2.0, 2000}, 1e-10);
  EXPECT_NEAR(s.at(1.0).matrix()(0, 0), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(s.at(1.0).matrix()(0, 0), 0.36788, 1e-4);
  EXPECT_NEAR(s.at(0.0).matrix()(0, 0), 1.0, 1e-12);
  EXPECT_GE(s.diagnostics().min_stored_entry, -1e-9);

  // AL tagging gives the same construction for the bounded scalar triple.
  TripleSpec al = scalar_triple(-2.0, 1.0, 1.0, UTag::AL);
  PerturbedSemigroup s2 = construct_perturbed(al, TheoremKind::AL, {2.0, 2000}, 1e-10);
  EXPECT_NEAR(s2.at(1.0).matrix()(0, 0), std::exp(-1.0), 1e-6);
}

TEST(ConstructPerturbed, RandomPositiveTripleMatchesExponentialOracle) {
  Rng rng(2025);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 6, 6, 0.6, UTag::AM);
  TimeGridSpec grid{2.0, 2000};
  PerturbedSemigroup s =
      construct_perturbed(rt.triple, TheoremKind::AM, grid, 1e-10, {0.25, 0.5, 1.0, 2.0});
  Eigen::MatrixXd a_cl = rt.a + rt.b * rt.c;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    Eigen::MatrixXd oracle = oracles::expm_rk4(a_cl, t);
    EXPECT_LE((s.at(t).matrix() - oracle).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
  }
  EXPECT_GE(s.diagnostics().min_stored_entry, -1e-9);
  EXPECT_LE(s.diagnostics().picard_residual, 1e-9);
}

TEST(ConstructPerturbed, SemigroupLawOnDyadicLattice) {
  Rng rng(77);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 4, 3, 0.5, UTag::AM);
  PerturbedSemigroup s = construct_perturbed(rt.triple, TheoremKind::AM, {2.0, 2000}, 1e-10);
  for (double t : {0.25, 0.5, 1.0})
    for (double u : {0.25, 0.5, 1.0}) {
      Eigen::MatrixXd gap = s.at(t + u).matrix() - s.at(t).matrix() * s.at(u).matrix();
      EXPECT_LE(gap.cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(ConstructPerturbed, LaplaceTransformMatchesFactorizedResolvent) {
  Rng rng(31);
  oracles::RandomTriple rt =
      oracles::make_random_positive_triple(rng, 4, 2, 0.5, UTag::AM, 0.3, 0.8, 1.4);
  TimeGridSpec grid{24.0, 4800};
  PerturbedSemigroup s = construct_perturbed(rt.triple, TheoremKind::AM, grid, 1e-10);
  Eigen::VectorXd x = rng.uniform_vec(4, 0.2, 1.0);
  auto traj_space = GridSpace::vector_space(4, NormKind::Sup);
  for (double lam : {0.5, 1.0, 2.0}) {
    Eigen::MatrixXd vals(4, s.grid_times().size());
    for (Eigen::Index i = 0; i < s.grid_times().size(); ++i)
      vals.col(i) = s.at(s.grid_times()[i]).matrix() * x;
    TimeGridFn traj(s.grid_times(), vals, traj_space);
    Eigen::VectorXd lhs = laplace_transform(traj, lam);
    Eigen::VectorXd rhs = resolvent_factorization(rt.triple, lam).apply(x);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff(), 1e-3)
        << "lambda=" << lam;
  }
}

TEST(ResolventFactorization, ClosedFormsAndDirectInverse) {
  TripleSpec zero_c = scalar_triple(-2.0, 1.0, 0.0);
  EXPECT_NEAR(resolvent_factorization(zero_c, 1.0).matrix()(0, 0), 1.0 / 3.0, 1e-12);

  // Scalar A=-2, B=C=1, lambda=1: R = 1/3 + (1/3)(1 - 1/3)^{-1}(1/3) = 1/2.
  TripleSpec triple = scalar_triple(-2.0, 1.0, 1.0);
  EXPECT_NEAR(resolvent_factorization(triple, 1.0).matrix()(0, 0), 0.5, 1e-12);

  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(2, 7);
    const int m = rng.uniform_int(1, n);
    oracles::RandomTriple rt =
        oracles::make_random_positive_triple(rng, n, m, rng.uniform(0.2, 0.8), UTag::AM);
    for (double lam : {0.5, 1.5}) {
      Eigen::MatrixXd direct =
          (lam * Eigen::MatrixXd::Identity(n, n) - (rt.a + rt.b * rt.c))
              .partialPivLu()
              .solve(Eigen::MatrixXd::Identity(n, n));
      EXPECT_LE(
          (resolvent_factorization(rt.triple, lam).matrix() - direct).cwiseAbs().maxCoeff(),
          1e-8);
    }
  }

  TripleSpec unstable = scalar_triple(-2.0, 1.0, 2.4);
  EXPECT_THROW(resolvent_factorization(unstable, 0.1), HypothesisFailed);
}

TEST(VpResidual, SelfConsistencyAndOracleSubstitution) {
  TripleSpec zero_c = scalar_triple(-2.0, 1.0, 0.0);
  PerturbedSemigroup s0 = construct_perturbed(zero_c, TheoremKind::AM, {2.0, 500}, 1e-10);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  EXPECT_LE(vp_residual(s0, zero_c, one, 1.0), 1e-12);

  TripleSpec triple = scalar_triple(-2.0, 1.0, 1.0);
  PerturbedSemigroup s = construct_perturbed(triple, TheoremKind::AM, {2.0, 2000}, 1e-10);
  EXPECT_LE(vp_residual(s, triple, one, 1.0), 1e-8);

  // Plugging the exponential oracle into the formula leaves only the
  // quadrature error.
  Rng rng(5);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 5, 2, 0.5, UTag::AM);
  Eigen::MatrixXd a_cl = rt.a + rt.b * rt.c;
  TimeGridSpec grid{1.0, 1000};
  Eigen::VectorXd times = grid.times();
  Eigen::VectorXd x = rng.uniform_vec(5, 0.0, 1.0);
  Eigen::MatrixXd cs(2, times.size());
  for (Eigen::Index i = 0; i < times.size(); ++i)
    cs.col(i) = rt.c * (oracles::expm_rk4(a_cl, times[i], 200) * x);
  TimeGridFn traj(times, cs, rt.triple.u_space);
  Eigen::VectorXd lhs = oracles::expm_rk4(a_cl, 1.0) * x;
  Eigen::VectorXd rhs = rt.triple.model->evaluate(1.0).apply(x) +
                        controllability_map(rt.triple, traj, 1.0).values;
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ConstructDominated, TrivialSplitReproducesThePositiveSystem) {
  Rng rng(42);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 4, 2, 0.5, UTag::AM);
  DominatingSplit split{rt.triple.control.b_reg,
                        LinOp::zero(rt.triple.u_space, rt.triple.state_space()),
                        rt.triple.control.raw,
                        LinOp::zero(rt.triple.u_space, rt.triple.state_space()),
                        rt.triple.observation};
  TimeGridSpec grid{1.0, 1000};
  DominatedPair pair = construct_dominated(rt.triple, split, grid, 1e-10, rng, TheoremKind::AM);
  for (double t : {0.5, 1.0})
    EXPECT_LE((pair.s.at(t).matrix() - pair.s_tilde.at(t).matrix()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(pair.max_time_excess, 1e-8);
  EXPECT_LE(pair.max_resolvent_excess, 1e-8);
}

TEST(ConstructDominated, ScalarSignedControl) {
  // A=-2, C=1, B=-1: A_BC = -3; tilde system has B~ = 1, closed loop -1.
  auto sx = GridSpace::vector_space(1, NormKind::Sup);
  auto su = GridSpace::vector_space(1, NormKind::Sup);
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << -2.0;
  b << -1.0;
  c << 1.0;
  ModelPtr model = SemigroupModel::matrix_exp(LinOp(sx, sx, a));
  TripleSpec triple;
  triple.model = model;
  triple.control = RegularizedControl::from_raw(*model, LinOp(su, sx, b), -1.0);
  triple.observation = LinOp(sx, su, c);
  triple.u_space = su;
  triple.u_tag = UTag::AM;

  Eigen::MatrixXd zero1 = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd one1 = Eigen::MatrixXd::Ones(1, 1);
  DominatingSplit split{RegularizedControl::from_raw(*model, LinOp(su, sx, zero1), -1.0).b_reg,
                        RegularizedControl::from_raw(*model, LinOp(su, sx, one1), -1.0).b_reg,
                        LinOp(su, sx, zero1), LinOp(su, sx, one1), LinOp(sx, su, c)};
  Rng rng(9);
  TimeGridSpec grid{1.0, 1000};
  DominatedPair pair = construct_dominated(triple, split, grid, 1e-10, rng, TheoremKind::AM);
  for (double t : {0.5, 1.0}) {
    EXPECT_NEAR(pair.s.at(t).matrix()(0, 0), std::exp(-3.0 * t), 1e-8);
    EXPECT_NEAR(pair.s_tilde.at(t).matrix()(0, 0), std::exp(-1.0 * t), 1e-6);
    EXPECT_LE(std::abs(pair.s.at(t).matrix()(0, 0)), pair.s_tilde.at(t).matrix()(0, 0));
  }
}

TEST(ConstructDominated, RandomSignedSplitsDominateEntrywise) {
  Rng rng(88);
  for (int trial = 0; trial < 5; ++trial) {
    oracles::SignedTriple st = oracles::make_random_signed_triple(rng, 5, 3, 0.6);
    TimeGridSpec grid{1.0, 1000};
    DominatedPair pair =
        construct_dominated(st.triple, st.split, grid, 1e-10, rng, TheoremKind::AM);
    EXPECT_LE(pair.max_time_excess, 1e-8);
    EXPECT_LE(pair.max_resolvent_excess, 1e-8);
    // Exponential oracle on both closed loops.
    Eigen::MatrixXd a_signed = st.a + st.b * st.c;
    for (double t : {0.5, 1.0}) {
      Eigen::MatrixXd oracle = oracles::expm_rk4(a_signed, t);
      EXPECT_LE((pair.s.at(t).matrix() - oracle).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LE((oracle.cwiseAbs() - pair.s_tilde.at(t).matrix()).maxCoeff(), 1e-6);
    }
  }
}

TEST(WLemma, EqualitiesForTrivialSplitAndInequalitiesForSigned) {
  Rng rng(17);
  oracles::RandomTriple rt = oracles::make_random_positive_triple(rng, 4, 2, 0.5, UTag::AM);
  DominatingSplit trivial{rt.triple.control.b_reg,
                          LinOp::zero(rt.triple.u_space, rt.triple.state_space()),
                          rt.triple.control.raw,
                          LinOp::zero(rt.triple.u_space, rt.triple.state_space()),
                          rt.triple.observation};
  for (const auto& row : wlemma_inequality_check(rt.triple, trivial, {0.5, 1.0, 2.0})) {
    EXPECT_TRUE(row.ok);
    EXPECT_NEAR(row.c_resolvent_slack, 0.0, 1e-12);
    EXPECT_NEAR(row.control_slack, 0.0, 1e-12);
    EXPECT_NEAR(row.feedback_norm_slack, 0.0, 1e-12);
  }

  for (int trial = 0; trial < 20; ++trial) {
    oracles::SignedTriple st = oracles::make_random_signed_triple(rng, 5, 2, 0.7);
    for (const auto& row : wlemma_inequality_check(st.triple, st.split, {0.5, 1.0, 2.0}))
      EXPECT_TRUE(row.ok);
  }
}

TEST(HypothesisNecessity, GrowingFeedbackBreaksTheConstruction) {
  // Scaling C upward until r crosses 1 surfaces as a failed hypothesis in
  // the constructor and as divergence in the raw fixed-point iteration.
  TripleSpec triple = scalar_triple(-2.0, 1.0, 2.6);  // r = 1.3
  EXPECT_THROW(construct_perturbed(triple, TheoremKind::AM, {4.0, 400}, 1e-10),
               HypothesisFailed);
  EXPECT_THROW(
      detail::construct_vp_unchecked(triple, {10.0, 1000}, 1e-10, {}, PerturbedDiagnostics{}),
      DivergentIteration);
}
