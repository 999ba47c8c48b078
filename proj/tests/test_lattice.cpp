#include <gtest/gtest.h>

#include <cmath>

#include "semilat/lattice.hpp"

using namespace semilat;

namespace {

LatticeVector vec(const SpacePtr& space, std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return {space, v};
}

}  // namespace

TEST(GridSpace, InvariantsEnforced) {
  auto s = GridSpace::uniform_trapezoid(5, 0.0, 1.0, NormKind::L1);
  EXPECT_EQ(s->dim(), 5);
  EXPECT_NEAR(s->weights().sum(), 1.0, 1e-14);
  EXPECT_THROW(GridSpace(Eigen::VectorXd::LinSpaced(3, 0, 1), Eigen::VectorXd::Ones(3), 0.0, 1.0,
                         NormKind::L1),
               Error);  // weights sum 3 != 1
  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;  // descending
  EXPECT_THROW(GridSpace(bad, Eigen::VectorXd::Constant(2, 0.5), 0.0, 1.0, NormKind::L1), Error);
}

TEST(Decompose, ZeroCase) {
  auto s = GridSpace::vector_space(3, NormKind::Sup);
  auto d = lattice_decompose(vec(s, {0, 0, 0}));
  EXPECT_EQ(d.pos.values.norm(), 0.0);
  EXPECT_EQ(d.neg.values.norm(), 0.0);
  EXPECT_EQ(d.abs.values.norm(), 0.0);
}

TEST(Decompose, ForcedByDefinition) {
  auto s = GridSpace::vector_space(2, NormKind::Sup);
  auto d = lattice_decompose(vec(s, {1, -2}));
  EXPECT_EQ(d.pos.values[0], 1.0);
  EXPECT_EQ(d.pos.values[1], 0.0);
  EXPECT_EQ(d.neg.values[0], 0.0);
  EXPECT_EQ(d.neg.values[1], 2.0);
  EXPECT_EQ(d.abs.values[0], 1.0);
  EXPECT_EQ(d.abs.values[1], 2.0);
}

TEST(Decompose, RandomAgainstComponentwiseOracle) {
  auto s = GridSpace::vector_space(17, NormKind::Sup);
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    LatticeVector x{s, rng.uniform_vec(17, -2.0, 2.0)};
    auto d = lattice_decompose(x);
    for (int i = 0; i < 17; ++i) {
      EXPECT_EQ(d.pos.values[i], std::max(x.values[i], 0.0));
      EXPECT_EQ(d.neg.values[i], std::max(-x.values[i], 0.0));
      EXPECT_EQ(d.pos.values[i] - d.neg.values[i], x.values[i]);
      EXPECT_EQ(d.pos.values[i] + d.neg.values[i], d.abs.values[i]);
      EXPECT_GE(d.pos.values[i], 0.0);
    }
  }
}

TEST(SupInf, IdempotenceAndForcedValues) {
  auto s = GridSpace::vector_space(2, NormKind::Sup);
  auto x = vec(s, {1, 4});
  auto y = vec(s, {3, 2});
  auto same = lattice_sup_inf(x, x);
  EXPECT_EQ(same.sup.values, x.values);
  EXPECT_EQ(same.inf.values, x.values);
  auto p = lattice_sup_inf(x, y);
  EXPECT_EQ(p.sup.values[0], 3.0);
  EXPECT_EQ(p.sup.values[1], 4.0);
  EXPECT_EQ(p.inf.values[0], 1.0);
  EXPECT_EQ(p.inf.values[1], 2.0);
}

TEST(SupInf, SumIdentityAndSpaceMismatch) {
  auto s = GridSpace::vector_space(9, NormKind::L1);
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    LatticeVector x{s, rng.uniform_vec(9, -1.0, 1.0)};
    LatticeVector y{s, rng.uniform_vec(9, -1.0, 1.0)};
    auto p = lattice_sup_inf(x, y);
    EXPECT_LT((p.sup.values + p.inf.values - x.values - y.values).cwiseAbs().maxCoeff(), 1e-15);
  }
  auto other = GridSpace::vector_space(9, NormKind::Sup);
  EXPECT_THROW(lattice_sup_inf({s, Eigen::VectorXd::Zero(9)}, {other, Eigen::VectorXd::Zero(9)}),
               SpaceMismatch);
}

TEST(Norms, TrivialAndWeightedValues) {
  for (NormKind kind : {NormKind::L1, NormKind::Lp, NormKind::Sup}) {
    auto s = GridSpace::uniform_trapezoid(11, 0.0, 1.0, kind);
    EXPECT_EQ(s->norm(Eigen::VectorXd::Zero(11)), 0.0);
  }
  auto l1 = GridSpace::uniform_trapezoid(33, 0.0, 1.0, NormKind::L1);
  EXPECT_NEAR(l1->norm(Eigen::VectorXd::Ones(33)), 1.0, 1e-14);

  // x = (3,4), weights (1/2, 1/2), L2: sqrt(0.5*9 + 0.5*16) = sqrt(12.5).
  Eigen::VectorXd nodes(2), w(2), x(2);
  nodes << 0.0, 1.0;
  w << 0.5, 0.5;
  x << 3.0, 4.0;
  GridSpace two(nodes, w, 0.0, 1.0, NormKind::Lp, 2.0);
  EXPECT_NEAR(two.norm(x), std::sqrt(12.5), 1e-14);
  EXPECT_NEAR(two.norm(x), 3.5355339059327378, 1e-12);
}

TEST(Norms, LatticePropertyAndMonotonicity) {
  Rng rng(55);
  for (NormKind kind : {NormKind::L1, NormKind::Lp, NormKind::Sup}) {
    auto s = GridSpace::uniform_trapezoid(21, 0.0, 2.0, kind, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
      Eigen::VectorXd x = rng.uniform_vec(21, -1.0, 1.0);
      EXPECT_DOUBLE_EQ(s->norm(x), s->norm(x.cwiseAbs()));
      // Dominated pair: |x| <= |y| componentwise implies ||x|| <= ||y||.
      Eigen::VectorXd y = x.cwiseAbs() + rng.uniform_vec(21, 0.0, 0.5);
      EXPECT_LE(s->norm(x), s->norm(y) + 1e-15);
    }
  }
}

TEST(Norms, TrapezoidRefinementIsSecondOrder) {
  // L1 norm of f(x) = x^2 on [0,1]; exact integral 1/3. Halving the mesh
  // must shrink the quadrature error by ~4.
  auto value = [](int dim) {
    auto s = GridSpace::uniform_trapezoid(dim, 0.0, 1.0, NormKind::L1);
    Eigen::VectorXd f = s->nodes().array().square();
    return s->norm(f);
  };
  const double exact = 1.0 / 3.0;
  const double e1 = std::abs(value(33) - exact);
  const double e2 = std::abs(value(65) - exact);
  const double e3 = std::abs(value(129) - exact);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
  EXPECT_GT(e2 / e3, 3.5);
  EXPECT_LT(e2 / e3, 4.5);
}

TEST(AxiomProbe, AlAndAmSpacesSatisfyTheirAxioms) {
  Rng rng(2024);
  auto l1 = GridSpace::uniform_trapezoid(15, 0.0, 1.0, NormKind::L1);
  auto probe_l1 = lattice_axiom_probe(l1, 100, rng);
  EXPECT_LE(probe_l1.al_residual, 1e-12);

  auto sup = GridSpace::vector_space(15, NormKind::Sup);
  auto probe_sup = lattice_axiom_probe(sup, 100, rng);
  EXPECT_LE(probe_sup.am_residual, 1e-12);
}

TEST(AxiomProbe, L2ViolatesAdditivity) {
  Rng rng(9);
  auto l2 = GridSpace::uniform_trapezoid(15, 0.0, 1.0, NormKind::Lp, 2.0);
  auto probe = lattice_axiom_probe(l2, 100, rng);
  // Disjoint basis pair: ||e0 + e1|| = sqrt(2) * ||e0|| in any L2 space.
  EXPECT_GT(probe.al_residual, 0.01);
}

TEST(Retag, PreservesGeometry) {
  auto s = GridSpace::uniform_trapezoid(8, 0.0, 1.0, NormKind::L1);
  auto t = retag(s, NormKind::Sup);
  EXPECT_TRUE(s->same_geometry(*t));
  EXPECT_EQ(t->norm_kind(), NormKind::Sup);
  EXPECT_EQ(retag(s, NormKind::L1).get(), s.get());
}
