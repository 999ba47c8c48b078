#include "semilat/lattice.hpp"

#include <cmath>

namespace semilat {

GridSpace::GridSpace(Eigen::VectorXd nodes, Eigen::VectorXd weights, double a, double b,
                     NormKind kind, double p)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), a_(a), b_(b), kind_(kind), p_(p) {
  if (nodes_.size() == 0 || nodes_.size() != weights_.size())
    throw Error("GridSpace: dim mismatch between nodes and weights");
  for (Eigen::Index i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw Error("GridSpace: nodes must be ascending");
  if (weights_.minCoeff() < 0.0) throw Error("GridSpace: negative quadrature weight");
  if (kind_ == NormKind::Lp && !(p_ > 1.0)) throw Error("GridSpace: Lp requires p > 1");
  if (kind_ != NormKind::Sup) {
    const double mass = weights_.sum();
    if (std::abs(mass - (b_ - a_)) > 1e-12 * std::max(1.0, std::abs(b_ - a_)))
      throw Error("GridSpace: weights must sum to the interval length");
  }
}

std::shared_ptr<const GridSpace> GridSpace::uniform_trapezoid(int dim, double a, double b,
                                                              NormKind kind, double p) {
  Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(dim, a, b);
  const double h = (b - a) / (dim - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(dim, h);
  w[0] = h / 2.0;
  w[dim - 1] = h / 2.0;
  return std::make_shared<GridSpace>(std::move(nodes), std::move(w), a, b, kind, p);
}

std::shared_ptr<const GridSpace> GridSpace::uniform_midpoint(int dim, double a, double b,
                                                             NormKind kind, double p) {
  const double h = (b - a) / dim;
  Eigen::VectorXd nodes(dim);
  for (int i = 0; i < dim; ++i) nodes[i] = a + (i + 0.5) * h;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(dim, h);
  return std::make_shared<GridSpace>(std::move(nodes), std::move(w), a, b, kind, p);
}

std::shared_ptr<const GridSpace> GridSpace::vector_space(int dim, NormKind kind, double p) {
  Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(dim, 0.0, dim - 1.0);
  if (dim == 1) nodes[0] = 0.0;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(dim);
  // Interval is a label; length dim keeps the weight-sum invariant.
  return std::make_shared<GridSpace>(std::move(nodes), std::move(w), -0.5, dim - 0.5, kind, p);
}

double GridSpace::norm(const Eigen::VectorXd& values) const {
  if (values.size() != nodes_.size()) throw SpaceMismatch("norm: dimension mismatch");
  switch (kind_) {
    case NormKind::L1:
      return weights_.dot(values.cwiseAbs());
    case NormKind::Lp:
      return std::pow(weights_.dot(values.cwiseAbs().array().pow(p_).matrix()), 1.0 / p_);
    case NormKind::Sup:
      return values.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

bool GridSpace::same_geometry(const GridSpace& other) const {
  return dim() == other.dim() && nodes_.isApprox(other.nodes_, 1e-14) &&
         weights_.isApprox(other.weights_, 1e-14) && std::abs(a_ - other.a_) < 1e-14 &&
         std::abs(b_ - other.b_) < 1e-14;
}

bool GridSpace::same_space(const GridSpace& other) const {
  return same_geometry(other) && kind_ == other.kind_ &&
         (kind_ != NormKind::Lp || std::abs(p_ - other.p_) < 1e-14);
}

LatticeDecomposition lattice_decompose(const LatticeVector& x) {
  LatticeDecomposition d;
  d.pos = {x.space, x.values.cwiseMax(0.0)};
  d.neg = {x.space, (-x.values).cwiseMax(0.0)};
  d.abs = {x.space, x.values.cwiseAbs()};
  return d;
}

SupInfPair lattice_sup_inf(const LatticeVector& x, const LatticeVector& y) {
  if (!x.space || !y.space || !x.space->same_space(*y.space))
    throw SpaceMismatch("lattice_sup_inf: operands live in different spaces");
  return {{x.space, x.values.cwiseMax(y.values)}, {x.space, x.values.cwiseMin(y.values)}};
}

AxiomProbeReport lattice_axiom_probe(const SpacePtr& space, int trials, Rng& rng) {
  if (trials < 1) throw Error("lattice_axiom_probe: trials must be >= 1");
  const int n = space->dim();
  double al = 0.0, am = 0.0;

  auto probe = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double nx = space->norm(x);
    const double ny = space->norm(y);
    al = std::max(al, std::abs(space->norm(x + y) - nx - ny));
    am = std::max(am, std::abs(space->norm(x.cwiseMax(y)) - std::max(nx, ny)));
  };

  // Disjointly supported basis pairs expose the AL defect of Lp norms.
  if (n >= 2) {
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e0[0] = 1.0;
    e1[n - 1] = 1.0;
    probe(e0, e1);
    probe(3.0 * e0, 3.0 * e1);
  }
  for (int t = 0; t < trials; ++t)
    probe(rng.uniform_vec(n, 0.0, 1.0), rng.uniform_vec(n, 0.0, 1.0));
  return {al, am};
}

SpacePtr retag(const SpacePtr& space, NormKind kind, double p) {
  if (space->norm_kind() == kind && (kind != NormKind::Lp || std::abs(space->p() - p) < 1e-14))
    return space;
  return std::make_shared<GridSpace>(space->nodes(), space->weights(), space->interval_a(),
                                     space->interval_b(), kind, p);
}

}  // namespace semilat
