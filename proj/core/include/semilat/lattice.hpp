#pragma once

#include <Eigen/Core>
#include <memory>

#include "semilat/errors.hpp"
#include "semilat/rng.hpp"

namespace semilat {

enum class NormKind { L1, Lp, Sup };

/// A discretized function space: grid nodes on an interval, quadrature
/// weights and a norm family. Sup-tagged spaces model C_0 / L^inf (AM type),
/// L1-tagged spaces model L^1 (AL type). R^N with unit weights doubles as
/// the control space U, tagged |.|_1 or |.|_inf.
class GridSpace {
public:
  GridSpace(Eigen::VectorXd nodes, Eigen::VectorXd weights, double a, double b,
            NormKind kind, double p = 2.0);

  /// Uniform grid on [a,b] with trapezoid weights (endpoints half-weighted).
  static std::shared_ptr<const GridSpace> uniform_trapezoid(int dim, double a, double b,
                                                            NormKind kind, double p = 2.0);
  /// Midpoint cells: nodes at cell centers, each weighted by the cell width.
  static std::shared_ptr<const GridSpace> uniform_midpoint(int dim, double a, double b,
                                                           NormKind kind, double p = 2.0);
  /// R^N with unit weights; nodes are index labels.
  static std::shared_ptr<const GridSpace> vector_space(int dim, NormKind kind, double p = 2.0);

  int dim() const { return static_cast<int>(nodes_.size()); }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  NormKind norm_kind() const { return kind_; }
  double p() const { return p_; }
  double interval_a() const { return a_; }
  double interval_b() const { return b_; }

  double norm(const Eigen::VectorXd& values) const;

  /// Same nodes, weights and interval (norm tags may differ).
  bool same_geometry(const GridSpace& other) const;
  /// Same geometry and same norm tag.
  bool same_space(const GridSpace& other) const;

private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  double a_, b_;
  NormKind kind_;
  double p_;
};

using SpacePtr = std::shared_ptr<const GridSpace>;

struct LatticeVector {
  SpacePtr space;
  Eigen::VectorXd values;

  double norm() const { return space->norm(values); }
};

struct LatticeDecomposition {
  LatticeVector pos;
  LatticeVector neg;
  LatticeVector abs;
};

/// x = pos - neg and abs = pos + neg, componentwise exactly.
LatticeDecomposition lattice_decompose(const LatticeVector& x);

struct SupInfPair {
  LatticeVector sup;
  LatticeVector inf;
};

/// Componentwise max/min; throws SpaceMismatch on incompatible spaces.
SupInfPair lattice_sup_inf(const LatticeVector& x, const LatticeVector& y);

struct AxiomProbeReport {
  double al_residual;  // max |(||x+y|| - ||x|| - ||y||)| over nonnegative pairs
  double am_residual;  // max |(||sup(x,y)|| - max(||x||,||y||))|
};

/// Randomized probe of the AL/AM norm axioms on nonnegative pairs. The
/// probe set always contains scaled basis pairs so that Lp spaces expose a
/// visible AL violation.
AxiomProbeReport lattice_axiom_probe(const SpacePtr& space, int trials, Rng& rng);

/// Same geometry, different norm tag.
SpacePtr retag(const SpacePtr& space, NormKind kind, double p = 2.0);

}  // namespace semilat
