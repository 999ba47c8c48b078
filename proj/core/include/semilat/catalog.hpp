#pragma once

#include <functional>

#include "semilat/perturbation.hpp"

namespace semilat {

/// I(lambda, alpha) = int_0^1 lambda^{-1} x^{-alpha} (1 - e^{-lambda x}) dx,
/// the decay certificate for the first-derivative convolution example.
/// Series near the singular endpoint plus adaptive Simpson elsewhere.
/// Throws BadAlpha outside alpha in [1, 2).
double conv_decay_certificate(double lambda, double alpha);

struct ConvC0Config {
  int grid_n = 200;
  double alpha = 1.5;
  std::function<double(double)> b_kernel;  // bounded kernel on [0, 1]
  std::vector<double> lambda_sweep{1.0, 2.0, 5.0, 10.0, 50.0, 100.0};
};

struct ConvC0Build {
  TripleSpec triple;
  double alpha;
  bool signed_data;
  std::optional<DominatingSplit> split;  // present when the kernel is signed
  /// Exact Sup->L1 norm of C R(lambda, A) on the grid; one-sided below the
  /// continuum certificate by construction.
  std::function<double(double)> cr_norm;
};

/// State space C_0(0,1] proxy (node 0 excluded, sup norm), U = L1[0,1],
/// A = -d/dx as the nilpotent right shift, B = convolution with b,
/// C = diag(x^{-alpha}).
ConvC0Build build_conv_c0(const ConvC0Config& config);

struct RankOneConfig {
  int grid_n = 200;
  double p = 2.0;
  std::function<double(double)> b;            // L1 kernel for B alpha = alpha*b
  std::function<double(double)> phi_density;  // Phi(f) = int phi_density * f
};

struct RankOneBuild {
  TripleSpec triple;
  bool signed_data;
  std::optional<DominatingSplit> split;  // present for signed Phi or b
  SubspaceReport host_consistency;       // L1 host vs Lp state, same grid
  /// lambda -> Phi R(lambda, A) b on the grid.
  std::function<double(double)> feedback_map;
};

/// State space L^p[0,1], U = R, A = d/dx as the nilpotent left shift,
/// B alpha = alpha * b with b hosted on the L1 grid, C = Phi.
RankOneBuild build_rank_one_lp(const RankOneConfig& config);

}  // namespace semilat
