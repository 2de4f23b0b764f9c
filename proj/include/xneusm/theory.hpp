#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

namespace xneusm {

/// Truncation-error check for uniform-teleport diffusion: builds a random
/// row-stochastic masked attention matrix, recovers the implied diffusion
/// operators at horizons K and `horizon` by acting on the identity feature
/// matrix, and compares their mean absolute entrywise deviation against the
/// analytic bound (1-alpha)^(K+1).
struct BoundCheck {
  double empirical_err = 0.0;
  double bound = 0.0;
  bool pass = false;
};

BoundCheck check_error_bound(int graph_size, double alpha, int hops, int horizon,
                             std::uint64_t seed);

/// Per-node diffusion with beta identically alpha must match the uniform
/// recurrence; returns the max absolute difference over K steps.
double uniform_reduction_gap(int graph_size, double alpha, int hops, std::uint64_t seed);

/// Heterogeneous-teleport convergence: iterates the recurrence to `horizon`,
/// reports the worst successive deviation ratio toward the final iterate (the
/// empirical contraction factor), its analytic ceiling max(1-beta), and the
/// fixed-point residual of the final iterate.
struct FixedPointCheck {
  double contraction_ratio = 0.0;
  double ratio_bound = 0.0;
  double residual = 0.0;
  bool pass = false;
};

FixedPointCheck check_fixed_point(int graph_size, std::uint64_t seed, double tolerance,
                                  double beta_lo = 0.2, double beta_hi = 0.8,
                                  int horizon = 200);

/// CSV sweep `alpha,K,bound,empirical_err` suitable for replotting the
/// approximation-error curve.
void emit_bound_curve(const std::vector<double>& alphas, const std::vector<int>& hop_grid,
                      std::ostream& out, int graph_size = 30, int horizon = 500,
                      std::uint64_t seed = 7);

/// Batch form of check_error_bound over many random graphs, sharing one
/// reference run per (graph, alpha) by snapshotting the truncation at each
/// requested hop count.
struct BoundSweep {
  int checked = 0;
  int passed = 0;
  double worst_excess = -1e300;  // max of empirical_err - bound
};

BoundSweep bound_sweep(int n_graphs, int max_graph_size, const std::vector<double>& alphas,
                       const std::vector<int>& hop_grid, int horizon, std::uint64_t seed);

}  // namespace xneusm
