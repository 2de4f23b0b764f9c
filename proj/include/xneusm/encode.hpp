#pragma once

#include <vector>

#include "xneusm/graph.hpp"

namespace xneusm {

/// Unified proxy input for a (pattern, target) pair. Index space is pattern
/// nodes [0, pattern_count) followed by target nodes [pattern_count, n).
/// x is one-hot over 2*t_v columns (pattern labels in [0, t_v), target labels
/// in [t_v, 2*t_v)); a_in flags intra-graph edges only; a_cr additionally
/// connects cross-graph pairs with equal labels, symmetrically. All matrices
/// are dense row-major.
struct JointInput {
  int pattern_count = 0;
  int n = 0;
  int t_v = 0;
  bool directed = false;
  std::vector<double> x;     // n x 2*t_v
  std::vector<double> a_in;  // n x n
  std::vector<double> a_cr;  // n x n

  double x_at(int r, int c) const { return x[static_cast<std::size_t>(r) * 2 * t_v + c]; }
  double in_at(int r, int c) const { return a_in[static_cast<std::size_t>(r) * n + c]; }
  double cr_at(int r, int c) const { return a_cr[static_cast<std::size_t>(r) * n + c]; }
};

/// Throws Error(label_out_of_range) when a node label is >= t_v and
/// Error(domain_error) when the two graphs disagree on directedness.
JointInput encode_pair(const Graph& pattern, const Graph& target, int t_v);

}  // namespace xneusm
