#pragma once

#include <vector>

#include "xneusm/tensor.hpp"

namespace xneusm {

/// Per-head parameters of a graph learnable multi-hop attention layer.
struct GlemaHeadParams {
  ad::Tensor w_h;     // F' x F projection
  ad::Tensor w_e;     // F' x F' attention bilinear form
  ad::Tensor w_beta;  // 2F' x 1 teleport weights
  ad::Tensor b_beta;  // 1 x 1 teleport bias
};

struct GlemaLayerParams {
  std::vector<GlemaHeadParams> heads;
  ad::Tensor w_o;  // (H*F') x F' output projection
  double leaky_slope = 0.2;
};

struct GlemaOutput {
  ad::Tensor x_hat;                   // N x F'
  std::vector<ad::Tensor> attention;  // per head, N x N row-stochastic on mask
};

/// Edge-masked 1-hop attention. Coefficients come from the bilinear form
/// xp_i' W_e xp_j (symmetrized when undirected), pass through a leaky
/// rectifier and a masked row softmax; masked entries are zero and a fully
/// masked row is all zeros.
ad::Tensor one_hop_attention(const ad::Tensor& xp, const ad::Tensor& mask,
                             const ad::Tensor& w_e, bool directed, double leaky_slope);

/// Per-node teleport probabilities: sigmoid((xp || a1*xp) w_beta + b),
/// strictly inside (0,1) for finite input.
ad::Tensor learn_teleport(const ad::Tensor& xp, const ad::Tensor& a1,
                          const ad::Tensor& w_beta, const ad::Tensor& b_beta);

/// K steps of the teleport recurrence
///   Z0 = xp,  Zk = (1-beta) o (a1 Zk-1) + beta o Z0
/// where o scales row v by the node's coefficient. K = 0 returns xp.
ad::Tensor diffuse(const ad::Tensor& a1, const ad::Tensor& xp, const ad::Tensor& beta,
                   int hops);

/// Full layer: project, attend, learn teleports, diffuse, then combine heads
/// through the leaky rectifier and the output projection. The per-head
/// attention matrices are returned for the explanation pipeline.
GlemaOutput glema_forward(const ad::Tensor& x, const ad::Tensor& mask,
                          const GlemaLayerParams& params, int hops, bool directed);

}  // namespace xneusm
