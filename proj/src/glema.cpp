#include "xneusm/glema.hpp"

#include "xneusm/error.hpp"

namespace xneusm {

using ad::Tensor;

Tensor one_hop_attention(const Tensor& xp, const Tensor& mask, const Tensor& w_e,
                         bool directed, double leaky_slope) {
  Tensor scores = ad::matmul_nt(ad::matmul(xp, w_e), xp);  // scores[i][j] = xp_i' W_e xp_j
  if (!directed) scores = ad::add(scores, ad::transpose(scores));
  return ad::masked_softmax_rows(ad::leaky_relu(scores, leaky_slope), mask);
}

Tensor learn_teleport(const Tensor& xp, const Tensor& a1, const Tensor& w_beta,
                      const Tensor& b_beta) {
  Tensor mixed = ad::concat_cols(xp, ad::matmul(a1, xp));
  return ad::sigmoid(ad::add_broadcast_scalar(ad::matmul(mixed, w_beta), b_beta));
}

Tensor diffuse(const Tensor& a1, const Tensor& xp, const Tensor& beta, int hops) {
  if (hops < 0) fail(Errc::domain_error, "negative hop count");
  if (hops == 0) return xp;
  Tensor retain = ad::sub(Tensor::filled(beta.rows(), 1, 1.0), beta);  // 1 - beta
  Tensor teleport = ad::rowwise_scale(beta, xp);                       // invariant over k
  Tensor z = xp;
  for (int k = 0; k < hops; ++k) {
    z = ad::add(ad::rowwise_scale(retain, ad::matmul(a1, z)), teleport);
  }
  return z;
}

GlemaOutput glema_forward(const Tensor& x, const Tensor& mask, const GlemaLayerParams& params,
                          int hops, bool directed) {
  if (params.heads.empty()) fail(Errc::domain_error, "layer with no heads");
  GlemaOutput out;
  Tensor merged;
  for (const auto& head : params.heads) {
    Tensor xp = ad::matmul_nt(x, head.w_h);
    Tensor a1 = one_hop_attention(xp, mask, head.w_e, directed, params.leaky_slope);
    Tensor beta = learn_teleport(xp, a1, head.w_beta, head.b_beta);
    Tensor z = ad::leaky_relu(diffuse(a1, xp, beta, hops), params.leaky_slope);
    merged = merged.defined() ? ad::concat_cols(merged, z) : z;
    out.attention.push_back(a1);
  }
  out.x_hat = ad::matmul(merged, params.w_o);
  return out;
}

}  // namespace xneusm
