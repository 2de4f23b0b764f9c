#include "xneusm/glema.hpp"

#include <doctest.h>

#include <cmath>

#include "xneusm/rng.hpp"

using namespace xneusm;
using ad::Tensor;

namespace {

Tensor rand_tensor(Rng& rng, int r, int c, double scale = 1.0) {
  std::vector<double> d(static_cast<std::size_t>(r) * c);
  for (auto& x : d) x = rng.uniform(-scale, scale);
  return Tensor::constant(r, c, std::move(d));
}

Tensor ring_mask(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    m[static_cast<std::size_t>(i) * n + j] = 1.0;
    m[static_cast<std::size_t>(j) * n + i] = 1.0;
  }
  return Tensor::constant(n, n, std::move(m));
}

}  // namespace

TEST_CASE("attention of a node with one neighbour is 1") {
  Rng rng(1);
  const int n = 3;
  // Node 0 only neighbours node 1.
  const Tensor mask = Tensor::constant(n, n, {0, 1, 0, 1, 0, 1, 0, 1, 0});
  const Tensor xp = rand_tensor(rng, n, 4);
  const Tensor w_e = rand_tensor(rng, 4, 4);
  const Tensor a1 = one_hop_attention(xp, mask, w_e, false, 0.2);
  CHECK(a1.at(0, 1) == doctest::Approx(1.0));
  CHECK(a1.at(0, 0) == 0.0);
  CHECK(a1.at(0, 2) == 0.0);
}

TEST_CASE("equal coefficients split attention evenly") {
  const int n = 3;
  const Tensor mask = Tensor::constant(n, n, {0, 1, 1, 1, 0, 1, 1, 1, 0});
  const Tensor xp = Tensor::filled(n, 4, 0.3);
  const Tensor w_e = Tensor::zeros(4, 4);  // all scores zero
  const Tensor a1 = one_hop_attention(xp, mask, w_e, false, 0.2);
  CHECK(a1.at(0, 1) == doctest::Approx(0.5));
  CHECK(a1.at(0, 2) == doctest::Approx(0.5));
}

TEST_CASE("fully masked rows give zero attention") {
  Rng rng(2);
  const int n = 3;
  const Tensor mask = Tensor::constant(n, n, {0, 0, 0, 0, 0, 1, 0, 1, 0});
  const Tensor a1 = one_hop_attention(rand_tensor(rng, n, 4), mask, rand_tensor(rng, 4, 4),
                                      false, 0.2);
  for (int j = 0; j < n; ++j) CHECK(a1.at(0, j) == 0.0);
}

TEST_CASE("teleport probabilities") {
  Rng rng(3);
  const int n = 4, f = 5;
  const Tensor xp = rand_tensor(rng, n, f);
  const Tensor a1 = ring_mask(n);  // any row-compatible matrix works here

  SUBCASE("zero weights give 1/2") {
    const Tensor beta = learn_teleport(xp, a1, Tensor::zeros(2 * f, 1), Tensor::scalar(0.0));
    for (int i = 0; i < n; ++i) CHECK(beta.at(i, 0) == doctest::Approx(0.5));
  }
  SUBCASE("large bias saturates toward 1") {
    const Tensor beta = learn_teleport(xp, a1, Tensor::zeros(2 * f, 1), Tensor::scalar(40.0));
    for (int i = 0; i < n; ++i) CHECK(beta.at(i, 0) == doctest::Approx(1.0));
  }
  SUBCASE("finite inputs stay strictly inside (0,1)") {
    const Tensor beta = learn_teleport(xp, a1, rand_tensor(rng, 2 * f, 1, 3.0),
                                       Tensor::scalar(-1.0));
    for (int i = 0; i < n; ++i) {
      CHECK(beta.at(i, 0) > 0.0);
      CHECK(beta.at(i, 0) < 1.0);
    }
  }
}

TEST_CASE("diffusion boundary cases") {
  Rng rng(4);
  const int n = 5, f = 3;
  const Tensor xp = rand_tensor(rng, n, f);
  const Tensor mask = ring_mask(n);
  const Tensor a1 = one_hop_attention(xp, mask, rand_tensor(rng, f, f), false, 0.2);

  SUBCASE("zero hops return the features") {
    CHECK(diffuse(a1, xp, Tensor::filled(n, 1, 0.4), 0).value() == xp.value());
  }
  SUBCASE("beta = 1 pins the features for any K") {
    CHECK(diffuse(a1, xp, Tensor::filled(n, 1, 1.0), 9).value() == xp.value());
  }
  SUBCASE("self-supported attention is a fixed point") {
    std::vector<double> eye(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) eye[static_cast<std::size_t>(i) * n + i] = 1.0;
    const Tensor self_attention = Tensor::constant(n, n, std::move(eye));
    const Tensor z = diffuse(self_attention, xp, Tensor::filled(n, 1, 0.37), 6);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < f; ++c) CHECK(z.at(i, c) == doctest::Approx(xp.at(i, c)).epsilon(1e-14));
  }
}

TEST_CASE("successive iterates contract geometrically") {
  Rng rng(5);
  const int n = 6, f = 4;
  const Tensor xp = rand_tensor(rng, n, f);
  const Tensor mask = ring_mask(n);
  const Tensor a1 = one_hop_attention(xp, mask, rand_tensor(rng, f, f), false, 0.2);
  std::vector<double> bv(n);
  double min_beta = 1.0;
  for (auto& b : bv) {
    b = rng.uniform(0.2, 0.8);
    min_beta = std::min(min_beta, b);
  }
  const Tensor beta = Tensor::constant(n, 1, bv);

  auto max_abs_diff = [&](int ka, int kb) {
    const auto za = diffuse(a1, xp, beta, ka).value();
    const auto zb = diffuse(a1, xp, beta, kb).value();
    double d = 0.0;
    for (std::size_t i = 0; i < za.size(); ++i) d = std::max(d, std::fabs(za[i] - zb[i]));
    return d;
  };
  const double first_step = max_abs_diff(1, 0);
  const double late_step = max_abs_diff(50, 49);
  CHECK(late_step <= std::pow(1.0 - min_beta, 49) * first_step * (1.0 + 1e-9));
}

TEST_CASE("degenerate projection returns the diffused features") {
  Rng rng(6);
  const int n = 4, f_in = 3, f_out = 5;
  GlemaLayerParams layer;
  layer.leaky_slope = 1.0;  // identity nonlinearity
  GlemaHeadParams head;
  head.w_h = rand_tensor(rng, f_out, f_in);
  head.w_e = rand_tensor(rng, f_out, f_out);
  head.w_beta = rand_tensor(rng, 2 * f_out, 1);
  head.b_beta = Tensor::scalar(0.1);
  layer.heads.push_back(head);
  std::vector<double> eye(static_cast<std::size_t>(f_out) * f_out, 0.0);
  for (int i = 0; i < f_out; ++i) eye[static_cast<std::size_t>(i) * f_out + i] = 1.0;
  layer.w_o = Tensor::constant(f_out, f_out, std::move(eye));

  const Tensor x = rand_tensor(rng, n, f_in);
  const Tensor mask = ring_mask(n);
  const GlemaOutput out = glema_forward(x, mask, layer, 3, false);

  const Tensor xp = ad::matmul_nt(x, head.w_h);
  const Tensor a1 = one_hop_attention(xp, mask, head.w_e, false, 1.0);
  const Tensor beta = learn_teleport(xp, a1, head.w_beta, head.b_beta);
  const auto z = diffuse(a1, xp, beta, 3).value();
  REQUIRE(out.x_hat.size() == z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(out.x_hat.value()[i] == doctest::Approx(z[i]).epsilon(1e-12));
}

TEST_CASE("zero input with zero bias stays zero") {
  Rng rng(7);
  const int n = 4, f = 3;
  GlemaLayerParams layer;
  layer.leaky_slope = 0.2;
  GlemaHeadParams head;
  head.w_h = rand_tensor(rng, f, f);
  head.w_e = rand_tensor(rng, f, f);
  head.w_beta = rand_tensor(rng, 2 * f, 1);
  head.b_beta = Tensor::scalar(0.0);
  layer.heads.push_back(head);
  layer.w_o = rand_tensor(rng, f, f);

  const GlemaOutput out = glema_forward(Tensor::zeros(n, f), ring_mask(n), layer, 4, false);
  for (double v : out.x_hat.value()) CHECK(v == 0.0);
}

TEST_CASE("multi-head output concatenates before the projection") {
  Rng rng(8);
  const int n = 3, f = 2;
  GlemaLayerParams layer;
  layer.leaky_slope = 0.2;
  for (int h = 0; h < 2; ++h) {
    GlemaHeadParams head;
    head.w_h = rand_tensor(rng, f, f);
    head.w_e = rand_tensor(rng, f, f);
    head.w_beta = rand_tensor(rng, 2 * f, 1);
    head.b_beta = Tensor::scalar(0.0);
    layer.heads.push_back(head);
  }
  layer.w_o = rand_tensor(rng, 2 * f, f);
  const GlemaOutput out = glema_forward(rand_tensor(rng, n, f), ring_mask(n), layer, 2, false);
  CHECK(out.x_hat.rows() == n);
  CHECK(out.x_hat.cols() == f);
  CHECK(out.attention.size() == 2);
}
