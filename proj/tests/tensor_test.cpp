#include "xneusm/tensor.hpp"

#include <doctest.h>

#include <cmath>

#include "xneusm/error.hpp"
#include "xneusm/glema.hpp"
#include "xneusm/rng.hpp"

using namespace xneusm;
using ad::Tensor;

TEST_CASE("masked softmax semantics") {
  const Tensor e = Tensor::constant(1, 3, {5.0, 5.0, 5.0});
  const Tensor mask = Tensor::constant(1, 3, {1.0, 1.0, 0.0});
  const Tensor y = ad::masked_softmax_rows(e, mask);
  CHECK(y.at(0, 0) == doctest::Approx(0.5));
  CHECK(y.at(0, 1) == doctest::Approx(0.5));
  CHECK(y.at(0, 2) == 0.0);

  const Tensor all_masked =
      ad::masked_softmax_rows(Tensor::constant(1, 2, {9.0, 1.0}), Tensor::constant(1, 2, {0.0, 0.0}));
  CHECK(all_masked.at(0, 0) == 0.0);
  CHECK(all_masked.at(0, 1) == 0.0);
}

TEST_CASE("masked softmax rows are stochastic over the unmasked support") {
  Rng rng(3);
  std::vector<double> e(5 * 6), m(5 * 6);
  for (auto& x : e) x = rng.uniform(-30.0, 30.0);
  for (auto& x : m) x = rng.uniform01() < 0.6 ? 1.0 : 0.0;
  const Tensor y = ad::masked_softmax_rows(Tensor::constant(5, 6, e), Tensor::constant(5, 6, m));
  for (int r = 0; r < 5; ++r) {
    double sum = 0.0;
    bool any = false;
    for (int c = 0; c < 6; ++c) {
      CHECK(y.at(r, c) >= 0.0);
      CHECK(y.at(r, c) <= 1.0);
      if (m[static_cast<std::size_t>(r) * 6 + c] == 0.0) CHECK(y.at(r, c) == 0.0);
      any = any || m[static_cast<std::size_t>(r) * 6 + c] != 0.0;
      sum += y.at(r, c);
    }
    CHECK(sum == doctest::Approx(any ? 1.0 : 0.0));
  }
}

TEST_CASE("rowwise scale") {
  const Tensor v = Tensor::constant(2, 1, {2.0, 3.0});
  const Tensor m = Tensor::constant(2, 2, {1.0, 1.0, 1.0, 1.0});
  const Tensor y = ad::rowwise_scale(v, m);
  CHECK(y.value() == std::vector<double>{2.0, 2.0, 3.0, 3.0});
}

TEST_CASE("backward of a linear map broadcasts the fixed factor") {
  // loss = sum(W x) with x fixed: dW = x^T broadcast across rows.
  Tensor w = Tensor::param(2, 3, {0.1, 0.2, 0.3, -0.1, 0.0, 0.4});
  const Tensor x = Tensor::constant(3, 1, {1.0, 2.0, -3.0});
  ad::backward(ad::sum_all(ad::matmul(w, x)));
  CHECK(w.grad() == std::vector<double>{1.0, 2.0, -3.0, 1.0, 2.0, -3.0});
}

TEST_CASE("backward of sigmoid at zero") {
  Tensor w = Tensor::param(1, 1, {0.0});
  ad::backward(ad::sigmoid(w));
  CHECK(w.grad()[0] == doctest::Approx(0.25));
}

TEST_CASE("backward rejects non-scalar losses") {
  Tensor w = Tensor::param(1, 2, {1.0, 2.0});
  CHECK_THROWS_AS(ad::backward(w), Error);
}

TEST_CASE("tape is linear: gradient of a sum equals summed gradients") {
  auto make_params = [] {
    return std::pair{Tensor::param(2, 2, {0.3, -0.2, 0.7, 0.1}),
                     Tensor::param(2, 2, {1.0, 0.5, -0.4, 0.2})};
  };
  auto loss1 = [](Tensor& a, Tensor& b) { return ad::sum_all(ad::matmul(a, b)); };
  auto loss2 = [](Tensor& a, Tensor& b) { return ad::sum_all(ad::mul(a, ad::sigmoid(b))); };

  auto [a1, b1] = make_params();
  ad::backward(ad::add(loss1(a1, b1), loss2(a1, b1)));

  auto [a2, b2] = make_params();
  ad::backward(loss1(a2, b2));
  std::vector<double> ga = a2.grad(), gb = b2.grad();
  a2.zero_grad();
  b2.zero_grad();
  ad::backward(loss2(a2, b2));
  for (std::size_t i = 0; i < ga.size(); ++i) {
    ga[i] += a2.grad()[i];
    gb[i] += b2.grad()[i];
  }

  for (std::size_t i = 0; i < ga.size(); ++i) {
    CHECK(a1.grad()[i] == doctest::Approx(ga[i]).epsilon(1e-12));
    CHECK(b1.grad()[i] == doctest::Approx(gb[i]).epsilon(1e-12));
  }
}

TEST_CASE("grad_check on a quadratic form is exact to roundoff") {
  Tensor w = Tensor::param(3, 1, {0.5, -1.2, 2.0});
  auto f = [&] { return ad::sum_all(ad::mul(w, w)); };
  const auto report = ad::grad_check(f, {{"w", w}}, 1e-5);
  CHECK(report.max_rel_err <= 1e-8);
}

TEST_CASE("grad_check covers every primitive in one composite") {
  Rng rng(11);
  auto rand_param = [&](int r, int c) {
    std::vector<double> d(static_cast<std::size_t>(r) * c);
    for (auto& x : d) x = rng.uniform(-0.8, 0.8);
    return Tensor::param(r, c, std::move(d));
  };
  Tensor a = rand_param(3, 4);
  Tensor b = rand_param(3, 4);
  Tensor v = rand_param(3, 1);
  Tensor s = rand_param(1, 1);
  const Tensor mask = Tensor::constant(3, 4, {1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 1});

  auto f = [&] {
    Tensor m = ad::mul(ad::add(a, b), ad::sub(a, ad::scalar_mul(0.5, b)));
    m = ad::add_broadcast_scalar(m, s);
    m = ad::masked_softmax_rows(ad::leaky_relu(m, 0.2), mask);
    m = ad::rowwise_scale(v, m);
    Tensor t = ad::matmul_nt(m, ad::exp(ad::scalar_mul(0.1, b)));
    t = ad::concat_cols(t, ad::sigmoid(ad::transpose(ad::matmul(ad::transpose(m), t))));
    Tensor top = ad::sum_all(ad::log_clamped(ad::add(ad::mul(t, t), Tensor::filled(3, 7, 0.3))));
    Tensor bottom = ad::add(ad::sum_all(ad::exp(ad::scalar_mul(-1.0, ad::mean_rows_subset(t, {0, 2})))),
                            Tensor::scalar(1.0));
    return ad::div(top, bottom);
  };
  const auto report =
      ad::grad_check(f, {{"a", a}, {"b", b}, {"v", v}, {"s", s}}, 1e-5);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("grad_check flags a broken backward rule") {
  // Hand-built op: forward w^2, backward deliberately 3w instead of 2w.
  Tensor w = Tensor::param(2, 1, {0.7, -0.4});
  auto f = [&] {
    auto broken = std::make_shared<ad::Node>();
    broken->rows = 2;
    broken->cols = 1;
    broken->leaf = false;
    broken->requires_grad = true;
    broken->parents = {w.node()};
    broken->v = {w.value()[0] * w.value()[0], w.value()[1] * w.value()[1]};
    auto wn = w.node();
    broken->backprop = [wn](ad::Node& o) {
      wn->ensure_grad();
      for (int i = 0; i < 2; ++i) wn->g[i] += o.g[i] * 3.0 * wn->v[i];
    };
    return ad::sum_all(Tensor(broken));
  };
  const auto report = ad::grad_check(f, {{"w", w}}, 1e-5);
  CHECK(report.max_rel_err > 0.1);
}

TEST_CASE("small layer forward matches finite differences") {
  Rng rng(21);
  const int n = 5, f_in = 4, f_out = 6;
  auto rand_param = [&](int r, int c, double scale) {
    std::vector<double> d(static_cast<std::size_t>(r) * c);
    for (auto& x : d) x = rng.uniform(-scale, scale);
    return Tensor::param(r, c, std::move(d));
  };
  GlemaLayerParams layer;
  layer.leaky_slope = 0.2;
  GlemaHeadParams head;
  head.w_h = rand_param(f_out, f_in, 0.5);
  head.w_e = rand_param(f_out, f_out, 0.5);
  head.w_beta = rand_param(2 * f_out, 1, 0.5);
  head.b_beta = rand_param(1, 1, 0.5);
  layer.heads.push_back(head);
  layer.w_o = rand_param(f_out, f_out, 0.5);

  std::vector<double> xv(n * f_in), mv(n * n, 0.0);
  for (auto& x : xv) x = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    mv[static_cast<std::size_t>(i) * n + j] = 1.0;
    mv[static_cast<std::size_t>(j) * n + i] = 1.0;
  }
  const Tensor x = Tensor::constant(n, f_in, xv);
  const Tensor mask = Tensor::constant(n, n, mv);

  auto f = [&] {
    const GlemaOutput out = glema_forward(x, mask, layer, 3, false);
    return ad::sum_all(ad::sigmoid(out.x_hat));
  };
  const auto report = ad::grad_check(f,
                                     {{"w_h", head.w_h},
                                      {"w_e", head.w_e},
                                      {"w_beta", head.w_beta},
                                      {"b_beta", head.b_beta},
                                      {"w_o", layer.w_o}},
                                     1e-5);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("forward evaluation is deterministic") {
  Rng rng(31);
  std::vector<double> av(12), bv(12);
  for (auto& x : av) x = rng.uniform(-1, 1);
  for (auto& x : bv) x = rng.uniform(-1, 1);
  auto run = [&] {
    const Tensor a = Tensor::constant(3, 4, av);
    const Tensor b = Tensor::constant(4, 3, std::vector<double>(bv.begin(), bv.end()));
    return ad::matmul(a, b).value();
  };
  CHECK(run() == run());
}

TEST_CASE("shape errors are reported") {
  const Tensor a = Tensor::constant(2, 3, {1, 2, 3, 4, 5, 6});
  const Tensor b = Tensor::constant(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK_THROWS_AS((void)ad::matmul(a, b), Error);
  CHECK_THROWS_AS((void)ad::concat_cols(a, Tensor::constant(3, 1, {1, 2, 3})), Error);
  CHECK_THROWS_AS((void)ad::rowwise_scale(Tensor::constant(2, 2, {1, 2, 3, 4}), a), Error);
}
