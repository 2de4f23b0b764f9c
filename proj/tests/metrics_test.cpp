#include "xneusm/metrics.hpp"

#include <doctest.h>

#include <cmath>

#include "xneusm/error.hpp"

using namespace xneusm;

TEST_CASE("roc_auc rank statistic") {
  CHECK(roc_auc({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(roc_auc({0.2, 0.3, 0.8, 0.9}, {1, 1, 0, 0}) == doctest::Approx(0.0));
  CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
  CHECK(roc_auc({0.9, 0.6, 0.6, 0.1}, {1, 1, 0, 0}) == doctest::Approx(0.875));
}

TEST_CASE("roc_auc is invariant under strictly monotone transforms") {
  const std::vector<double> scores{0.11, 0.52, 0.48, 0.77, 0.03, 0.69};
  const std::vector<int> labels{0, 1, 0, 1, 0, 1};
  const double base = roc_auc(scores, labels);
  std::vector<double> warped;
  for (double s : scores) warped.push_back(std::exp(3.0 * s) - 7.0);
  CHECK(roc_auc(warped, labels) == doctest::Approx(base));
}

TEST_CASE("degenerate labels are rejected") {
  CHECK_THROWS_AS((void)roc_auc({0.1, 0.2}, {1, 1}), Error);
  CHECK_THROWS_AS((void)pr_auc({0.1, 0.2}, {0, 0}), Error);
}

TEST_CASE("pr_auc on perfect separation") {
  CHECK(pr_auc({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  // One false positive ranked above the second true positive.
  const double ap = pr_auc({0.9, 0.8, 0.7, 0.2}, {1, 0, 1, 0});
  CHECK(ap == doctest::Approx(0.5 * 1.0 + 0.5 * (2.0 / 3.0)));
}

TEST_CASE("f1 and accuracy at a threshold") {
  const F1Accuracy perfect = f1_accuracy({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}, 0.5);
  CHECK(perfect.f1 == doctest::Approx(1.0));
  CHECK(perfect.accuracy == doctest::Approx(1.0));

  const F1Accuracy at_09 = f1_accuracy({0.95, 0.8, 0.3, 0.2}, {1, 1, 0, 0}, 0.9);
  CHECK(at_09.f1 == doctest::Approx(2.0 / 3.0));  // one positive missed
  CHECK(at_09.accuracy == doctest::Approx(0.75));
}

TEST_CASE("mrr and topk from rank lists") {
  const std::vector<std::vector<int>> one_sample{{1, 2, 4}};
  CHECK(mrr(one_sample) == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));

  const std::vector<std::vector<int>> another{{1, 1, 3}};
  CHECK(topk_accuracy(another, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(topk_accuracy(another, 3) == doctest::Approx(1.0));

  // Rank 0 encodes "absent": contributes nothing to either metric.
  const std::vector<std::vector<int>> with_missing{{1, 0}};
  CHECK(topk_accuracy(with_missing, 100) == doctest::Approx(0.5));
  CHECK(mrr(with_missing) == doctest::Approx(0.5));
}

TEST_CASE("topk is nondecreasing in k") {
  const std::vector<std::vector<int>> ranks{{1, 3, 7, 0}, {2, 2, 5, 9}};
  double prev = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double v = topk_accuracy(ranks, k);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("mapping_ranks reads the explanation rankings") {
  Explanation ex;
  ex.rankings = {{{3, 0.8}, {1, 0.2}}, {{0, 0.9}}};
  CHECK(mapping_ranks(ex, {1, 0}) == std::vector<int>{2, 1});
  CHECK(mapping_ranks(ex, {5, 0}) == std::vector<int>{0, 1});  // 5 not ranked
  CHECK_THROWS_AS((void)mapping_ranks(ex, {1}), Error);
}
