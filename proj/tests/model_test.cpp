#include "xneusm/model.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "test_util.hpp"
#include "xneusm/dataset.hpp"
#include "xneusm/metrics.hpp"
#include "xneusm/rng.hpp"
#include "xneusm/train.hpp"

using namespace xneusm;
using ad::Tensor;

namespace {

ModelConfig small_config(int t_v) {
  ModelConfig cfg;
  cfg.t_v = t_v;
  cfg.hidden_dim = 12;
  cfg.num_layers = 2;
  cfg.num_heads = 1;
  cfg.fc_layers = 2;
  cfg.fc_hidden = 8;
  return cfg;
}

}  // namespace

TEST_CASE("hop schedules") {
  ModelConfig cfg;
  cfg.hop_schedule = HopSchedule::interleaved;
  CHECK(cfg.hops_for_layer(1) == 1);
  CHECK(cfg.hops_for_layer(4) == 7);
  cfg.hop_schedule = HopSchedule::increasing;
  CHECK(cfg.hops_for_layer(4) == 4);
  cfg.hop_schedule = HopSchedule::one;
  CHECK(cfg.hops_for_layer(4) == 1);
}

TEST_CASE("prediction is strictly inside (0,1)") {
  Rng rng(1);
  ModelParams params = ModelParams::init(small_config(3), 77);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph pattern = testutil::random_connected_graph(rng, 2, 5, 3, false);
    const Graph target = testutil::random_connected_graph(rng, 4, 9, 3, false);
    const double y = model_forward(encode_pair(pattern, target, 3), params).y_hat.item();
    CHECK(y > 0.0);
    CHECK(y < 1.0);
  }
}

TEST_CASE("shared branches on disjoint labels collapse to the bias path") {
  // With shared parameters and a_cr == a_in, the layer difference vanishes
  // and the classifier sees a zero vector: y = sigmoid(0) with zero biases.
  ModelConfig cfg = small_config(4);
  cfg.shared_branches = true;
  ModelParams params = ModelParams::init(cfg, 5);
  const Graph pattern = build_graph(false, {0, 1}, {{0, 1}}, 4);
  const Graph target = build_graph(false, {2, 3, 2}, {{0, 1}, {1, 2}}, 4);
  const JointInput ji = encode_pair(pattern, target, 4);
  REQUIRE(ji.a_cr == ji.a_in);
  CHECK(model_forward(ji, params).y_hat.item() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("prediction is invariant to target node relabelling") {
  Rng rng(2);
  ModelParams params = ModelParams::init(small_config(3), 123);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph pattern = testutil::random_connected_graph(rng, 2, 5, 3, false);
    const Graph target = testutil::random_connected_graph(rng, 4, 9, 3, false);

    std::vector<int> perm(target.node_count());
    for (int i = 0; i < target.node_count(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<int> labels(target.node_count());
    std::vector<std::pair<int, int>> edges;
    for (int v = 0; v < target.node_count(); ++v) labels[perm[v]] = target.labels[v];
    for (auto [u, v] : target.edges) edges.push_back({perm[u], perm[v]});
    const Graph shuffled = build_graph(false, std::move(labels), std::move(edges), 3);

    const double y0 = model_forward(encode_pair(pattern, target, 3), params).y_hat.item();
    const double y1 = model_forward(encode_pair(pattern, shuffled, 3), params).y_hat.item();
    CHECK(std::fabs(y0 - y1) <= 1e-9);
  }
}

TEST_CASE("extract_mapping thresholds and rankings") {
  // One head, 1 pattern node, 2 target nodes: attention 0.9 / 0.1 both ways.
  const int n = 3;
  std::vector<double> att(static_cast<std::size_t>(n) * n, 0.0);
  att[0 * n + 1] = 0.9;
  att[1 * n + 0] = 0.9;
  att[0 * n + 2] = 0.1;
  att[2 * n + 0] = 0.1;
  const std::vector<Tensor> heads{Tensor::constant(n, n, att)};

  const Explanation at_half = extract_mapping(heads, 1, 0.5);
  REQUIRE(at_half.triples.size() == 1);
  CHECK(at_half.triples[0].pattern_node == 0);
  CHECK(at_half.triples[0].target_node == 0);
  CHECK(at_half.triples[0].p == doctest::Approx(0.9));
  REQUIRE(at_half.rankings.size() == 1);
  REQUIRE(at_half.rankings[0].size() == 2);
  CHECK(at_half.rankings[0][0].first == 0);
  CHECK(at_half.rankings[0][1].first == 1);

  const Explanation at_zero = extract_mapping(heads, 1, 0.0);
  CHECK(at_zero.triples.size() == 2);  // every nonzero coefficient

  const Explanation above_one = extract_mapping(heads, 1, 1.01);
  CHECK(above_one.triples.empty());
  CHECK(above_one.rankings[0].size() == 2);  // rankings survive the threshold
}

TEST_CASE("ties in rankings break by ascending target id") {
  const int n = 3;
  std::vector<double> att(static_cast<std::size_t>(n) * n, 0.0);
  att[0 * n + 1] = 0.4;
  att[1 * n + 0] = 0.4;
  att[0 * n + 2] = 0.4;
  att[2 * n + 0] = 0.4;
  const Explanation ex = extract_mapping({Tensor::constant(n, n, att)}, 1, 0.9);
  REQUIRE(ex.rankings[0].size() == 2);
  CHECK(ex.rankings[0][0].first == 0);
  CHECK(ex.rankings[0][1].first == 1);
}

TEST_CASE("checkpoint round trip preserves the forward pass") {
  Rng rng(3);
  ModelConfig cfg = small_config(3);
  cfg.num_heads = 2;
  ModelParams params = ModelParams::init(cfg, 999);
  const Graph pattern = testutil::random_connected_graph(rng, 2, 4, 3, false);
  const Graph target = testutil::random_connected_graph(rng, 5, 8, 3, false);
  const JointInput ji = encode_pair(pattern, target, 3);
  const double before = model_forward(ji, params).y_hat.item();

  const std::string path =
      (std::filesystem::temp_directory_path() / "xneusm_model_test.ckpt").string();
  save_checkpoint(params, path);
  ModelParams loaded = load_checkpoint(path);
  CHECK(loaded.config.num_heads == 2);
  const double after = model_forward(ji, loaded).y_hat.item();
  CHECK(before == after);  // full round-trip precision
  std::filesystem::remove(path);
}

TEST_CASE("untrained model scores near chance on balanced data") {
  DatasetStats stats;
  stats.mean_nodes = 10;
  stats.mean_degree = 2.5;
  stats.degree_std = 1.0;
  stats.t_v = 6;
  const std::string dir =
      (std::filesystem::temp_directory_path() / "xneusm_model_test_ds").string();
  const std::string manifest = build_dataset(stats, 6, 10, 42, dir);
  const LoadedDataset ds = load_dataset(manifest);

  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    ModelParams params = ModelParams::init(small_config(6), seed);
    const EvalMetrics m = evaluate_model(params, ds);
    CHECK(m.roc_auc >= 0.3);
    CHECK(m.roc_auc <= 0.7);
  }
  std::filesystem::remove_all(dir);
}
