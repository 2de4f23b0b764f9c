#include "xneusm/iso.hpp"

#include <doctest.h>

#include <algorithm>

#include "test_util.hpp"
#include "xneusm/error.hpp"
#include "xneusm/rng.hpp"

using namespace xneusm;

namespace {

const Graph kTriangleABC = build_graph(false, {0, 1, 2}, {{0, 1}, {1, 2}, {0, 2}}, 3);
const Graph kPathABC = build_graph(false, {0, 1, 2}, {{0, 1}, {1, 2}}, 3);

Graph clique(int n, int alphabet = 1) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({u, v});
  return build_graph(false, std::vector<int>(n, 0), std::move(edges), alphabet);
}

}  // namespace

TEST_CASE("single-node pattern maps to the first matching node") {
  const Graph pattern = testutil::single_node_pattern(1, 3);
  const Graph target = build_graph(false, {0, 1, 1}, {{0, 1}, {1, 2}}, 3);
  const auto m = find_embedding(pattern, target);
  REQUIRE(m.has_value());
  CHECK(*m == Mapping{1});  // node 1 is the first with label 1
}

TEST_CASE("induced semantics reject a path inside a triangle") {
  CHECK_FALSE(find_embedding(kPathABC, kTriangleABC).has_value());
  // Non-induced reading would accept {0,1,2}; condition 3 kills it.
  CHECK_FALSE(verify_mapping(kPathABC, kTriangleABC, {0, 1, 2}));
}

TEST_CASE("triangle embeds into K4") {
  const Graph triangle = clique(3);
  const Graph k4 = clique(4);
  const auto m = find_embedding(triangle, k4);
  REQUIRE(m.has_value());
  CHECK(verify_mapping(triangle, k4, *m));

  const auto all = enumerate_embeddings(triangle, k4, 100);
  CHECK(all.size() == 24);  // 4*3*2 injections, all induced in a clique
  for (const auto& f : all) CHECK(verify_mapping(triangle, k4, f));
}

TEST_CASE("distinct labels force a unique embedding") {
  const Graph path = build_graph(false, {0, 1}, {{0, 1}}, 2);
  const auto all = enumerate_embeddings(path, path, 10);
  REQUIRE(all.size() == 1);
  CHECK(all[0] == Mapping{0, 1});
}

TEST_CASE("non-isomorphic pair yields nothing") {
  CHECK(enumerate_embeddings(kPathABC, kTriangleABC, 10).empty());
}

TEST_CASE("verify_mapping checks all three conditions") {
  CHECK(verify_mapping(kTriangleABC, kTriangleABC, {0, 1, 2}));   // identity
  CHECK_FALSE(verify_mapping(kTriangleABC, kTriangleABC, {1, 0, 2}));  // labels broken
  CHECK_FALSE(verify_mapping(kTriangleABC, kTriangleABC, {0, 0, 2}));  // not injective
  CHECK_FALSE(verify_mapping(kTriangleABC, kTriangleABC, {0, 1}));     // not total
}

TEST_CASE("label space mismatch is reported") {
  const Graph big = build_graph(false, {0, 4}, {{0, 1}}, 5);
  const Graph small = build_graph(false, {0, 1}, {{0, 1}}, 2);
  CHECK_THROWS_AS((void)find_embedding(big, small), Error);
  try {
    (void)find_embedding(big, small);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::label_space_mismatch);
  }
}

TEST_CASE("oracle agrees with exhaustive search on random pairs") {
  for (const bool directed : {false, true}) {
    Rng rng(directed ? 1234 : 4321);
    int positive = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const Graph pattern = testutil::random_connected_graph(rng, 2, 5, 3, directed, 0.35);
      const Graph target = testutil::random_connected_graph(rng, 2, 8, 3, directed, 0.35);
      if (pattern.node_count() > target.node_count()) continue;

      auto expected = testutil::brute_force_embeddings(pattern, target);
      const auto found = enumerate_embeddings(pattern, target, 100000);
      positive += !expected.empty();

      CHECK(find_embedding(pattern, target).has_value() == !expected.empty());
      auto got = found;
      std::sort(expected.begin(), expected.end());
      std::sort(got.begin(), got.end());
      CHECK(got == expected);
      for (const auto& f : found) CHECK(verify_mapping(pattern, target, f));
    }
    // The mix should exercise both outcomes.
    CHECK(positive > 10);
    CHECK(positive < 190);
  }
}

TEST_CASE("directed embeddings respect edge orientation") {
  const Graph pattern = build_graph(true, {0, 0}, {{0, 1}}, 1);
  const Graph target = build_graph(true, {0, 0, 0}, {{0, 1}, {2, 1}}, 1);
  const auto all = enumerate_embeddings(pattern, target, 10);
  // Arrows 0->1 and 2->1; the reversed pair is never returned.
  REQUIRE(all.size() == 2);
  CHECK(all[0] == Mapping{0, 1});
  CHECK(all[1] == Mapping{2, 1});
}

TEST_CASE("find_embedding is deterministic") {
  Rng rng(5);
  const Graph pattern = testutil::random_connected_graph(rng, 3, 4, 2, false);
  const Graph target = testutil::random_connected_graph(rng, 6, 8, 2, false);
  const auto a = find_embedding(pattern, target);
  const auto b = find_embedding(pattern, target);
  CHECK(a == b);
}
