#include "xneusm/graph.hpp"

#include <doctest.h>

#include "test_util.hpp"
#include "xneusm/error.hpp"
#include "xneusm/rng.hpp"

using namespace xneusm;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io_error;
}

}  // namespace

TEST_CASE("build_graph validates the definition") {
  CHECK(code_of([] { build_graph(false, {0}, {}); }) == Errc::isolated_node);

  const Graph g = build_graph(false, {0, 1}, {{0, 1}});
  CHECK(g.node_count() == 2);
  CHECK(g.edge_count() == 1);
  CHECK(g.label_alphabet_size == 2);

  CHECK(code_of([] { build_graph(false, {0, 1, 2}, {{0, 1}}); }) == Errc::disconnected);
  CHECK(code_of([] { build_graph(false, {0, 0}, {{0, 0}}); }) == Errc::self_loop);
  CHECK(code_of([] { build_graph(false, {0, 0}, {{0, 1}, {1, 0}}); }) == Errc::duplicate_edge);
  CHECK(code_of([] { build_graph(false, {0, 5}, {{0, 1}}, 3); }) == Errc::label_out_of_range);
}

TEST_CASE("undirected edges are stored canonically") {
  const Graph g = build_graph(false, {0, 1, 2}, {{2, 0}, {2, 1}});
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 2}, {1, 2}});
  CHECK(g.has_edge(2, 0));
  CHECK(g.has_edge(0, 2));
}

TEST_CASE("directed adjacency respects orientation") {
  const Graph g = build_graph(true, {0, 1}, {{0, 1}});
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
  CHECK(g.out_degree(0) == 1);
  CHECK(g.in_degree(0) == 0);
  CHECK(g.in_degree(1) == 1);
}

TEST_CASE("parse_graph reads the text format") {
  const Graph g = parse_graph("t 0 2 1 0\nv 0 5\nv 1 7\ne 0 1\n");
  CHECK_FALSE(g.directed);
  CHECK(g.labels == std::vector<int>{5, 7});
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}});

  const Graph c = parse_graph("# comment\nt 1 2 1 1\n# another\nv 0 0\nv 1 1\ne 1 0\n");
  CHECK(c.directed);
  CHECK(c.edges == std::vector<std::pair<int, int>>{{1, 0}});
}

TEST_CASE("parse_graph reports syntax errors with line numbers") {
  auto check_syntax = [](const std::string& text, const char* needle) {
    try {
      parse_graph(text);
      FAIL("expected SyntaxError for: ", text);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::syntax_error);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_syntax("t 0 2 1 0\nv 0 1\nv 1 1\ne 0 9\n", "line 4");
  check_syntax("t 0 2 1 0\nv 1 1\nv 0 1\ne 0 1\n", "line 2");
  check_syntax("x 0 2 1 0\n", "line 1");
}

TEST_CASE("serialize then parse is the identity on graphs") {
  // The text format carries no declared alphabet, so the round trip lives on
  // graphs whose alphabet is implicit (max label + 1).
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph sample = testutil::random_connected_graph(rng, 2, 10, 4, trial % 2 == 1);
    const Graph g = build_graph(sample.directed, sample.labels, sample.edges);
    CHECK(parse_graph(serialize_graph(g, trial)) == g);
  }
}

TEST_CASE("accepted graphs are BFS-connected from node 0") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = testutil::random_connected_graph(rng, 2, 12, 3, false);
    std::vector<char> seen(g.node_count(), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (int w : g.neighbors[queue[h]])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    CHECK(static_cast<int>(queue.size()) == g.node_count());
  }
}

TEST_CASE("degree_stats") {
  const Graph triangle = build_graph(false, {0, 1, 2}, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(degree_stats(triangle).mean_degree == doctest::Approx(2.0));
  CHECK(degree_stats(triangle).degree_std == doctest::Approx(0.0));

  const Graph path2 = build_graph(false, {0, 0}, {{0, 1}});
  CHECK(degree_stats(path2).mean_degree == doctest::Approx(1.0));

  const Graph star = build_graph(false, {0, 0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const DegreeStats s = degree_stats(star);
  CHECK(s.mean_degree == doctest::Approx(1.6));
  CHECK(s.node_count == 5);
  CHECK(s.edge_count == 4);
}
