#include "xneusm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "xneusm/error.hpp"

namespace xneusm {

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= node_count() || v >= node_count()) return false;
  std::pair<int, int> e{u, v};
  if (!directed && u > v) e = {v, u};
  return std::binary_search(edges.begin(), edges.end(), e);
}

Graph build_graph(bool directed, std::vector<int> labels,
                  std::vector<std::pair<int, int>> edges, int label_alphabet_size) {
  const int n = static_cast<int>(labels.size());
  if (n < 1) fail(Errc::domain_error, "graph needs at least one node");

  int max_label = 0;
  for (int l : labels) {
    if (l < 0) fail(Errc::label_out_of_range, "negative label id");
    max_label = std::max(max_label, l);
  }
  if (label_alphabet_size == 0) label_alphabet_size = max_label + 1;
  if (max_label >= label_alphabet_size)
    fail(Errc::label_out_of_range,
         "label " + std::to_string(max_label) + " >= alphabet size " +
             std::to_string(label_alphabet_size));

  for (auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      fail(Errc::syntax_error, "edge endpoint out of range");
    if (u == v) fail(Errc::self_loop, "self loop at node " + std::to_string(u));
    if (!directed && u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    fail(Errc::duplicate_edge, "duplicate edge");

  Graph g;
  g.directed = directed;
  g.labels = std::move(labels);
  g.edges = std::move(edges);
  g.label_alphabet_size = label_alphabet_size;

  g.neighbors.assign(n, {});
  if (directed) {
    g.out_adj.assign(n, {});
    g.in_adj.assign(n, {});
  }
  for (auto [u, v] : g.edges) {
    g.neighbors[u].push_back(v);
    g.neighbors[v].push_back(u);
    if (directed) {
      g.out_adj[u].push_back(v);
      g.in_adj[v].push_back(u);
    }
  }
  for (auto& nb : g.neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  if (!directed) {
    g.out_adj = g.neighbors;
    g.in_adj = g.neighbors;
  }

  // Weak connectivity via BFS from node 0. Checked before the degree
  // condition so an unreachable component reports as Disconnected even though
  // its nodes may also be isolated.
  std::vector<char> seen(n, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (int w : g.neighbors[queue[head]]) {
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  if (static_cast<int>(queue.size()) != n) fail(Errc::disconnected, "graph is not connected");

  for (int v = 0; v < n; ++v) {
    // Def. 1 / Def. 2 condition 3. A single node always fails it.
    if (g.neighbors[v].empty())
      fail(Errc::isolated_node, "node " + std::to_string(v) + " has no incident edge");
  }

  return g;
}

namespace {

struct LineScanner {
  std::istringstream in;
  int line_no = 0;
  std::string line;

  explicit LineScanner(const std::string& text) : in(text) {}

  // Next non-empty, non-comment line; false at end of input.
  bool next(std::istringstream& fields) {
    while (std::getline(in, line)) {
      ++line_no;
      std::size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos || line[i] == '#') continue;
      fields = std::istringstream(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void syntax(const std::string& msg) const {
    fail(Errc::syntax_error, "line " + std::to_string(line_no) + ": " + msg);
  }
};

}  // namespace

Graph parse_graph(const std::string& text) {
  LineScanner sc(text);
  std::istringstream fields;

  if (!sc.next(fields)) fail(Errc::syntax_error, "empty input");
  char tag;
  int graph_id, n, m, dir;
  if (!(fields >> tag >> graph_id >> n >> m >> dir) || tag != 't' || (dir != 0 && dir != 1))
    sc.syntax("expected 't <id> <nodes> <edges> <directed>'");
  if (n < 1) sc.syntax("node count must be >= 1");
  if (m < 0) sc.syntax("negative edge count");

  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    if (!sc.next(fields)) fail(Errc::syntax_error, "unexpected end of input in node list");
    int id, label;
    if (!(fields >> tag >> id >> label) || tag != 'v') sc.syntax("expected 'v <id> <label>'");
    if (id != i) sc.syntax("node ids must be 0..n-1 in order");
    if (label < 0) sc.syntax("negative label");
    labels[i] = label;
  }

  std::vector<std::pair<int, int>> edges(m);
  for (int i = 0; i < m; ++i) {
    if (!sc.next(fields)) fail(Errc::syntax_error, "unexpected end of input in edge list");
    int u, v;
    if (!(fields >> tag >> u >> v) || tag != 'e') sc.syntax("expected 'e <tail> <head>'");
    if (u < 0 || u >= n || v < 0 || v >= n) sc.syntax("edge endpoint out of range");
    edges[i] = {u, v};
  }

  return build_graph(dir == 1, std::move(labels), std::move(edges));
}

std::string serialize_graph(const Graph& g, int graph_id) {
  std::ostringstream out;
  out << "t " << graph_id << ' ' << g.node_count() << ' ' << g.edge_count() << ' '
      << (g.directed ? 1 : 0) << '\n';
  for (int v = 0; v < g.node_count(); ++v) out << "v " << v << ' ' << g.labels[v] << '\n';
  for (auto [u, v] : g.edges) out << "e " << u << ' ' << v << '\n';
  return out.str();
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

void save_graph_file(const Graph& g, const std::string& path, int graph_id) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << serialize_graph(g, graph_id);
  if (!out) fail(Errc::io_error, "write failed for " + path);
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  // Every edge contributes 2 to the total degree, directed or not.
  s.mean_degree = 2.0 * s.edge_count / s.node_count;
  double var = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    const double d = g.directed ? g.in_degree(v) + g.out_degree(v) : g.degree(v);
    var += (d - s.mean_degree) * (d - s.mean_degree);
  }
  s.degree_std = std::sqrt(var / s.node_count);
  return s;
}

}  // namespace xneusm
