#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xneusm {

/// Labelled connected graph. Node ids run 0..n-1. Undirected edges are stored
/// canonically as (min,max); directed edges as (tail,head). Instances are
/// immutable after construction and safe to share between threads.
struct Graph {
  bool directed = false;
  std::vector<int> labels;
  std::vector<std::pair<int, int>> edges;  // sorted, unique
  int label_alphabet_size = 0;

  // Adjacency views, built once at construction.
  std::vector<std::vector<int>> neighbors;  // undirected view (weak adjacency)
  std::vector<std::vector<int>> out_adj;    // directed only
  std::vector<std::vector<int>> in_adj;     // directed only

  int node_count() const { return static_cast<int>(labels.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int degree(int v) const { return static_cast<int>(neighbors[v].size()); }
  int out_degree(int v) const { return static_cast<int>(out_adj[v].size()); }
  int in_degree(int v) const { return static_cast<int>(in_adj[v].size()); }

  // Orientation-aware for directed graphs, unordered for undirected ones.
  bool has_edge(int u, int v) const;

  bool operator==(const Graph& o) const {
    return directed == o.directed && labels == o.labels && edges == o.edges &&
           label_alphabet_size == o.label_alphabet_size;
  }
};

/// Injective map pattern node -> target node, indexed by pattern node id.
using Mapping = std::vector<int>;

/// Validates and constructs a Graph. `label_alphabet_size` of 0 means
/// "max label + 1". Throws Error with code Disconnected, IsolatedNode,
/// DuplicateEdge, SelfLoop or LabelOutOfRange.
Graph build_graph(bool directed, std::vector<int> labels,
                  std::vector<std::pair<int, int>> edges, int label_alphabet_size = 0);

/// Parses the first graph block of the text format:
///   t <graph_id> <num_nodes> <num_edges> <directed:0|1>
///   v <node_id> <label_id>     (node ids 0..n-1 in order)
///   e <tail> <head>
/// `#` starts a comment line. Throws Error(syntax_error) with a line number.
Graph parse_graph(const std::string& text);

std::string serialize_graph(const Graph& g, int graph_id = 0);

Graph load_graph_file(const std::string& path);
void save_graph_file(const Graph& g, const std::string& path, int graph_id = 0);

struct DegreeStats {
  double mean_degree = 0.0;
  double degree_std = 0.0;
  int node_count = 0;
  int edge_count = 0;
};

DegreeStats degree_stats(const Graph& g);

}  // namespace xneusm
