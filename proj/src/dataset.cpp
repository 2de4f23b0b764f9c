#include "xneusm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xneusm/error.hpp"
#include "xneusm/iso.hpp"
#include "xneusm/rng.hpp"

namespace fs = std::filesystem;

namespace xneusm {

std::optional<DatasetStats> preset_stats(const std::string& name) {
  // mean nodes / mean edges / mean degree / label alphabet; the degree spread
  // is not part of the published statistics, so sparse presets use 1.0 and
  // dense ones scale with the mean.
  static const std::map<std::string, DatasetStats> presets = {
      {"kki", {26.96, 48.42, 3.19, 1.0, 190, false}},
      {"cox2", {41.22, 43.45, 2.10, 1.0, 20, false}},
      {"cox2_md", {26.28, 335.12, 25.27, 3.79, 36, false}},
      {"dhfr", {42.43, 44.54, 2.10, 1.0, 71, false}},
      {"dblp_v1", {10.48, 19.65, 3.43, 1.0, 39, false}},
      {"msrc_21", {77.52, 198.32, 5.10, 1.0, 141, false}},
  };
  auto it = presets.find(name);
  if (it == presets.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> preset_names() {
  return {"kki", "cox2", "cox2_md", "dhfr", "dblp_v1", "msrc_21"};
}

DatasetStats parse_stats_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  DatasetStats s;
  bool has_nodes = false, has_degree = false, has_tv = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key >> eq >> value) || eq != "=")
      fail(Errc::syntax_error, "line " + std::to_string(line_no) + ": expected 'key = value'");
    if (key == "mean_nodes") { s.mean_nodes = std::stod(value); has_nodes = true; }
    else if (key == "mean_edges") s.mean_edges = std::stod(value);
    else if (key == "mean_degree") { s.mean_degree = std::stod(value); has_degree = true; }
    else if (key == "degree_std") s.degree_std = std::stod(value);
    else if (key == "tv") { s.t_v = std::stoi(value); has_tv = true; }
    else if (key == "directed") s.directed = std::stoi(value) != 0;
    else fail(Errc::syntax_error, "line " + std::to_string(line_no) + ": unknown key " + key);
  }
  if (!has_nodes || !has_degree || !has_tv)
    fail(Errc::syntax_error, "stats file needs mean_nodes, mean_degree and tv");
  if (s.mean_edges == 0.0) s.mean_edges = s.mean_nodes * s.mean_degree / 2.0;
  return s;
}

namespace {

void check_stats(const DatasetStats& s) {
  if (s.mean_nodes < 2.0) fail(Errc::unsatisfiable_stats, "mean_nodes must be >= 2");
  if (s.mean_degree < 1.0)
    fail(Errc::unsatisfiable_stats, "connectivity needs mean_degree >= 1");
  if (s.degree_std < 0.0) fail(Errc::unsatisfiable_stats, "negative degree_std");
  if (s.t_v < 1) fail(Errc::unsatisfiable_stats, "t_v must be >= 1");
}

// Directed datasets orient every edge from the smaller label to the larger
// one; equal labels fall back to the smaller node id as tail.
std::pair<int, int> orient_edge(int u, int v, const std::vector<int>& labels) {
  if (labels[u] < labels[v]) return {u, v};
  if (labels[v] < labels[u]) return {v, u};
  return {std::min(u, v), std::max(u, v)};
}

}  // namespace

Graph synth_target(const DatasetStats& stats, std::uint64_t seed) {
  check_stats(stats);
  Rng rng(seed);

  const int lo = std::max(2, static_cast<int>(std::ceil(stats.mean_nodes / 2.0)));
  const int hi = std::max(lo, static_cast<int>(std::floor(stats.mean_nodes * 1.5)));
  const int n = std::clamp(
      static_cast<int>(std::lround(rng.normal(stats.mean_nodes, stats.mean_nodes / 6.0))), lo, hi);

  std::vector<int> labels(n);
  for (int& l : labels) l = rng.uniform_int(0, stats.t_v - 1);

  // Per-node degree targets, then a random spanning tree for connectivity.
  std::vector<int> want(n);
  for (int v = 0; v < n; ++v) {
    const double d = rng.normal(stats.mean_degree, stats.degree_std);
    want[v] = std::clamp(static_cast<int>(std::lround(d)), 1, n - 1);
  }

  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) order[v] = v;
  rng.shuffle(order);

  std::set<std::pair<int, int>> edge_set;
  std::vector<int> deg(n, 0);
  auto connect = [&](int u, int v) {
    edge_set.insert({std::min(u, v), std::max(u, v)});
    ++deg[u];
    ++deg[v];
  };
  for (int i = 1; i < n; ++i) connect(order[i], order[static_cast<int>(rng.below(i))]);

  // Pair off nodes that still miss their degree target.
  auto deficit_nodes = [&] {
    std::vector<int> out;
    for (int v = 0; v < n; ++v)
      if (deg[v] < want[v]) out.push_back(v);
    return out;
  };
  int stale = 0;
  while (stale < 4 * n) {
    const auto open = deficit_nodes();
    if (open.size() < 2) break;
    const int u = open[rng.below(open.size())];
    const int v = open[rng.below(open.size())];
    if (u == v || edge_set.count({std::min(u, v), std::max(u, v)})) {
      ++stale;
      continue;
    }
    connect(u, v);
    stale = 0;
  }

  std::vector<std::pair<int, int>> edges;
  edges.reserve(edge_set.size());
  for (auto [u, v] : edge_set)
    edges.push_back(stats.directed ? orient_edge(u, v, labels) : std::pair<int, int>{u, v});

  return build_graph(stats.directed, std::move(labels), std::move(edges), stats.t_v);
}

namespace {

// Grows a connected node subset of `target` by uniform frontier picks. When
// degree_target >= 0, half the picks instead greedily steer the induced mean
// degree toward it.
std::vector<int> grow_subset(const Graph& target, int size, Rng& rng, double degree_target) {
  const int n = target.node_count();
  std::vector<char> chosen(n, 0), in_frontier(n, 0);
  std::vector<int> subset, frontier;

  auto push = [&](int v) {
    chosen[v] = 1;
    in_frontier[v] = 0;
    subset.push_back(v);
    for (int w : target.neighbors[v]) {
      if (!chosen[w] && !in_frontier[w]) {
        in_frontier[w] = 1;
        frontier.push_back(w);
      }
    }
  };
  push(rng.uniform_int(0, n - 1));

  int induced_edges = 0;
  while (static_cast<int>(subset.size()) < size) {
    // Connected targets always keep the frontier non-empty here.
    std::size_t pick = 0;
    if (degree_target >= 0.0 && rng.uniform01() < 0.5) {
      double best = 1e300;
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        int gained = 0;
        for (int w : target.neighbors[frontier[i]]) gained += chosen[w];
        const double mean =
            2.0 * (induced_edges + gained) / static_cast<double>(subset.size() + 1);
        const double diff = std::fabs(mean - degree_target);
        if (diff < best || (diff == best && frontier[i] < frontier[pick])) {
          best = diff;
          pick = i;
        }
      }
    } else {
      pick = rng.below(frontier.size());
    }
    const int v = frontier[pick];
    frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    for (int w : target.neighbors[v]) induced_edges += chosen[w];
    push(v);
  }
  return subset;
}

std::pair<Graph, Mapping> positive_from_subset(const Graph& target,
                                               const std::vector<int>& subset) {
  const int size = static_cast<int>(subset.size());
  std::vector<int> target_to_pattern(target.node_count(), -1);
  for (int i = 0; i < size; ++i) target_to_pattern[subset[i]] = i;

  std::vector<int> labels(size);
  for (int i = 0; i < size; ++i) labels[i] = target.labels[subset[i]];

  std::vector<std::pair<int, int>> edges;
  for (auto [u, v] : target.edges) {
    const int pu = target_to_pattern[u], pv = target_to_pattern[v];
    if (pu >= 0 && pv >= 0) edges.push_back({pu, pv});
  }
  Graph pattern = build_graph(target.directed, std::move(labels), std::move(edges),
                              target.label_alphabet_size);
  return {std::move(pattern), Mapping(subset.begin(), subset.end())};
}

std::pair<Graph, Mapping> sample_positive_impl(const Graph& target, int size,
                                               std::uint64_t seed, double degree_target) {
  if (size < 2 || size > target.node_count())
    fail(Errc::size_out_of_range, "query size " + std::to_string(size) +
                                      " outside [2, " + std::to_string(target.node_count()) + "]");
  Rng rng(seed);
  return positive_from_subset(target, grow_subset(target, size, rng, degree_target));
}

// Connectivity check for perturbed edge lists (graph invariants get
// re-validated by build_graph anyway; this avoids throwing in the hot loop).
bool still_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int w : adj[queue[h]])
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  for (char s : seen)
    if (!s) return false;
  return true;
}

}  // namespace

std::pair<Graph, Mapping> sample_positive_query(const Graph& target, int size,
                                                std::uint64_t seed) {
  return sample_positive_impl(target, size, seed, -1.0);
}

Graph sample_negative_query(const Graph& target, int size, std::uint64_t seed,
                            int max_attempts) {
  if (size < 2 || size > target.node_count())
    fail(Errc::size_out_of_range, "query size " + std::to_string(size) +
                                      " outside [2, " + std::to_string(target.node_count()) + "]");
  Rng rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    auto [base, mapping] = sample_positive_query(target, size, rng.next_u64());
    (void)mapping;
    std::vector<int> labels = base.labels;
    std::vector<std::pair<int, int>> edges = base.edges;
    const int n = base.node_count();

    auto non_edges = [&] {
      std::vector<std::pair<int, int>> out;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (!base.has_edge(u, v) && !base.has_edge(v, u)) out.push_back({u, v});
      return out;
    };

    const int kind = rng.uniform_int(0, 2);
    bool changed = false;
    if (kind == 0) {
      // Edge between nodes that are non-adjacent in the target's induced image.
      auto candidates = non_edges();
      if (!candidates.empty()) {
        auto [u, v] = candidates[rng.below(candidates.size())];
        if (base.directed && rng.uniform01() < 0.5) std::swap(u, v);
        edges.push_back({u, v});
        changed = true;
      }
    } else if (kind == 1) {
      // Rewire: drop one edge (keeping the pattern connected), then place one
      // elsewhere when a slot exists. A clique loses the edge outright.
      std::vector<std::size_t> removable;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        auto pruned = edges;
        pruned.erase(pruned.begin() + static_cast<std::ptrdiff_t>(e));
        bool isolated = false;
        std::vector<int> deg(n, 0);
        for (auto [u, v] : pruned) {
          ++deg[u];
          ++deg[v];
        }
        for (int d : deg) isolated = isolated || d == 0;
        if (!isolated && still_connected(n, pruned)) removable.push_back(e);
      }
      if (!removable.empty()) {
        const std::size_t e = removable[rng.below(removable.size())];
        edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(e));
        auto candidates = non_edges();  // excludes the dropped slot by construction
        if (!candidates.empty()) {
          auto [u, v] = candidates[rng.below(candidates.size())];
          if (base.directed && rng.uniform01() < 0.5) std::swap(u, v);
          edges.push_back({u, v});
        }
        changed = true;
      }
    } else if (target.label_alphabet_size >= 2) {
      const int node = rng.uniform_int(0, n - 1);
      const int shift = rng.uniform_int(1, target.label_alphabet_size - 1);
      labels[node] = (labels[node] + shift) % target.label_alphabet_size;
      changed = true;
    }
    if (!changed) continue;

    try {
      Graph candidate = build_graph(base.directed, std::move(labels), std::move(edges),
                                    target.label_alphabet_size);
      if (!find_embedding(candidate, target).has_value()) return candidate;
    } catch (const Error&) {
      // Perturbation produced an invalid graph; try again.
    }
  }
  fail(Errc::negative_generation_failed,
       "no certified negative after " + std::to_string(max_attempts) + " attempts");
}

std::string build_dataset(const DatasetStats& stats, int n_targets, int queries_per_target,
                          std::uint64_t seed, const std::string& out_dir) {
  check_stats(stats);
  if (n_targets < 1 || queries_per_target < 1)
    fail(Errc::domain_error, "need at least one target and one query");

  fs::create_directories(fs::path(out_dir) / "targets");
  fs::create_directories(fs::path(out_dir) / "queries");
  fs::create_directories(fs::path(out_dir) / "mappings");

  std::ostringstream manifest;
  const int positives_per_target = (queries_per_target + 1) / 2;

  for (int t = 0; t < n_targets; ++t) {
    const Graph target = synth_target(stats, derive_seed(seed, t, 0x7461));
    const std::string target_rel = "targets/t" + std::to_string(t) + ".graph";
    save_graph_file(target, (fs::path(out_dir) / target_rel).string(), t);

    for (int q = 0; q < queries_per_target; ++q) {
      const std::uint64_t qseed = derive_seed(seed, t, 0x9000 + static_cast<std::uint64_t>(q));
      Rng qrng(qseed);
      const int size = qrng.uniform_int(2, target.node_count());
      const double degree_target =
          std::clamp(qrng.normal(stats.mean_degree, stats.degree_std), 1.0,
                     static_cast<double>(size - 1));
      const std::string stem = "t" + std::to_string(t) + "_q" + std::to_string(q);
      const std::string query_rel = "queries/" + stem + ".graph";

      if (q < positives_per_target) {
        auto [pattern, mapping] =
            sample_positive_impl(target, size, qrng.next_u64(), degree_target);
        save_graph_file(pattern, (fs::path(out_dir) / query_rel).string(), q);
        const std::string map_rel = "mappings/" + stem + ".map";
        write_mapping_file(mapping, (fs::path(out_dir) / map_rel).string());
        manifest << target_rel << ' ' << query_rel << " 1 " << map_rel << '\n';
      } else {
        Graph pattern = sample_negative_query(target, size, qrng.next_u64());
        save_graph_file(pattern, (fs::path(out_dir) / query_rel).string(), q);
        manifest << target_rel << ' ' << query_rel << " 0\n";
      }
    }
  }

  const std::string manifest_path = (fs::path(out_dir) / "manifest.txt").string();
  {
    std::ofstream out(manifest_path);
    if (!out) fail(Errc::io_error, "cannot write " + manifest_path);
    out << manifest.str();
  }
  {
    std::ofstream conf((fs::path(out_dir) / "dataset.conf").string());
    conf << "tv = " << stats.t_v << '\n'
         << "directed = " << (stats.directed ? 1 : 0) << '\n'
         << "mean_nodes = " << stats.mean_nodes << '\n'
         << "mean_degree = " << stats.mean_degree << '\n'
         << "degree_std = " << stats.degree_std << '\n'
         << "seed = " << seed << '\n'
         << "targets = " << n_targets << '\n'
         << "queries_per_target = " << queries_per_target << '\n';
  }
  return manifest_path;
}

std::vector<ManifestEntry> read_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(Errc::io_error, "cannot open " + manifest_path);
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.target_path >> e.query_path >> e.label) || (e.label != 0 && e.label != 1))
      fail(Errc::syntax_error,
           "manifest line " + std::to_string(line_no) + ": expected 'target query label [map]'");
    ls >> e.mapping_path;
    if (e.label == 1 && e.mapping_path.empty())
      fail(Errc::syntax_error,
           "manifest line " + std::to_string(line_no) + ": positive sample without mapping");
    entries.push_back(std::move(e));
  }
  return entries;
}

Mapping read_mapping_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::vector<std::pair<int, int>> pairs;
  int p, t;
  while (in >> p >> t) pairs.push_back({p, t});
  std::sort(pairs.begin(), pairs.end());
  Mapping mapping(pairs.size(), -1);
  for (auto [pn, tn] : pairs) {
    if (pn < 0 || pn >= static_cast<int>(pairs.size()) || mapping[pn] != -1)
      fail(Errc::syntax_error, "mapping file is not a function on 0..n-1: " + path);
    mapping[pn] = tn;
  }
  return mapping;
}

void write_mapping_file(const Mapping& mapping, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  for (std::size_t p = 0; p < mapping.size(); ++p) out << p << ' ' << mapping[p] << '\n';
}

LoadedDataset load_dataset(const std::string& manifest_path) {
  const fs::path base = fs::path(manifest_path).parent_path();
  LoadedDataset ds;
  std::map<std::string, int> target_index;
  for (const auto& e : read_manifest(manifest_path)) {
    auto [it, fresh] = target_index.try_emplace(e.target_path, static_cast<int>(ds.targets.size()));
    if (fresh) ds.targets.push_back(load_graph_file((base / e.target_path).string()));
    LoadedSample s;
    s.target_index = it->second;
    s.query = load_graph_file((base / e.query_path).string());
    s.label = e.label;
    if (!e.mapping_path.empty()) s.mapping = read_mapping_file((base / e.mapping_path).string());
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::optional<int> sidecar_t_v(const std::string& manifest_path) {
  const fs::path conf = fs::path(manifest_path).parent_path() / "dataset.conf";
  std::ifstream in(conf);
  if (!in) return std::nullopt;
  std::string key, eq, value;
  while (in >> key >> eq >> value)
    if (key == "tv" && eq == "=") return std::stoi(value);
  return std::nullopt;
}

}  // namespace xneusm
