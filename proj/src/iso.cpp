#include "xneusm/iso.hpp"

#include <algorithm>
#include <numeric>

#include "xneusm/error.hpp"

namespace xneusm {

namespace {

// Backtracking state over a fixed pattern-node order. Induced semantics are
// enforced during extension: a candidate must reproduce edge presence *and*
// absence against every already-mapped node.
struct Search {
  const Graph& pattern;
  const Graph& target;
  std::vector<int> order;       // pattern nodes in match order
  std::vector<int> assignment;  // pattern node -> target node or -1
  std::vector<char> used;       // target node occupied
  std::size_t limit;
  std::vector<Mapping> found;

  Search(const Graph& p, const Graph& t, std::size_t lim)
      : pattern(p), target(t), assignment(p.node_count(), -1), used(t.node_count(), 0),
        limit(lim) {
    std::vector<int> label_count(std::max(p.label_alphabet_size, t.label_alphabet_size), 0);
    for (int l : t.labels) ++label_count[l];
    order.resize(p.node_count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const int ca = label_count[p.labels[a]], cb = label_count[p.labels[b]];
      if (ca != cb) return ca < cb;
      const int da = p.degree(a), db = p.degree(b);
      if (da != db) return da > db;
      return a < b;
    });
  }

  bool feasible(int pv, int tv) const {
    if (pattern.labels[pv] != target.labels[tv]) return false;
    if (pattern.directed) {
      if (target.out_degree(tv) < pattern.out_degree(pv)) return false;
      if (target.in_degree(tv) < pattern.in_degree(pv)) return false;
    } else {
      if (target.degree(tv) < pattern.degree(pv)) return false;
    }
    for (int pu = 0; pu < pattern.node_count(); ++pu) {
      const int tu = assignment[pu];
      if (tu < 0) continue;
      if (pattern.directed) {
        if (pattern.has_edge(pu, pv) != target.has_edge(tu, tv)) return false;
        if (pattern.has_edge(pv, pu) != target.has_edge(tv, tu)) return false;
      } else {
        if (pattern.has_edge(pu, pv) != target.has_edge(tu, tv)) return false;
      }
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order.size()) {
      found.push_back(assignment);
      return found.size() >= limit;
    }
    const int pv = order[depth];
    for (int tv = 0; tv < target.node_count(); ++tv) {
      if (used[tv] || !feasible(pv, tv)) continue;
      assignment[pv] = tv;
      used[tv] = 1;
      const bool done = extend(depth + 1);
      assignment[pv] = -1;
      used[tv] = 0;
      if (done) return true;
    }
    return false;
  }
};

void check_label_space(const Graph& pattern, const Graph& target) {
  if (pattern.label_alphabet_size > target.label_alphabet_size)
    fail(Errc::label_space_mismatch,
         "pattern alphabet " + std::to_string(pattern.label_alphabet_size) +
             " exceeds target alphabet " + std::to_string(target.label_alphabet_size));
}

}  // namespace

std::optional<Mapping> find_embedding(const Graph& pattern, const Graph& target) {
  check_label_space(pattern, target);
  if (pattern.node_count() > target.node_count()) return std::nullopt;
  Search s(pattern, target, 1);
  s.extend(0);
  if (s.found.empty()) return std::nullopt;
  return s.found.front();
}

std::vector<Mapping> enumerate_embeddings(const Graph& pattern, const Graph& target,
                                          std::size_t limit) {
  check_label_space(pattern, target);
  if (limit == 0 || pattern.node_count() > target.node_count()) return {};
  Search s(pattern, target, limit);
  s.extend(0);
  return s.found;
}

bool verify_mapping(const Graph& pattern, const Graph& target, const Mapping& f) {
  const int np = pattern.node_count();
  if (static_cast<int>(f.size()) != np) return false;
  std::vector<char> hit(target.node_count(), 0);
  for (int v = 0; v < np; ++v) {
    const int t = f[v];
    if (t < 0 || t >= target.node_count() || hit[t]) return false;
    hit[t] = 1;
    if (pattern.labels[v] != target.labels[t]) return false;  // condition 1
  }
  for (auto [u, v] : pattern.edges) {                          // condition 2
    if (!target.has_edge(f[u], f[v])) return false;
  }
  for (int u = 0; u < np; ++u) {                               // condition 3
    for (int v = 0; v < np; ++v) {
      if (u == v) continue;
      if (target.has_edge(f[u], f[v]) && !pattern.has_edge(u, v)) return false;
    }
  }
  return true;
}

}  // namespace xneusm
