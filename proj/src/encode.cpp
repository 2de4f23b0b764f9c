#include "xneusm/encode.hpp"

#include "xneusm/error.hpp"

namespace xneusm {

JointInput encode_pair(const Graph& pattern, const Graph& target, int t_v) {
  if (pattern.directed != target.directed)
    fail(Errc::domain_error, "pattern and target disagree on directedness");
  for (int l : pattern.labels)
    if (l >= t_v) fail(Errc::label_out_of_range, "pattern label " + std::to_string(l));
  for (int l : target.labels)
    if (l >= t_v) fail(Errc::label_out_of_range, "target label " + std::to_string(l));

  JointInput ji;
  ji.pattern_count = pattern.node_count();
  ji.n = pattern.node_count() + target.node_count();
  ji.t_v = t_v;
  ji.directed = pattern.directed;

  const int n = ji.n, pc = ji.pattern_count;
  ji.x.assign(static_cast<std::size_t>(n) * 2 * t_v, 0.0);
  ji.a_in.assign(static_cast<std::size_t>(n) * n, 0.0);
  ji.a_cr.assign(static_cast<std::size_t>(n) * n, 0.0);

  for (int v = 0; v < pc; ++v)
    ji.x[static_cast<std::size_t>(v) * 2 * t_v + pattern.labels[v]] = 1.0;
  for (int v = 0; v < target.node_count(); ++v)
    ji.x[static_cast<std::size_t>(pc + v) * 2 * t_v + t_v + target.labels[v]] = 1.0;

  // Intra-graph adjacency; for directed graphs row i receives, i.e. entry
  // (head, tail) is set.
  auto flag = [&](std::vector<double>& m, int i, int j) {
    m[static_cast<std::size_t>(i) * n + j] = 1.0;
  };
  auto add_edges = [&](const Graph& g, int offset) {
    for (auto [u, v] : g.edges) {
      if (g.directed) {
        flag(ji.a_in, offset + v, offset + u);
      } else {
        flag(ji.a_in, offset + u, offset + v);
        flag(ji.a_in, offset + v, offset + u);
      }
    }
  };
  add_edges(pattern, 0);
  add_edges(target, pc);

  ji.a_cr = ji.a_in;
  for (int p = 0; p < pc; ++p) {
    for (int t = 0; t < target.node_count(); ++t) {
      if (pattern.labels[p] == target.labels[t]) {
        flag(ji.a_cr, p, pc + t);
        flag(ji.a_cr, pc + t, p);
      }
    }
  }
  return ji;
}

}  // namespace xneusm
