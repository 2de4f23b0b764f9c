#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "xneusm/graph.hpp"

namespace xneusm {

/// Exact induced subgraph isomorphism: returns some embedding of `pattern`
/// into `target` if one exists. Deterministic: pattern nodes are matched in a
/// fixed order (rarest target label first, then highest pattern degree) and
/// candidates are tried in ascending node id.
/// Throws Error(label_space_mismatch) when the pattern declares a larger
/// label alphabet than the target.
std::optional<Mapping> find_embedding(const Graph& pattern, const Graph& target);

/// All distinct embeddings, up to `limit`, in the same deterministic order.
std::vector<Mapping> enumerate_embeddings(const Graph& pattern, const Graph& target,
                                          std::size_t limit);

/// True iff `f` is a total injective map satisfying the three induced
/// isomorphism conditions (labels preserved, pattern edges mapped to target
/// edges, target edges between mapped nodes pulled back to pattern edges).
/// Malformed maps return false rather than throwing.
bool verify_mapping(const Graph& pattern, const Graph& target, const Mapping& f);

}  // namespace xneusm
