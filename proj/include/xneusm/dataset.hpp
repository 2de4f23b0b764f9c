#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xneusm/graph.hpp"

namespace xneusm {

/// Size/degree statistics a synthetic dataset should reproduce.
struct DatasetStats {
  double mean_nodes = 0.0;
  double mean_edges = 0.0;
  double mean_degree = 0.0;
  double degree_std = 1.0;
  int t_v = 1;  // label alphabet size
  bool directed = false;
};

/// Built-in presets mirroring the six reference datasets
/// (kki, cox2, cox2_md, dhfr, dblp_v1, msrc_21).
std::optional<DatasetStats> preset_stats(const std::string& name);
std::vector<std::string> preset_names();

/// Flat `key = value` stats file; unknown keys are errors.
DatasetStats parse_stats_file(const std::string& path);

/// Connected labelled graph with node count close to mean_nodes and node
/// degrees approximately Normal(mean_degree, degree_std^2). Directed stats
/// orient every edge from the smaller label to the larger one (ties by node
/// id). Deterministic per seed. Throws Error(unsatisfiable_stats).
Graph synth_target(const DatasetStats& stats, std::uint64_t seed);

/// Induced subgraph on a connected, randomly grown node subset plus the
/// sampling correspondence; verify_mapping holds by construction.
std::pair<Graph, Mapping> sample_positive_query(const Graph& target, int size,
                                                std::uint64_t seed);

/// Positive-query perturbation (edge addition, rewiring/deletion, or a
/// relabel) certified non-isomorphic by the exact oracle; retries up to
/// max_attempts before throwing Error(negative_generation_failed).
Graph sample_negative_query(const Graph& target, int size, std::uint64_t seed,
                            int max_attempts = 50);

/// Writes targets, queries, positive mappings, a manifest and a dataset.conf
/// sidecar under out_dir; returns the manifest path. Exactly half the queries
/// per target are positive (odd counts round positives up); sizes are uniform
/// over [2, |V_T|]. Byte-identical output for identical inputs.
std::string build_dataset(const DatasetStats& stats, int n_targets, int queries_per_target,
                          std::uint64_t seed, const std::string& out_dir);

struct ManifestEntry {
  std::string target_path;
  std::string query_path;
  int label = 0;
  std::string mapping_path;  // empty for negatives
};

std::vector<ManifestEntry> read_manifest(const std::string& manifest_path);

Mapping read_mapping_file(const std::string& path);
void write_mapping_file(const Mapping& mapping, const std::string& path);

/// Materialized dataset: targets are deduplicated, samples point into them.
struct LoadedSample {
  int target_index = 0;
  Graph query;
  int label = 0;
  std::optional<Mapping> mapping;
};

struct LoadedDataset {
  std::vector<Graph> targets;
  std::vector<LoadedSample> samples;
  const Graph& target_of(const LoadedSample& s) const { return targets[s.target_index]; }
};

/// Loads every sample referenced by a manifest; paths resolve relative to the
/// manifest's directory.
LoadedDataset load_dataset(const std::string& manifest_path);

/// Reads `tv = N` from the dataset.conf next to a manifest, if present.
std::optional<int> sidecar_t_v(const std::string& manifest_path);

}  // namespace xneusm
