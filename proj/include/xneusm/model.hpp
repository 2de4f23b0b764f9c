#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xneusm/encode.hpp"
#include "xneusm/glema.hpp"
#include "xneusm/tensor.hpp"

namespace xneusm {

enum class HopSchedule { one, increasing, interleaved };

const char* hop_schedule_name(HopSchedule s);
HopSchedule hop_schedule_from_name(const std::string& name);

struct ModelConfig {
  int t_v = 0;
  int hidden_dim = 140;   // F'
  int num_layers = 4;     // L_G
  int num_heads = 1;      // H
  int fc_layers = 4;      // L_FC
  int fc_hidden = 128;
  double leaky_slope = 0.2;
  HopSchedule hop_schedule = HopSchedule::interleaved;
  bool shared_branches = false;
  double epsilon = 0.5;  // explanation threshold
  double lambda = 1.0;   // explanation loss weight

  // 1-indexed layer -> diffusion steps (interleaved default: 1,3,5,7,...).
  int hops_for_layer(int layer) const {
    switch (hop_schedule) {
      case HopSchedule::one: return 1;
      case HopSchedule::increasing: return layer;
      case HopSchedule::interleaved: return 2 * layer - 1;
    }
    return 1;
  }
};

struct ModelParams {
  ModelConfig config;
  struct Layer {
    GlemaLayerParams intra;
    GlemaLayerParams cross;  // aliases intra when config.shared_branches
  };
  std::vector<Layer> layers;
  std::vector<ad::Tensor> fc_w, fc_b;  // L_FC - 1 hidden affine layers
  ad::Tensor out_w, out_b;             // final affine into the sigmoid

  static ModelParams init(const ModelConfig& config, std::uint64_t seed);

  /// Unique learnable tensors in a stable order (shared branches appear once).
  std::vector<std::pair<std::string, ad::Tensor>> named_tensors();
};

struct ForwardResult {
  ad::Tensor y_hat;                         // (1,1), strictly inside (0,1)
  std::vector<ad::Tensor> cross_attention;  // last cross-branch layer, per head
  int pattern_count = 0;
};

/// Runs the stacked dual-branch network on one encoded pair. The returned
/// attention feeds both the explanation extraction and the explanation loss.
ForwardResult model_forward(const JointInput& input, const ModelParams& params);

struct Explanation {
  struct Triple {
    int pattern_node;
    int target_node;
    double p;
  };
  std::vector<Triple> triples;  // pairs with p >= epsilon (and p > 0)
  // Per pattern node: candidate target nodes with nonzero score, best first,
  // ties broken by ascending target node id.
  std::vector<std::vector<std::pair<int, double>>> rankings;
};

/// Symmetrized cross-attention scores p_ij = (a_ij + a_ji) / 2, averaged over
/// heads, filtered at epsilon. Rankings cover all nonzero candidates
/// regardless of the threshold.
Explanation extract_mapping(const std::vector<ad::Tensor>& cross_attention, int pattern_count,
                            double epsilon);

void save_checkpoint(ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace xneusm
