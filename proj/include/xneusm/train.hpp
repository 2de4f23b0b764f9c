#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xneusm/dataset.hpp"
#include "xneusm/model.hpp"
#include "xneusm/tensor.hpp"

namespace xneusm {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 30;
  double lambda = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Gradients are averaged over this many consecutive samples per optimizer
  // step (the trailing partial batch steps too).
  int batch_size = 1;
};

/// Binary cross-entropy -[y log p + (1-y) log(1-p)] with the tensor engine's
/// log clamp; stays on the tape.
ad::Tensor bce_loss(const ad::Tensor& y_hat, int label);

/// Attention contrast loss for one positive sample. Coefficients are the
/// symmetrized cross-block scores p = (a_ij + a_ji)/2 averaged over heads;
/// numerator sums exp(-p) over mapped pairs, the denominator sums exp(-p)
/// over all same-label cross pairs minus the numerator plus one (so it stays
/// >= 1). Throws Error(empty_true_pairs) for an empty mapping.
ad::Tensor me_loss(const std::vector<ad::Tensor>& cross_attention, const JointInput& input,
                   const Mapping& mapping);

/// Standard Adam with bias correction, one state slot per named tensor.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<std::pair<std::string, ad::Tensor>>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct EvalMetrics {
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
  double top10 = 0.0;
  double mrr = 0.0;
  int samples = 0;
  int ranked_positives = 0;
};

/// Forward-only pass over a dataset: decision metrics on all samples,
/// ranking metrics on the positives.
EvalMetrics evaluate_model(const ModelParams& params, const LoadedDataset& data);

struct SweepRow {
  double threshold = 0.0;
  int kept = 0;
  double coverage = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

/// Metrics restricted to predictions with confidence max(p, 1-p) >= threshold.
std::vector<SweepRow> confidence_sweep(const std::vector<double>& scores,
                                       const std::vector<int>& labels,
                                       const std::vector<double>& thresholds);

struct TrainResult {
  std::vector<double> epoch_loss_sm;
  std::vector<double> epoch_loss_me;
  std::optional<EvalMetrics> final_eval;
};

/// Per-sample optimization of L = L_sm + lambda * L_me (the latter on
/// positives only). Writes the metrics CSV (header
/// epoch,split,loss_sm,loss_me,roc_auc,pr_auc,f1,acc,top1,mrr) as it goes and
/// the checkpoint at the end. Fixed seeds give bit-identical outputs. Throws
/// Error(non_finite_loss) naming the offending sample.
TrainResult train_model(ModelParams& params, const LoadedDataset& train,
                        const LoadedDataset* held_out, const TrainConfig& config,
                        const std::string& metrics_csv_path);

}  // namespace xneusm
