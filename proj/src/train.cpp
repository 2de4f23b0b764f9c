#include "xneusm/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "xneusm/error.hpp"
#include "xneusm/metrics.hpp"
#include "xneusm/rng.hpp"

namespace xneusm {

using ad::Tensor;

Tensor bce_loss(const Tensor& y_hat, int label) {
  if (label != 0 && label != 1) fail(Errc::domain_error, "label must be 0 or 1");
  const Tensor p = label == 1 ? y_hat : ad::sub(Tensor::scalar(1.0), y_hat);
  return ad::scalar_mul(-1.0, ad::log_clamped(p));
}

Tensor me_loss(const std::vector<Tensor>& cross_attention, const JointInput& input,
               const Mapping& mapping) {
  if (mapping.empty()) fail(Errc::empty_true_pairs, "positive sample without mapped pairs");
  if (cross_attention.empty()) fail(Errc::domain_error, "no attention heads");
  const int n = input.n, pc = input.pattern_count;

  // Symmetrized cross scores, averaged over heads (the quantity the
  // explanation reports is the quantity the loss trains).
  Tensor scores;
  for (const Tensor& a : cross_attention) {
    Tensor sym = ad::add(a, ad::transpose(a));
    scores = scores.defined() ? ad::add(scores, sym) : sym;
  }
  scores = ad::scalar_mul(0.5 / static_cast<double>(cross_attention.size()), scores);

  std::vector<double> true_mask(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t p = 0; p < mapping.size(); ++p)
    true_mask[p * n + pc + mapping[p]] = 1.0;

  // Same-label cross pairs are exactly the cross block of a_cr; keep only the
  // (pattern row, target column) half so each pair counts once.
  std::vector<double> same_mask(static_cast<std::size_t>(n) * n, 0.0);
  for (int p = 0; p < pc; ++p)
    for (int t = pc; t < n; ++t)
      same_mask[static_cast<std::size_t>(p) * n + t] = input.a_cr[static_cast<std::size_t>(p) * n + t];

  Tensor weight = ad::exp(ad::scalar_mul(-1.0, scores));
  Tensor numerator = ad::sum_all(ad::mul(weight, Tensor::constant(n, n, std::move(true_mask))));
  Tensor same_sum = ad::sum_all(ad::mul(weight, Tensor::constant(n, n, std::move(same_mask))));
  Tensor denominator = ad::add(ad::sub(same_sum, numerator), Tensor::scalar(1.0));
  return ad::div(numerator, denominator);
}

void Adam::step(std::vector<std::pair<std::string, Tensor>>& params) {
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].second.size(), 0.0);
      v_[i].assign(params[i].second.size(), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i].second;
    const auto& g = p.grad();
    auto& value = p.raw_value();
    for (std::size_t j = 0; j < value.size(); ++j) {
      m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
      v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    p.zero_grad();
  }
}

EvalMetrics evaluate_model(const ModelParams& params, const LoadedDataset& data) {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::vector<int>> ranks;
  for (const auto& sample : data.samples) {
    const JointInput ji = encode_pair(sample.query, data.target_of(sample), params.config.t_v);
    ForwardResult fwd = model_forward(ji, params);
    scores.push_back(fwd.y_hat.item());
    labels.push_back(sample.label);
    if (sample.label == 1 && sample.mapping) {
      const Explanation ex =
          extract_mapping(fwd.cross_attention, ji.pattern_count, params.config.epsilon);
      ranks.push_back(mapping_ranks(ex, *sample.mapping));
    }
  }
  EvalMetrics m;
  m.samples = static_cast<int>(scores.size());
  m.ranked_positives = static_cast<int>(ranks.size());
  m.roc_auc = roc_auc(scores, labels);
  m.pr_auc = pr_auc(scores, labels);
  const F1Accuracy fa = f1_accuracy(scores, labels);
  m.f1 = fa.f1;
  m.accuracy = fa.accuracy;
  if (!ranks.empty()) {
    m.top1 = topk_accuracy(ranks, 1);
    m.top5 = topk_accuracy(ranks, 5);
    m.top10 = topk_accuracy(ranks, 10);
    m.mrr = mrr(ranks);
  }
  return m;
}

std::vector<SweepRow> confidence_sweep(const std::vector<double>& scores,
                                       const std::vector<int>& labels,
                                       const std::vector<double>& thresholds) {
  std::vector<SweepRow> rows;
  for (double threshold : thresholds) {
    std::vector<double> kept_scores;
    std::vector<int> kept_labels;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (std::max(scores[i], 1.0 - scores[i]) >= threshold) {
        kept_scores.push_back(scores[i]);
        kept_labels.push_back(labels[i]);
      }
    }
    SweepRow row;
    row.threshold = threshold;
    row.kept = static_cast<int>(kept_scores.size());
    row.coverage = scores.empty() ? 0.0 : static_cast<double>(row.kept) / scores.size();
    const F1Accuracy fa = f1_accuracy(kept_scores, kept_labels);
    row.f1 = fa.f1;
    row.accuracy = fa.accuracy;
    rows.push_back(row);
  }
  return rows;
}

namespace {

void write_metrics_row(std::ofstream& out, int epoch, const char* split, double loss_sm,
                       double loss_me, const EvalMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", epoch,
                split, loss_sm, loss_me, m.roc_auc, m.pr_auc, m.f1, m.accuracy, m.top1, m.mrr);
  out << buf;
}

}  // namespace

TrainResult train_model(ModelParams& params, const LoadedDataset& train,
                        const LoadedDataset* held_out, const TrainConfig& config,
                        const std::string& metrics_csv_path) {
  auto named = params.named_tensors();
  Adam optimizer(config.learning_rate, config.beta1, config.beta2, config.adam_eps);
  Rng shuffle_rng(derive_seed(config.seed, 0x5475ff, 0));

  std::ofstream csv(metrics_csv_path);
  if (!csv) fail(Errc::io_error, "cannot write " + metrics_csv_path);
  csv << "epoch,split,loss_sm,loss_me,roc_auc,pr_auc,f1,acc,top1,mrr\n";

  TrainResult result;
  std::vector<std::size_t> order(train.samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);

    double sum_sm = 0.0, sum_me = 0.0;
    std::size_t positives = 0;
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::vector<int>> ranks;

    const int batch = std::max(1, config.batch_size);
    int in_batch = 0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const std::size_t idx = order[pos];
      const LoadedSample& sample = train.samples[idx];
      const JointInput ji = encode_pair(sample.query, train.target_of(sample), params.config.t_v);
      ForwardResult fwd = model_forward(ji, params);

      Tensor loss = bce_loss(fwd.y_hat, sample.label);
      const double sm = loss.item();
      double me = 0.0;
      if (sample.label == 1) {
        if (!sample.mapping) fail(Errc::empty_true_pairs, "positive sample without mapping");
        if (config.lambda != 0.0) {
          Tensor lme = me_loss(fwd.cross_attention, ji, *sample.mapping);
          me = lme.item();
          loss = ad::add(loss, ad::scalar_mul(config.lambda, lme));
        }
        ++positives;
      }
      if (!std::isfinite(loss.item()))
        fail(Errc::non_finite_loss, "sample " + std::to_string(idx) + " in epoch " +
                                        std::to_string(epoch));

      // Gradients accumulate across the batch; the 1/batch factor makes the
      // step use the batch-mean gradient.
      ad::backward(ad::scalar_mul(1.0 / batch, loss));
      if (++in_batch == batch || pos + 1 == order.size()) {
        optimizer.step(named);
        in_batch = 0;
      }

      sum_sm += sm;
      sum_me += me;
      scores.push_back(fwd.y_hat.item());
      labels.push_back(sample.label);
      if (sample.label == 1 && sample.mapping) {
        const Explanation ex =
            extract_mapping(fwd.cross_attention, ji.pattern_count, params.config.epsilon);
        ranks.push_back(mapping_ranks(ex, *sample.mapping));
      }
    }

    const double mean_sm = sum_sm / static_cast<double>(train.samples.size());
    const double mean_me = positives ? sum_me / static_cast<double>(positives) : 0.0;
    result.epoch_loss_sm.push_back(mean_sm);
    result.epoch_loss_me.push_back(mean_me);

    EvalMetrics train_metrics;
    const bool both_classes = positives > 0 && positives < train.samples.size();
    if (both_classes) {
      train_metrics.roc_auc = roc_auc(scores, labels);
      train_metrics.pr_auc = pr_auc(scores, labels);
    }
    const F1Accuracy fa = f1_accuracy(scores, labels);
    train_metrics.f1 = fa.f1;
    train_metrics.accuracy = fa.accuracy;
    if (!ranks.empty()) {
      train_metrics.top1 = topk_accuracy(ranks, 1);
      train_metrics.mrr = mrr(ranks);
    }
    write_metrics_row(csv, epoch, "train", mean_sm, mean_me, train_metrics);

    if (held_out) {
      const EvalMetrics ev = evaluate_model(params, *held_out);
      write_metrics_row(csv, epoch, "eval", 0.0, 0.0, ev);
      if (epoch == config.epochs) result.final_eval = ev;
    }
    csv.flush();
  }
  return result;
}

}  // namespace xneusm
