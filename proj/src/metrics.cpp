#include "xneusm/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "xneusm/error.hpp"

namespace xneusm {

namespace {

void check_binary(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    fail(Errc::shape_mismatch, "scores and labels differ in length");
  int pos = 0, neg = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) fail(Errc::domain_error, "labels must be 0 or 1");
    (l == 1 ? pos : neg)++;
  }
  if (pos == 0 || neg == 0)
    fail(Errc::degenerate_labels, "both classes are required");
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average ranks within tie groups.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = avg;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (labels[t] == 1) {
      pos_rank_sum += rank[t];
      ++pos;
    }
  }
  const std::size_t neg = n - pos;
  return (pos_rank_sum - 0.5 * pos * (pos + 1)) / (static_cast<double>(pos) * neg);
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_binary(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::size_t total_pos = 0;
  for (int l : labels) total_pos += l;

  // Sweep thresholds downward, handling ties as one block:
  // AP = sum over blocks of (delta recall) * precision-at-block.
  double auc = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) {
      tp += labels[idx[t]];
      ++seen;
    }
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / seen;
    auc += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return auc;
}

F1Accuracy f1_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
  if (scores.size() != labels.size())
    fail(Errc::shape_mismatch, "scores and labels differ in length");
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= threshold ? 1 : 0;
    if (pred == labels[i]) ++correct;
    if (pred == 1 && labels[i] == 1) ++tp;
    if (pred == 1 && labels[i] == 0) ++fp;
    if (pred == 0 && labels[i] == 1) ++fn;
  }
  F1Accuracy out;
  out.accuracy = scores.empty() ? 0.0 : static_cast<double>(correct) / scores.size();
  const double denom = static_cast<double>(2 * tp + fp + fn);
  out.f1 = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
  return out;
}

std::vector<int> mapping_ranks(const Explanation& explanation, const Mapping& mapping) {
  if (mapping.size() != explanation.rankings.size())
    fail(Errc::missing_mapping, "mapping does not cover the pattern nodes");
  std::vector<int> ranks(mapping.size(), 0);
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    const auto& candidates = explanation.rankings[i];
    for (std::size_t r = 0; r < candidates.size(); ++r) {
      if (candidates[r].first == mapping[i]) {
        ranks[i] = static_cast<int>(r) + 1;
        break;
      }
    }
  }
  return ranks;
}

double topk_accuracy(const std::vector<std::vector<int>>& ranks_per_sample, int k) {
  if (ranks_per_sample.empty()) fail(Errc::missing_mapping, "no ranked samples");
  double total = 0.0;
  for (const auto& ranks : ranks_per_sample) {
    double hits = 0.0;
    for (int r : ranks)
      if (r >= 1 && r <= k) hits += 1.0;
    total += ranks.empty() ? 0.0 : hits / ranks.size();
  }
  return total / ranks_per_sample.size();
}

double mrr(const std::vector<std::vector<int>>& ranks_per_sample) {
  if (ranks_per_sample.empty()) fail(Errc::missing_mapping, "no ranked samples");
  double total = 0.0;
  for (const auto& ranks : ranks_per_sample) {
    double acc = 0.0;
    for (int r : ranks)
      if (r >= 1) acc += 1.0 / r;
    total += ranks.empty() ? 0.0 : acc / ranks.size();
  }
  return total / ranks_per_sample.size();
}

}  // namespace xneusm
