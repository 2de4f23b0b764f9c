#pragma once

#include <vector>

#include "xneusm/graph.hpp"
#include "xneusm/model.hpp"

namespace xneusm {

/// Rank statistic (Mann-Whitney) with ties counted half. Throws
/// Error(degenerate_labels) unless both classes are present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Area under the precision-recall curve via precision steps over recall
/// (average-precision form). Same degenerate-label contract as roc_auc.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct F1Accuracy {
  double f1 = 0.0;
  double accuracy = 0.0;
};

F1Accuracy f1_accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold = 0.5);

/// Rank of each pattern node's true target in its candidate ranking
/// (1-based); 0 encodes "absent from the candidate list" (rank infinity).
/// Throws Error(missing_mapping) when the mapping does not cover the pattern.
std::vector<int> mapping_ranks(const Explanation& explanation, const Mapping& mapping);

/// Node-level hit rate within the top K, averaged over pattern nodes and then
/// over samples.
double topk_accuracy(const std::vector<std::vector<int>>& ranks_per_sample, int k);

/// Mean reciprocal rank with the same double averaging; absent nodes
/// contribute zero.
double mrr(const std::vector<std::vector<int>>& ranks_per_sample);

}  // namespace xneusm
