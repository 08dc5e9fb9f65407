#ifndef INBD_METRICS_HPP
#define INBD_METRICS_HPP

#include <array>
#include <vector>

#include "inbd/common.hpp"
#include "inbd/raster.hpp"

namespace inbd {

// Pairwise pixel counts between ground-truth and predicted labels.
// Pixels with ground-truth label 0 are excluded.
struct ContingencyTable {
    int n_gt = 0;    // distinct gt labels (1..n_gt)
    int n_pred = 0;  // distinct pred labels (0..n_pred), 0 kept as a column
    std::vector<int64_t> counts;  // (n_gt) x (n_pred+1), row-major
    int64_t total = 0;

    int64_t at(int g, int p) const { return counts[static_cast<size_t>(g - 1) * (n_pred + 1) + p]; }
};

ContingencyTable contingency_table(const InstanceLabelMap& gt, const InstanceLabelMap& pred);

// IoU between every (gt, pred) instance pair; label 0 excluded on both sides.
// Result is K_gt x K_pred, indexed [g-1][p-1].
std::vector<std::vector<real>> instance_iou_matrix(const InstanceLabelMap& gt,
                                                   const InstanceLabelMap& pred);

inline constexpr int MAR_N_THRESHOLDS = 10;  // IoU = .50 : .05 : .95

struct RecallResult {
    real mar = 0;
    std::array<real, MAR_N_THRESHOLDS> recalls_per_threshold{};
};

// Mean average recall over IoU thresholds .50:.05:.95, greedy matching in
// descending IoU with each instance used at most once.
// Throws NoGroundTruth if gt has no instances.
RecallResult mean_average_recall_detailed(const InstanceLabelMap& gt, const InstanceLabelMap& pred);
real mean_average_recall(const InstanceLabelMap& gt, const InstanceLabelMap& pred);

// Adapted Rand error: 1 - F-score of pixel-pair precision/recall, computed
// from the contingency table with gt background excluded.
// Throws EmptyForeground if gt has no foreground pixels.
real adapted_rand_error(const InstanceLabelMap& gt, const InstanceLabelMap& pred);

}  // namespace inbd

#endif
