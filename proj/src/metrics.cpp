#include "inbd/metrics.hpp"

#include <algorithm>
#include <tuple>

namespace inbd {

ContingencyTable contingency_table(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    if (gt.height != pred.height || gt.width != pred.width)
        throw ShapeMismatch("contingency_table: label maps differ in size");
    ContingencyTable t;
    t.n_gt = gt.max_label();
    t.n_pred = pred.max_label();
    t.counts.assign(static_cast<size_t>(std::max(t.n_gt, 0)) * (t.n_pred + 1), 0);
    for (size_t i = 0; i < gt.labels.size(); ++i) {
        const int32_t g = gt.labels[i];
        if (g == 0) continue;  // gt background excluded from pair statistics
        const int32_t p = pred.labels[i];
        ++t.counts[static_cast<size_t>(g - 1) * (t.n_pred + 1) + p];
        ++t.total;
    }
    return t;
}

std::vector<std::vector<real>> instance_iou_matrix(const InstanceLabelMap& gt,
                                                   const InstanceLabelMap& pred) {
    if (gt.height != pred.height || gt.width != pred.width)
        throw ShapeMismatch("instance_iou_matrix: label maps differ in size");
    const int kg = gt.max_label(), kp = pred.max_label();
    std::vector<int64_t> gt_area(kg + 1, 0), pred_area(kp + 1, 0);
    std::vector<int64_t> inter(static_cast<size_t>(kg + 1) * (kp + 1), 0);
    for (size_t i = 0; i < gt.labels.size(); ++i) {
        const int32_t g = gt.labels[i], p = pred.labels[i];
        ++gt_area[g];
        ++pred_area[p];
        ++inter[static_cast<size_t>(g) * (kp + 1) + p];
    }
    std::vector<std::vector<real>> iou(kg, std::vector<real>(kp, 0));
    for (int g = 1; g <= kg; ++g)
        for (int p = 1; p <= kp; ++p) {
            const int64_t in = inter[static_cast<size_t>(g) * (kp + 1) + p];
            const int64_t un = gt_area[g] + pred_area[p] - in;
            iou[g - 1][p - 1] = un > 0 ? static_cast<real>(in) / static_cast<real>(un) : 0;
        }
    return iou;
}

RecallResult mean_average_recall_detailed(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    const auto iou = instance_iou_matrix(gt, pred);
    const int kg = static_cast<int>(iou.size());
    if (kg == 0) throw NoGroundTruth("mean_average_recall: ground truth has no instances");
    const int kp = kg > 0 ? static_cast<int>(iou[0].size()) : 0;

    // candidate matches sorted by descending IoU; ties broken by index
    std::vector<std::tuple<real, int, int>> cands;
    for (int g = 0; g < kg; ++g)
        for (int p = 0; p < kp; ++p)
            if (iou[g][p] > 0) cands.emplace_back(iou[g][p], g, p);
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });

    RecallResult res;
    real sum = 0;
    for (int t = 0; t < MAR_N_THRESHOLDS; ++t) {
        const real thr = 0.50 + 0.05 * t;
        std::vector<bool> gt_used(kg, false), pred_used(kp, false);
        int matches = 0;
        for (const auto& [v, g, p] : cands) {
            if (v < thr) break;
            if (gt_used[g] || pred_used[p]) continue;
            gt_used[g] = pred_used[p] = true;
            ++matches;
        }
        res.recalls_per_threshold[t] = static_cast<real>(matches) / kg;
        sum += res.recalls_per_threshold[t];
    }
    res.mar = sum / MAR_N_THRESHOLDS;
    return res;
}

real mean_average_recall(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    return mean_average_recall_detailed(gt, pred).mar;
}

real adapted_rand_error(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    const ContingencyTable t = contingency_table(gt, pred);
    if (t.total == 0) throw EmptyForeground("adapted_rand_error: ground truth is all background");
    real sum_sq = 0;
    std::vector<real> col_sum(t.n_pred + 1, 0);
    real row_sq = 0;
    for (int g = 1; g <= t.n_gt; ++g) {
        real row = 0;
        for (int p = 0; p <= t.n_pred; ++p) {
            const real c = static_cast<real>(t.at(g, p));
            sum_sq += c * c;
            col_sum[p] += c;
            row += c;
        }
        row_sq += row * row;
    }
    real col_sq = 0;
    for (real c : col_sum) col_sq += c * c;
    const real precision = sum_sq / col_sq;
    const real recall = sum_sq / row_sq;
    return 1.0 - 2.0 * precision * recall / (precision + recall);
}

}  // namespace inbd
