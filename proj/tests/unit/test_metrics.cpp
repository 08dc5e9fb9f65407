#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "inbd/metrics.hpp"

using namespace inbd;

namespace {

InstanceLabelMap random_map(int h, int w, int max_label, std::mt19937_64& rng) {
    InstanceLabelMap m(h, w);
    std::uniform_int_distribution<int> lab(0, max_label);
    for (auto& v : m.labels) v = lab(rng);
    return m;
}

// brute-force mAR: exhaustive IoU computation via pixel sets, greedy matching
// re-derived independently at each threshold
real mar_oracle(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    const int kg = gt.max_label(), kp = pred.max_label();
    REQUIRE(kg >= 1);
    std::vector<std::vector<real>> iou(kg, std::vector<real>(std::max(kp, 1), 0.0));
    for (int g = 1; g <= kg; ++g)
        for (int p = 1; p <= kp; ++p) {
            long inter = 0, uni = 0;
            for (size_t i = 0; i < gt.labels.size(); ++i) {
                const bool a = gt.labels[i] == g, b = pred.labels[i] == p;
                inter += a && b;
                uni += a || b;
            }
            iou[g - 1][p - 1] = uni == 0 ? 0.0 : static_cast<real>(inter) / uni;
        }
    real sum = 0;
    for (int t = 0; t < 10; ++t) {
        const real thr = 0.5 + 0.05 * t;
        // greedy: repeatedly take the highest-IoU unmatched pair above thr
        std::set<int> ug, up;
        int matched = 0;
        while (true) {
            real best = -1;
            int bg = -1, bp = -1;
            for (int g = 0; g < kg; ++g)
                for (int p = 0; p < kp; ++p) {
                    if (ug.count(g) || up.count(p)) continue;
                    if (iou[g][p] > best + 1e-15) {
                        best = iou[g][p];
                        bg = g;
                        bp = p;
                    }
                }
            if (bg < 0 || best < thr) break;
            ug.insert(bg);
            up.insert(bp);
            ++matched;
        }
        sum += static_cast<real>(matched) / kg;
    }
    return sum / 10;
}

// brute-force ARAND from raw pixel pair counting, gt background excluded
real arand_oracle(const InstanceLabelMap& gt, const InstanceLabelMap& pred) {
    std::map<std::pair<int, int>, long> cell;
    std::map<int, long> row, col;
    long total = 0;
    for (size_t i = 0; i < gt.labels.size(); ++i) {
        if (gt.labels[i] == 0) continue;
        ++cell[{gt.labels[i], pred.labels[i]}];
        ++row[gt.labels[i]];
        ++col[pred.labels[i]];
        ++total;
    }
    REQUIRE(total > 0);
    real sum_c2 = 0, sum_r2 = 0, sum_k2 = 0;
    for (auto& [k, v] : cell) sum_c2 += static_cast<real>(v) * v;
    for (auto& [k, v] : row) sum_r2 += static_cast<real>(v) * v;
    for (auto& [k, v] : col) sum_k2 += static_cast<real>(v) * v;
    const real precision = sum_c2 / sum_k2;
    const real recall = sum_c2 / sum_r2;
    return 1.0 - 2.0 * precision * recall / (precision + recall);
}

}  // namespace

TEST_CASE("mAR and ARAND match brute-force oracles on 200 random pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(2, 8), labs(1, 4);
    int tested = 0;
    while (tested < 200) {
        const int h = dim(rng), w = dim(rng);
        const InstanceLabelMap gt = random_map(h, w, labs(rng), rng);
        const InstanceLabelMap pred = random_map(h, w, labs(rng), rng);
        if (gt.max_label() < 1) continue;
        bool any_fg = false;
        for (auto v : gt.labels) any_fg |= v != 0;
        if (!any_fg) continue;
        ++tested;
        CHECK(mean_average_recall(gt, pred) == doctest::Approx(mar_oracle(gt, pred)).epsilon(1e-12));
        CHECK(adapted_rand_error(gt, pred) == doctest::Approx(arand_oracle(gt, pred)).epsilon(1e-12));
    }
}

TEST_CASE("perfect prediction: mAR = 1, ARAND = 0 exactly") {
    std::mt19937_64 rng(9);
    const InstanceLabelMap gt = random_map(10, 10, 3, rng);
    REQUIRE(gt.max_label() >= 1);
    CHECK(mean_average_recall(gt, gt) == 1.0);
    CHECK(adapted_rand_error(gt, gt) == 0.0);
    const RecallResult rr = mean_average_recall_detailed(gt, gt);
    CHECK(rr.recalls_per_threshold.size() == 10);
    for (real r : rr.recalls_per_threshold) CHECK(r == 1.0);
}

TEST_CASE("contingency table excludes ground-truth background") {
    InstanceLabelMap gt(2, 2), pred(2, 2);
    gt.labels = {0, 1, 1, 2};
    pred.labels = {1, 1, 0, 2};
    const ContingencyTable t = contingency_table(gt, pred);
    CHECK(t.total == 3);  // the gt-0 pixel is dropped
    CHECK(t.at(1, 1) == 1);
    CHECK(t.at(1, 0) == 1);  // pred background column is kept
    CHECK(t.at(2, 2) == 1);
}

TEST_CASE("metrics error cases") {
    InstanceLabelMap empty(3, 3);  // all zeros
    InstanceLabelMap pred(3, 3);
    CHECK_THROWS_AS(mean_average_recall(empty, pred), NoGroundTruth);
    CHECK_THROWS_AS(adapted_rand_error(empty, pred), EmptyForeground);
    InstanceLabelMap other(2, 2);
    CHECK_THROWS_AS(contingency_table(empty, other), ShapeMismatch);
}

TEST_CASE("instance IoU matrix against direct counting") {
    InstanceLabelMap gt(2, 3), pred(2, 3);
    gt.labels = {1, 1, 2, 2, 0, 0};
    pred.labels = {1, 2, 2, 2, 2, 0};
    const auto iou = instance_iou_matrix(gt, pred);
    REQUIRE(iou.size() == 2);
    REQUIRE(iou[0].size() == 2);
    CHECK(iou[0][0] == doctest::Approx(1.0 / 2.0));   // gt1 {0,1} vs pred1 {0}
    CHECK(iou[0][1] == doctest::Approx(1.0 / 5.0));   // gt1 vs pred2 {1,2,3,4}
    CHECK(iou[1][1] == doctest::Approx(2.0 / 4.0));   // gt2 {2,3} vs pred2
    CHECK(iou[1][0] == doctest::Approx(0.0));
}

TEST_CASE("mAR is invariant to a permutation of predicted labels") {
    std::mt19937_64 rng(77);
    const InstanceLabelMap gt = random_map(8, 8, 3, rng);
    InstanceLabelMap pred = random_map(8, 8, 3, rng);
    REQUIRE(gt.max_label() >= 1);
    const real base = mean_average_recall(gt, pred);
    InstanceLabelMap permuted = pred;
    const int perm[4] = {0, 3, 1, 2};  // label 0 stays background
    for (auto& v : permuted.labels) v = perm[v];
    CHECK(mean_average_recall(gt, permuted) == doctest::Approx(base).epsilon(1e-12));
    CHECK(adapted_rand_error(gt, permuted) ==
          doctest::Approx(adapted_rand_error(gt, pred)).epsilon(1e-12));
}
