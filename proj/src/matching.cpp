#include "cofipara/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cofipara/boxes.hpp"
#include "cofipara/common.hpp"

namespace cofipara {

double match_cost(const ScoredBox& pred, const BoundingBox& gt, const MatchWeights& w) {
    double l1 = (std::abs(pred.box.cx - gt.cx) + std::abs(pred.box.cy - gt.cy) +
                 std::abs(pred.box.w - gt.w) + std::abs(pred.box.h - gt.h)) /
                4.0;
    double g = giou(pred.box, gt);
    double conf = std::max(pred.confidence, 1e-12);
    return w.alpha * l1 + w.beta * (1.0 - g) + w.gamma * (-std::log(conf));
}

std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m = static_cast<int>(cost[0].size());
    if (m < n) throw ContractViolation("hungarian: more rows than columns");

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Potentials-based O(n^2 m) assignment, 1-indexed internally.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

Assignment match_predictions(const std::vector<ScoredBox>& preds,
                             const std::vector<BoundingBox>& gts, const MatchWeights& w) {
    if (gts.size() > preds.size())
        throw ContractViolation("match_predictions: more ground truths than predictions");
    Assignment out;
    if (gts.empty()) return out;

    std::vector<std::vector<double>> cost(gts.size(), std::vector<double>(preds.size()));
    for (std::size_t g = 0; g < gts.size(); ++g)
        for (std::size_t q = 0; q < preds.size(); ++q) cost[g][q] = match_cost(preds[q], gts[g], w);

    out.pred_for_gt = hungarian(cost);
    for (std::size_t g = 0; g < gts.size(); ++g) out.total_cost += cost[g][out.pred_for_gt[g]];
    return out;
}

}  // namespace cofipara
