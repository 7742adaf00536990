#pragma once

#include <vector>

#include "cofipara/types.hpp"

namespace cofipara {

struct MatchWeights {
    double alpha = 0.2;   // L1 term
    double beta = 1e-3;   // 1 - GIoU term
    double gamma = 0.1;   // -log confidence term
};

// One (ground truth -> prediction) pairing. Queries absent from the list are
// "no object".
struct Assignment {
    std::vector<int> pred_for_gt;  // size |gts|; value is a prediction index
    double total_cost = 0.0;
};

// Pairwise matching cost mirroring the image-loss terms:
//   alpha * mean|coord delta| + beta * (1 - GIoU) + gamma * (-log confidence).
double match_cost(const ScoredBox& pred, const BoundingBox& gt, const MatchWeights& w);

// Optimal one-to-one assignment of ground truths to predictions minimizing the
// summed match cost (Hungarian algorithm). Requires |gts| <= |preds|.
Assignment match_predictions(const std::vector<ScoredBox>& preds,
                             const std::vector<BoundingBox>& gts,
                             const MatchWeights& w = MatchWeights{});

// Minimum-cost row->column assignment for an arbitrary rectangular cost matrix
// (rows <= cols). Exposed for reuse by tests and the loss path.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost);

}  // namespace cofipara
