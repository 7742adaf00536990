#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cofipara/boxes.hpp"
#include "cofipara/common.hpp"
#include "cofipara/matching.hpp"

using namespace cofipara;

namespace {

// Random valid box whose corners stay inside the unit square.
BoundingBox random_box(Rng& rng) {
    double x1 = rng.uniform(0.0, 0.98);
    double x2 = rng.uniform(x1 + 0.01, 1.0);
    double y1 = rng.uniform(0.0, 0.98);
    double y2 = rng.uniform(y1 + 0.01, 1.0);
    return from_corner(x1, y1, x2, y2);
}

// Exhaustive minimum-cost injection of ground truths into predictions.
double brute_force_min_cost(const std::vector<ScoredBox>& preds,
                            const std::vector<BoundingBox>& gts, const MatchWeights& w) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    // Enumerate all permutations of predictions; the first |gts| positions are the pairing.
    std::sort(order.begin(), order.end());
    do {
        double c = 0.0;
        for (std::size_t g = 0; g < gts.size(); ++g) c += match_cost(preds[order[g]], gts[g], w);
        best = std::min(best, c);
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

}  // namespace

TEST_CASE("iou worked examples") {
    BoundingBox full = from_corner(0, 0, 1, 1);
    CHECK(iou(full, full) == doctest::Approx(1.0));
    BoundingBox half = from_corner(0.5, 0, 1, 1);
    CHECK(iou(full, half) == doctest::Approx(0.5));
    BoundingBox left = from_corner(0, 0, 0.2, 0.2);
    BoundingBox right = from_corner(0.8, 0.8, 1, 1);
    CHECK(iou(left, right) == doctest::Approx(0.0));
}

TEST_CASE("giou worked examples match hand-derived values") {
    BoundingBox a = from_corner(0.1, 0.1, 0.6, 0.9);
    CHECK(giou(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    BoundingBox lhalf = from_corner(0, 0, 0.5, 1);
    BoundingBox rhalf = from_corner(0.5, 0, 1, 1);
    CHECK(std::abs(giou(lhalf, rhalf) - 0.0) < 1e-9);

    BoundingBox c1 = from_corner(0, 0, 0.2, 0.2);
    BoundingBox c2 = from_corner(0.8, 0.8, 1, 1);
    CHECK(std::abs(giou(c1, c2) - (-0.92)) < 1e-9);
}

TEST_CASE("giou properties over random pairs") {
    Rng rng(101);
    for (int i = 0; i < 2000; ++i) {
        BoundingBox a = random_box(rng);
        BoundingBox b = random_box(rng);
        double g = giou(a, b);
        double io = iou(a, b);
        CHECK(g >= -1.0 - 1e-12);
        CHECK(g <= 1.0 + 1e-12);
        CHECK(g <= io + 1e-12);
        CHECK(giou(a, b) == doctest::Approx(giou(b, a)).epsilon(1e-12));
        CHECK(iou(a, b) == doctest::Approx(iou(b, a)).epsilon(1e-12));

        // Translate both by the same in-bounds offset.
        CornerBox ca = to_corner_clipped(a);
        CornerBox cb = to_corner_clipped(b);
        double max_dx = 1.0 - std::max(ca.x2, cb.x2);
        double max_dy = 1.0 - std::max(ca.y2, cb.y2);
        double dx = rng.uniform(0.0, max_dx);
        double dy = rng.uniform(0.0, max_dy);
        BoundingBox a2 = a, b2 = b;
        a2.cx += dx; a2.cy += dy;
        b2.cx += dx; b2.cy += dy;
        CHECK(std::abs(giou(a2, b2) - g) < 1e-9);
        CHECK(std::abs(iou(a2, b2) - io) < 1e-9);
    }
}

TEST_CASE("matching picks the overlapping prediction") {
    BoundingBox gt = from_corner(0.1, 0.1, 0.5, 0.5);
    std::vector<ScoredBox> preds = {
        {from_corner(0.12, 0.12, 0.52, 0.52), 0.9},
        {from_corner(0.7, 0.7, 0.95, 0.95), 0.9},
    };
    Assignment a = match_predictions(preds, {gt});
    REQUIRE(a.pred_for_gt.size() == 1);
    CHECK(a.pred_for_gt[0] == 0);
}

TEST_CASE("matching with zero ground truths is empty") {
    std::vector<ScoredBox> preds = {{from_corner(0.1, 0.1, 0.3, 0.3), 0.5}};
    Assignment a = match_predictions(preds, {});
    CHECK(a.pred_for_gt.empty());
    CHECK(a.total_cost == 0.0);
}

TEST_CASE("matching rejects more ground truths than predictions") {
    std::vector<ScoredBox> preds = {{from_corner(0.1, 0.1, 0.3, 0.3), 0.5}};
    std::vector<BoundingBox> gts = {from_corner(0, 0, 0.5, 0.5), from_corner(0.5, 0.5, 1, 1)};
    CHECK_THROWS_AS(match_predictions(preds, gts), ContractViolation);
}

TEST_CASE("matching equals brute-force enumeration on random instances") {
    Rng rng(202);
    MatchWeights w;
    for (int trial = 0; trial < 200; ++trial) {
        int n_gt = 1 + static_cast<int>(rng.below(4));
        int n_pred = n_gt + static_cast<int>(rng.below(static_cast<std::uint64_t>(7 - n_gt)));
        std::vector<BoundingBox> gts;
        std::vector<ScoredBox> preds;
        for (int i = 0; i < n_gt; ++i) gts.push_back(random_box(rng));
        for (int i = 0; i < n_pred; ++i) preds.push_back({random_box(rng), rng.uniform(0.05, 1.0)});
        Assignment a = match_predictions(preds, gts, w);
        double expect = brute_force_min_cost(preds, gts, w);
        CHECK(a.total_cost == expect);
    }
}
