#pragma once

#include <vector>

#include "cofipara/types.hpp"

namespace cofipara {

// Corner-form box used internally by the metric math. Corners are clipped to
// [0,1] when converting from a center-size box.
struct CornerBox {
    double x1, y1, x2, y2;
    double area() const { return (x2 - x1) * (y2 - y1); }
};

CornerBox to_corner_clipped(const BoundingBox& b);
BoundingBox from_corner(double x1, double y1, double x2, double y2);

// Intersection over union of two valid boxes, in [0,1]. Degenerate pairs with
// zero union evaluate to 0.
double iou(const BoundingBox& a, const BoundingBox& b);

// Generalized IoU: IoU - (hull - union)/hull, in [-1, 1].
double giou(const BoundingBox& a, const BoundingBox& b);

}  // namespace cofipara
