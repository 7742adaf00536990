#include "cofipara/boxes.hpp"

#include <algorithm>

#include "cofipara/common.hpp"

namespace cofipara {

CornerBox to_corner_clipped(const BoundingBox& b) {
    CornerBox c;
    c.x1 = std::clamp(b.cx - b.w / 2.0, 0.0, 1.0);
    c.y1 = std::clamp(b.cy - b.h / 2.0, 0.0, 1.0);
    c.x2 = std::clamp(b.cx + b.w / 2.0, 0.0, 1.0);
    c.y2 = std::clamp(b.cy + b.h / 2.0, 0.0, 1.0);
    return c;
}

BoundingBox from_corner(double x1, double y1, double x2, double y2) {
    BoundingBox b;
    b.cx = (x1 + x2) / 2.0;
    b.cy = (y1 + y2) / 2.0;
    b.w = x2 - x1;
    b.h = y2 - y1;
    return b;
}

namespace {
struct Overlap {
    double inter;
    double uni;
    double hull;
};

Overlap overlap(const BoundingBox& a, const BoundingBox& b) {
    CornerBox ca = to_corner_clipped(a);
    CornerBox cb = to_corner_clipped(b);
    double iw = std::max(0.0, std::min(ca.x2, cb.x2) - std::max(ca.x1, cb.x1));
    double ih = std::max(0.0, std::min(ca.y2, cb.y2) - std::max(ca.y1, cb.y1));
    Overlap o;
    o.inter = iw * ih;
    o.uni = ca.area() + cb.area() - o.inter;
    double hw = std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1);
    double hh = std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1);
    o.hull = hw * hh;
    return o;
}
}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    Overlap o = overlap(a, b);
    if (o.uni <= 0.0) return 0.0;
    return o.inter / o.uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) {
    Overlap o = overlap(a, b);
    if (o.uni <= 0.0) return 0.0;
    double v = o.inter / o.uni;
    if (o.hull > 0.0) v -= (o.hull - o.uni) / o.hull;
    return v;
}

}  // namespace cofipara
