#include "nearmiss/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace nearmiss {

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a < 0.0) {
        a += two_pi;
    }
    return a - std::numbers::pi;
}

std::array<Vec2, 4> OrientedBox::corners() const {
    const Vec2 fwd = heading_vec(heading);
    const Vec2 side{-fwd.y, fwd.x};
    const Vec2 hl = fwd * (length * 0.5);
    const Vec2 hw = side * (width * 0.5);
    return {center + hl + hw, center + hl - hw, center - hl - hw, center - hl + hw};
}

namespace {

struct Interval {
    double lo;
    double hi;
};

Interval project(const std::array<Vec2, 4>& pts, Vec2 axis) {
    double lo = dot(pts[0], axis);
    double hi = lo;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double v = dot(pts[i], axis);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

} // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
    const auto ca = a.corners();
    const auto cb = b.corners();
    const std::array<Vec2, 4> axes = {
        heading_vec(a.heading), Vec2{-std::sin(a.heading), std::cos(a.heading)},
        heading_vec(b.heading), Vec2{-std::sin(b.heading), std::cos(b.heading)}};
    for (const Vec2& axis : axes) {
        const Interval ia = project(ca, axis);
        const Interval ib = project(cb, axis);
        if (ia.hi < ib.lo || ib.hi < ia.lo) {
            return false;
        }
    }
    return true;
}

bool point_in_box(const OrientedBox& b, Vec2 p) {
    const Vec2 rel = p - b.center;
    const Vec2 fwd = heading_vec(b.heading);
    const double u = dot(rel, fwd);
    const double v = cross(fwd, rel);
    return std::abs(u) <= b.length * 0.5 && std::abs(v) <= b.width * 0.5;
}

Vec2 closest_point_in_box(const OrientedBox& b, Vec2 p) {
    const Vec2 rel = p - b.center;
    const Vec2 fwd = heading_vec(b.heading);
    const Vec2 side{-fwd.y, fwd.x};
    const double u = std::clamp(dot(rel, fwd), -b.length * 0.5, b.length * 0.5);
    const double v = std::clamp(dot(rel, side), -b.width * 0.5, b.width * 0.5);
    return b.center + fwd * u + side * v;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const auto orient = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);

    if (((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
        ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))) {
        return true;
    }

    const auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
        return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
               std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
    };
    if (d1 == 0.0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0.0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0.0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0.0 && on_segment(p1, p2, q2)) return true;
    return false;
}

double segment_segment_distance(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    if (segments_intersect(p1, p2, q1, q2)) {
        return 0.0;
    }
    return std::min(
        std::min(point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2)),
        std::min(point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)));
}

double box_distance(const OrientedBox& a, const OrientedBox& b) {
    if (boxes_overlap(a, b)) {
        return 0.0;
    }
    const auto ca = a.corners();
    const auto cb = b.corners();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, segment_segment_distance(ca[i], ca[(i + 1) % 4],
                                                           cb[j], cb[(j + 1) % 4]));
        }
    }
    return best;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
    cumulative_.reserve(points_.size());
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (i > 0) {
            s += distance(points_[i - 1], points_[i]);
        }
        cumulative_.push_back(s);
    }
}

double Polyline::project(Vec2 p) const {
    if (points_.empty()) {
        return 0.0;
    }
    if (points_.size() == 1) {
        return 0.0;
    }
    double best_dist = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        const Vec2 a = points_[i];
        const Vec2 b = points_[i + 1];
        const Vec2 ab = b - a;
        const double len2 = dot(ab, ab);
        const double t = len2 == 0.0 ? 0.0 : std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
        const Vec2 q = a + ab * t;
        const double d = distance(p, q);
        if (d < best_dist) {
            best_dist = d;
            best_s = cumulative_[i] + t * std::sqrt(len2);
        }
    }
    return best_s;
}

Vec2 Polyline::sample(double s) const {
    if (points_.empty()) {
        return {};
    }
    if (points_.size() == 1 || s <= 0.0) {
        return points_.front();
    }
    if (s >= length()) {
        return points_.back();
    }
    const std::size_t i = segment_at(s);
    const double seg_len = cumulative_[i + 1] - cumulative_[i];
    const double t = seg_len == 0.0 ? 0.0 : (s - cumulative_[i]) / seg_len;
    return points_[i] + (points_[i + 1] - points_[i]) * t;
}

std::size_t Polyline::segment_at(double s) const {
    if (points_.size() < 2) {
        return 0;
    }
    // First segment whose end covers s.
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        if (s <= cumulative_[i + 1]) {
            return i;
        }
    }
    return points_.size() - 2;
}

} // namespace nearmiss
