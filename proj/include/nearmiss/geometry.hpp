#ifndef NEARMISS_GEOMETRY_HPP
#define NEARMISS_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <vector>

namespace nearmiss {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 heading_vec(double heading) { return {std::cos(heading), std::sin(heading)}; }

// Normalize an angle to [-pi, pi).
double wrap_angle(double a);

// Axis-aligned footprint in a local frame, placed in the world by center
// position and heading. length runs along the heading, width across it.
struct OrientedBox {
    Vec2 center;
    double heading = 0.0;
    double length = 0.0;
    double width = 0.0;

    std::array<Vec2, 4> corners() const;
};

// Separating-axis overlap test (touching counts as overlap).
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

// Minimum edge-to-edge distance between two boxes; 0 when they overlap.
double box_distance(const OrientedBox& a, const OrientedBox& b);

// Point of `b` (treated as solid) closest to a world point.
Vec2 closest_point_in_box(const OrientedBox& b, Vec2 p);

bool point_in_box(const OrientedBox& b, Vec2 p);

// Closed-segment intersection; collinear touching/overlap counts.
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
double segment_segment_distance(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

// Arc-length parameterized polyline for path following: project a point to
// its arc position, sample a point at an arc position.
class Polyline {
public:
    Polyline() = default;
    explicit Polyline(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return points_; }
    double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    bool empty() const { return points_.size() < 2; }

    // Arc length of the closest point on the polyline.
    double project(Vec2 p) const;

    // Point at arc length s, clamped to [0, length()].
    Vec2 sample(double s) const;

    // Index of the segment containing arc length s (clamped).
    std::size_t segment_at(double s) const;

private:
    std::vector<Vec2> points_;
    std::vector<double> cumulative_;
};

} // namespace nearmiss

#endif
