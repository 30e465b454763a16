#pragma once

// Planar geometry in a local east/north frame (meters). Headings follow the
// compass convention: 0 deg = north, angles grow clockwise, normalized to
// [0, 360). Bearings are signed, clockwise-positive, in [-180, 180).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmevo/errors.hpp"

namespace swarmevo {

struct Vec2 {
    double x = 0.0;  ///< meters east
    double y = 0.0;  ///< meters north

    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
constexpr double norm_sq(Vec2 a) noexcept { return dot(a, a); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

constexpr double deg_to_rad(double d) noexcept { return d * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double r) noexcept { return r * 180.0 / std::numbers::pi; }

/// Wraps any angle into [0, 360).
inline double normalize_heading(double deg) noexcept {
    double h = std::fmod(deg, 360.0);
    if (h < 0.0) {
        h += 360.0;
    }
    // fmod of a tiny negative value can round up to exactly 360
    return h >= 360.0 ? 0.0 : h;
}

/// Wraps any angle into [-180, 180).
inline double normalize_bearing(double deg) noexcept {
    double b = normalize_heading(deg + 180.0) - 180.0;
    return b >= 180.0 ? b - 360.0 : b;
}

/// Unit vector pointing along a compass heading.
inline Vec2 heading_vector(double heading_deg) noexcept {
    const double r = deg_to_rad(heading_deg);
    return {std::sin(r), std::cos(r)};
}

/// Compass heading of a direction vector; 0 for the zero vector.
inline double heading_of(Vec2 dir) noexcept {
    if (dir.x == 0.0 && dir.y == 0.0) {
        return 0.0;
    }
    return normalize_heading(rad_to_deg(std::atan2(dir.x, dir.y)));
}

struct Pose {
    Vec2 position;
    double heading = 0.0;  ///< degrees, [0, 360)
};

/// Signed clockwise angle from the observer's heading to the target, in
/// [-180, 180). Coincident points give 0.
inline double relative_bearing(const Pose& observer, Vec2 target) noexcept {
    const Vec2 d = target - observer.position;
    if (d.x == 0.0 && d.y == 0.0) {
        return 0.0;
    }
    const double absolute = rad_to_deg(std::atan2(d.x, d.y));
    return normalize_bearing(absolute - observer.heading);
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) noexcept {
    const Vec2 ab = b - a;
    const double len_sq = norm_sq(ab);
    if (len_sq == 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return distance(p, a + ab * t);
}

namespace detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c) noexcept {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) noexcept {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) noexcept {
    const int o1 = orientation(a, b, c);
    const int o2 = orientation(a, b, d);
    const int o3 = orientation(c, d, a);
    const int o4 = orientation(c, d, b);
    if (o1 != o2 && o3 != o4) {
        return true;
    }
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
           (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

}  // namespace detail

inline double signed_area(std::span<const Vec2> pts) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += cross(pts[i], pts[(i + 1) % pts.size()]);
    }
    return 0.5 * acc;
}

/// A simple polygon delimiting an operational or monitoring area.
/// Construction validates the polygon and throws ConfigError otherwise.
class GeoFence {
public:
    explicit GeoFence(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) { validate(); }

    [[nodiscard]] std::span<const Vec2> vertices() const noexcept { return vertices_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return vertices_.size(); }
    [[nodiscard]] Vec2 edge_start(std::size_t i) const noexcept { return vertices_[i]; }
    [[nodiscard]] Vec2 edge_end(std::size_t i) const noexcept {
        return vertices_[(i + 1) % vertices_.size()];
    }
    [[nodiscard]] double area() const noexcept { return std::abs(signed_area(vertices_)); }

    [[nodiscard]] Vec2 centroid() const noexcept {
        const double a = signed_area(vertices_);
        Vec2 c;
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const Vec2 p = vertices_[i];
            const Vec2 q = edge_end(i);
            const double w = cross(p, q);
            c += (p + q) * w;
        }
        return c * (1.0 / (6.0 * a));
    }

    /// Axis-aligned bounds as (min corner, max corner).
    [[nodiscard]] std::pair<Vec2, Vec2> bounds() const noexcept {
        Vec2 lo = vertices_.front();
        Vec2 hi = lo;
        for (const Vec2& v : vertices_) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
        }
        return {lo, hi};
    }

    /// Axis-aligned rectangle centred on `center`.
    static GeoFence rectangle(Vec2 center, double width, double height) {
        const double hx = width / 2.0;
        const double hy = height / 2.0;
        return GeoFence({{center.x - hx, center.y - hy},
                         {center.x + hx, center.y - hy},
                         {center.x + hx, center.y + hy},
                         {center.x - hx, center.y + hy}});
    }

private:
    void validate() const {
        const std::size_t n = vertices_.size();
        if (n < 3) {
            throw ConfigError("geo-fence needs at least 3 vertices, got " + std::to_string(n));
        }
        for (const Vec2& v : vertices_) {
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
                throw ConfigError("geo-fence vertex is not finite");
            }
        }
        if (std::abs(signed_area(vertices_)) <= 1e-12) {
            throw ConfigError("geo-fence has zero area");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (vertices_[i] == vertices_[(i + 1) % n]) {
                throw ConfigError("geo-fence has repeated consecutive vertices");
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
                if (adjacent) {
                    continue;
                }
                if (detail::segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                                               vertices_[(j + 1) % n])) {
                    throw ConfigError("geo-fence edges " + std::to_string(i) + " and " +
                                      std::to_string(j) + " intersect");
                }
            }
        }
    }

    std::vector<Vec2> vertices_;
};

/// Minimum distance from p to the fence boundary.
inline double distance_to_fence(Vec2 p, const GeoFence& fence) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fence.edge_count(); ++i) {
        best = std::min(best, point_segment_distance(p, fence.edge_start(i), fence.edge_end(i)));
    }
    return best;
}

/// Inside test; points on the boundary count as inside.
inline bool point_in_polygon(Vec2 p, const GeoFence& fence) noexcept {
    const auto v = fence.vertices();
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = v[j];
        const Vec2 b = v[i];
        if (detail::orientation(a, b, p) == 0 && detail::on_segment(a, b, p)) {
            return true;
        }
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

/// Portion of segment [a, b] lying inside the convex wedge with apex `apex`
/// spanning clockwise from `from_dir` to `to_dir` (opening below 180 deg).
/// Returns the clipped endpoints, or nothing when the segment misses the wedge.
inline std::optional<std::pair<Vec2, Vec2>> clip_segment_to_wedge(Vec2 a, Vec2 b, Vec2 apex,
                                                                  Vec2 from_dir,
                                                                  Vec2 to_dir) noexcept {
    // Wedge = {q : cross(q - apex, from_dir) >= 0} ∩ {q : cross(to_dir, q - apex) >= 0}
    // (clockwise sweep in an east/north frame).
    double t0 = 0.0;
    double t1 = 1.0;
    const Vec2 d = b - a;
    auto clip = [&](double f0, double df) {
        // keep t with f0 + df * t >= 0
        if (df == 0.0) {
            return f0 >= 0.0;
        }
        const double t = -f0 / df;
        if (df > 0.0) {
            t0 = std::max(t0, t);
        } else {
            t1 = std::min(t1, t);
        }
        return t0 <= t1;
    };
    const Vec2 ra = a - apex;
    if (!clip(cross(ra, from_dir), cross(d, from_dir))) {
        return std::nullopt;
    }
    if (!clip(cross(to_dir, ra), cross(to_dir, d))) {
        return std::nullopt;
    }
    return std::pair{a + d * t0, a + d * t1};
}

}  // namespace swarmevo
