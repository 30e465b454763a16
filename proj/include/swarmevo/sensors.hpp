#pragma once

// Controller inputs. A SensorFrame always holds 11 values in [0, 1], in this
// fixed order (saved genomes depend on it):
//
//   0      waypoint relative angle, (bearing + 180) / 360
//   1      waypoint distance, min(d, cap) / cap
//   2..5   robot sensor slices: front, right, back, left
//   6..9   geo-fence sensor slices: front, right, back, left
//   10     1 when inside the geo-fence, else 0
//
// Slices are relative to the heading: front [-45, 45), right [45, 135),
// back [135, 225), left [225, 315). A slice reads min(d, range) / range for
// the closest object in it and 1 when nothing is within range.
//
// Tasks without a waypoint read (0, 0); tasks without a fence read
// [1, 1, 1, 1] and inside = 1.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"

namespace swarmevo {

inline constexpr std::size_t kSensorInputs = 11;
inline constexpr std::size_t kSlices = 4;

enum class Slice : std::size_t { front = 0, right = 1, back = 2, left = 3 };

struct SensorConfig {
    double robot_range = 40.0;     ///< m
    double fence_range = 40.0;     ///< m
    double waypoint_cap = 100.0;   ///< m

    void validate() const {
        if (!(robot_range > 0.0) || !(fence_range > 0.0) || !(waypoint_cap > 0.0)) {
            throw ConfigError("sensor ranges must be positive");
        }
    }
};

struct SensorFrame {
    std::array<double, kSensorInputs> values{};

    static constexpr std::size_t waypoint_angle = 0;
    static constexpr std::size_t waypoint_distance = 1;
    static constexpr std::size_t robot_slices = 2;
    static constexpr std::size_t fence_slices = 6;
    static constexpr std::size_t fence_inside = 10;

    [[nodiscard]] std::span<const double> inputs() const noexcept { return values; }
};

using SliceReadings = std::array<double, kSlices>;

/// Slice containing a point given its forward and rightward components in the
/// robot frame. The origin counts as dead ahead.
inline Slice slice_of(double forward, double right) noexcept {
    if (forward > 0.0 && -forward <= right && right < forward) {
        return Slice::front;
    }
    if (right > 0.0 && -right < forward && forward <= right) {
        return Slice::right;
    }
    if (forward < 0.0 && forward < right && right <= -forward) {
        return Slice::back;
    }
    if (right < 0.0) {
        return Slice::left;
    }
    return Slice::front;  // origin
}

/// Waypoint sensor; returns (angle, distance) in [0, 1].
inline std::array<double, 2> waypoint_sensor(const Pose& pose, std::optional<Vec2> waypoint,
                                             const SensorConfig& cfg) noexcept {
    if (!waypoint) {
        return {0.0, 0.0};
    }
    const double bearing = relative_bearing(pose, *waypoint);
    const double d = distance(pose.position, *waypoint);
    return {(bearing + 180.0) / 360.0, std::min(d, cfg.waypoint_cap) / cfg.waypoint_cap};
}

/// Robot sensor over neighbour positions (as known from the broadcast ledger).
inline SliceReadings robot_sensor(const Pose& pose, std::span<const Vec2> neighbours,
                                  const SensorConfig& cfg) noexcept {
    SliceReadings out{1.0, 1.0, 1.0, 1.0};
    const Vec2 fwd = heading_vector(pose.heading);
    const Vec2 rgt{fwd.y, -fwd.x};
    const double range_sq = cfg.robot_range * cfg.robot_range;
    for (const Vec2& n : neighbours) {
        const Vec2 d = n - pose.position;
        const double dsq = norm_sq(d);
        if (dsq > range_sq) {
            continue;
        }
        const auto s = static_cast<std::size_t>(slice_of(dot(d, fwd), dot(d, rgt)));
        out[s] = std::min(out[s], std::sqrt(dsq) / cfg.robot_range);
    }
    return out;
}

struct FenceReading {
    SliceReadings slices{1.0, 1.0, 1.0, 1.0};
    double inside = 1.0;
};

/// Geo-fence sensor. Each fence edge is clipped exactly to each slice's
/// 90-degree wedge and the point-to-piece distance taken.
inline FenceReading geofence_sensor(const Pose& pose, const GeoFence* fence,
                                    const SensorConfig& cfg) noexcept {
    FenceReading out;
    if (fence == nullptr) {
        return out;
    }
    out.inside = point_in_polygon(pose.position, *fence) ? 1.0 : 0.0;
    std::array<Vec2, kSlices + 1> rays;
    for (std::size_t k = 0; k <= kSlices; ++k) {
        rays[k] = heading_vector(pose.heading - 45.0 + 90.0 * static_cast<double>(k));
    }
    const Vec2 p = pose.position;
    for (std::size_t e = 0; e < fence->edge_count(); ++e) {
        const Vec2 a = fence->edge_start(e);
        const Vec2 b = fence->edge_end(e);
        if (point_segment_distance(p, a, b) >= cfg.fence_range) {
            continue;
        }
        for (std::size_t s = 0; s < kSlices; ++s) {
            const auto piece = clip_segment_to_wedge(a, b, p, rays[s], rays[s + 1]);
            if (!piece) {
                continue;
            }
            const double d = point_segment_distance(p, piece->first, piece->second);
            out.slices[s] = std::min(out.slices[s], std::min(d, cfg.fence_range) / cfg.fence_range);
        }
    }
    return out;
}

/// Full 11-value frame for robot `i`, using only its own sensed pose and the
/// broadcast ledger for neighbours. `scratch` avoids per-call allocation.
inline SensorFrame read_sensors(const WorldState& w, std::size_t i, const SensorConfig& cfg,
                                std::vector<Vec2>& scratch) {
    const Pose& pose = w.robots[i].sensed_pose;
    SensorFrame f;
    const auto wp = waypoint_sensor(pose, w.waypoint(), cfg);
    f.values[SensorFrame::waypoint_angle] = wp[0];
    f.values[SensorFrame::waypoint_distance] = wp[1];

    scratch.clear();
    for (std::size_t j = 0; j < w.ledger.size(); ++j) {
        const LedgerEntry& e = w.ledger[j];
        if (j == i || !e.valid || w.step - e.step > w.ledger_expiry_steps) {
            continue;
        }
        scratch.push_back(e.position);
    }
    const SliceReadings rs = robot_sensor(pose, scratch, cfg);
    std::copy(rs.begin(), rs.end(), f.values.begin() + SensorFrame::robot_slices);

    const FenceReading fr = geofence_sensor(pose, w.fence ? &*w.fence : nullptr, cfg);
    std::copy(fr.slices.begin(), fr.slices.end(), f.values.begin() + SensorFrame::fence_slices);
    f.values[SensorFrame::fence_inside] = fr.inside;
    return f;
}

inline SensorFrame read_sensors(const WorldState& w, std::size_t i, const SensorConfig& cfg) {
    std::vector<Vec2> scratch;
    return read_sensors(w, i, cfg, scratch);
}

}  // namespace swarmevo
