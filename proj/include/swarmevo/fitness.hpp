#pragma once

// Task scoring over recorded trajectories: safety coefficient, homing,
// dispersion and clustering. Monitoring lives in coverage.hpp.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"

namespace swarmevo {

/// Per-step record of one trial; the only input the fitness functions read.
/// Step t (1-based, t = 1..T) is the state after the t-th control update;
/// index 0 of `positions` holds the start positions.
struct TrajectoryTrace {
    int robots = 0;
    std::vector<Vec2> positions;          ///< (T + 1) * R, row-major by step
    std::vector<double> min_pair_distance;  ///< T entries, +inf when R < 2
    std::vector<int> active_waypoint;     ///< T entries, -1 when no waypoint is active
    std::vector<Vec2> waypoints;
    std::optional<GeoFence> fence;
    double target_distance = 20.0;

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(min_pair_distance.size()); }
    [[nodiscard]] std::span<const Vec2> at(int t) const noexcept {
        return std::span<const Vec2>(positions).subspan(static_cast<std::size_t>(t) * static_cast<std::size_t>(robots),
                                                        static_cast<std::size_t>(robots));
    }
};

inline double min_pairwise_distance(std::span<const Vec2> pts) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            best = std::min(best, norm_sq(pts[i] - pts[j]));
        }
    }
    return std::sqrt(best);
}

/// Appends world snapshots to a trace. Uses true (not sensed) positions.
class TraceRecorder {
public:
    explicit TraceRecorder(const WorldState& w, double target_distance = 20.0) {
        trace_.robots = static_cast<int>(w.robots.size());
        trace_.waypoints = w.waypoints;
        trace_.fence = w.fence;
        trace_.target_distance = target_distance;
        append_positions(w);
    }

    void record(const WorldState& w) {
        append_positions(w);
        trace_.min_pair_distance.push_back(min_pairwise_distance(trace_.at(trace_.steps() + 1)));
        trace_.active_waypoint.push_back(w.active_waypoint ? static_cast<int>(*w.active_waypoint) : -1);
    }

    [[nodiscard]] const TrajectoryTrace& trace() const noexcept { return trace_; }
    TrajectoryTrace take() { return std::move(trace_); }

private:
    void append_positions(const WorldState& w) {
        for (const RobotState& r : w.robots) {
            trace_.positions.push_back(r.pose.position);
        }
    }

    TrajectoryTrace trace_;
};

namespace detail {
inline void require_complete(const TrajectoryTrace& tr) {
    if (tr.robots < 1 || tr.steps() < 1) {
        throw EvaluationError("trace needs at least one robot and one step");
    }
    if (tr.positions.size() != static_cast<std::size_t>(tr.steps() + 1) * static_cast<std::size_t>(tr.robots)) {
        throw EvaluationError("trace positions are incomplete");
    }
}
}  // namespace detail

/// S = 0.1 + clamp(minDist, 0, 3) / 3 * 0.9 for a given closest approach.
inline double safety_coefficient(double min_distance) noexcept {
    return 0.1 + std::max(0.0, std::min(3.0, min_distance)) / 3.0 * 0.9;
}

/// Safety coefficient over a whole trial; 1 for a single robot.
inline double safety_coefficient(const TrajectoryTrace& tr) {
    detail::require_complete(tr);
    if (tr.robots < 2) {
        return 1.0;
    }
    const double m = *std::min_element(tr.min_pair_distance.begin(), tr.min_pair_distance.end());
    return safety_coefficient(m);
}

/// Mean over steps and robots of (startingDist - dist) / startingDist, times S.
/// startingDist is re-based whenever the active waypoint changes and is
/// floored at 1 m.
inline double homing_fitness(const TrajectoryTrace& tr) {
    detail::require_complete(tr);
    const auto R = static_cast<std::size_t>(tr.robots);
    std::vector<double> start(R, 0.0);
    int current = -2;
    double total = 0.0;
    for (int t = 1; t <= tr.steps(); ++t) {
        const int wp = tr.active_waypoint[static_cast<std::size_t>(t - 1)];
        if (wp < 0 || static_cast<std::size_t>(wp) >= tr.waypoints.size()) {
            throw EvaluationError("homing trace has a step without an active waypoint");
        }
        const Vec2 target = tr.waypoints[static_cast<std::size_t>(wp)];
        if (wp != current) {
            const auto before = tr.at(t - 1);
            for (std::size_t r = 0; r < R; ++r) {
                start[r] = std::max(1.0, distance(before[r], target));
            }
            current = wp;
        }
        const auto now = tr.at(t);
        double step_sum = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            step_sum += (start[r] - distance(now[r], target)) / start[r];
        }
        total += step_sum / static_cast<double>(R);
    }
    return total / tr.steps() * safety_coefficient(tr);
}

/// Distance from each robot to its nearest neighbour.
inline std::vector<double> nearest_neighbour_distances(std::span<const Vec2> pts) {
    std::vector<double> out(pts.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = distance(pts[i], pts[j]);
            out[i] = std::min(out[i], d);
            out[j] = std::min(out[j], d);
        }
    }
    return out;
}

/// Mean over steps and robots of max(0, 1 - |nn - target| / target), times S.
inline double dispersion_fitness(const TrajectoryTrace& tr) {
    detail::require_complete(tr);
    if (tr.robots < 2) {
        throw EvaluationError("dispersion needs at least two robots");
    }
    const double target = tr.target_distance;
    double total = 0.0;
    for (int t = 1; t <= tr.steps(); ++t) {
        const auto nn = nearest_neighbour_distances(tr.at(t));
        double step_sum = 0.0;
        for (double d : nn) {
            step_sum += std::max(0.0, 1.0 - std::abs(d - target) / target);
        }
        total += step_sum / static_cast<double>(tr.robots);
    }
    return total / tr.steps() * safety_coefficient(tr);
}

struct ClusterPartition {
    std::vector<std::vector<int>> clusters;  ///< each sorted; ordered by smallest member
    double threshold = 7.0;

    [[nodiscard]] std::size_t count() const noexcept { return clusters.size(); }
};

/// Connected components of the graph linking robots strictly closer than
/// `threshold`.
inline ClusterPartition cluster_partition(std::span<const Vec2> pts, double threshold = 7.0) {
    const std::size_t n = pts.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    const double th_sq = threshold * threshold;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (norm_sq(pts[i] - pts[j]) < th_sq) {
                const std::size_t a = find(i);
                const std::size_t b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
    }
    ClusterPartition out;
    out.threshold = threshold;
    std::vector<int> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(out.clusters.size());
            out.clusters.emplace_back();
        }
        out.clusters[static_cast<std::size_t>(slot[root])].push_back(static_cast<int>(i));
    }
    return out;
}

inline std::size_t cluster_count(std::span<const Vec2> pts, double threshold = 7.0) {
    return cluster_partition(pts, threshold).count();
}

/// [sum_t t * (R - c_t) / (R - 1)] / [sum_t t], times S.
inline double clustering_fitness(const TrajectoryTrace& tr, double threshold = 7.0) {
    detail::require_complete(tr);
    if (tr.robots < 2) {
        throw EvaluationError("clustering fitness is undefined for a single robot");
    }
    const double R = tr.robots;
    double num = 0.0;
    double den = 0.0;
    for (int t = 1; t <= tr.steps(); ++t) {
        const auto c = static_cast<double>(cluster_count(tr.at(t), threshold));
        num += t * (R - c) / (R - 1.0);
        den += t;
    }
    return num / den * safety_coefficient(tr);
}

}  // namespace swarmevo
