#pragma once

// Randomized trial setup: robot count, start poses, per-trial parameter
// variation, current direction, waypoints and geo-fences.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"
#include "swarmevo/random.hpp"

namespace swarmevo {

/// How the robots' start positions are drawn.
struct PlacementRule {
    Vec2 center;
    double width = 20.0;   ///< m, ignored when inside_fence is set
    double height = 20.0;  ///< m
    bool inside_fence = false;
    double min_separation = 3.0;  ///< m between any two robots
    /// If positive, every robot's nearest neighbour must be at most this far.
    double max_nearest = 0.0;
    int max_attempts = 500;  ///< whole-swarm placement restarts before giving up
};

/// Waypoints laid out as a chain of legs: the first waypoint is `leg_distance`
/// from the placement centre, each next one `leg_distance` from the previous,
/// in uniformly random directions.
struct WaypointChain {
    int legs = 0;
    double leg_distance = 40.0;  ///< m
};

/// Random star-shaped polygon scaled to an area drawn from [min_area, max_area].
struct RandomFenceRule {
    int min_vertices = 4;
    int max_vertices = 8;
    double min_area = 6000.0;   ///< m²
    double max_area = 14000.0;  ///< m²
};

struct TrialConfig {
    int min_robots = 5;
    int max_robots = 10;
    PlacementRule placement;
    WaypointChain waypoint_chain;
    std::vector<Vec2> fixed_waypoints;  ///< used instead of the chain when non-empty
    std::optional<GeoFence> fixed_fence;
    std::optional<RandomFenceRule> random_fence;

    MotionLimits limits;
    DynamicsConfig dynamics;
    NoiseConfig noise;
};

/// Star-shaped simple polygon centred on the origin.
inline GeoFence random_fence(const RandomFenceRule& rule, Rng& rng) {
    const int n = uniform_int(rng, rule.min_vertices, rule.max_vertices);
    const double sector = 2.0 * std::numbers::pi / n;
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // jitter inside the sector keeps angles strictly increasing, hence no self-intersection
        const double a = sector * (i + uniform(rng, 0.15, 0.85));
        const double r = uniform(rng, 0.55, 1.0);
        // clockwise order in compass terms is irrelevant for the fence; use math angle
        pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const double target = uniform(rng, rule.min_area, rule.max_area);
    const double scale = std::sqrt(target / std::abs(signed_area(pts)));
    for (Vec2& p : pts) {
        p *= scale;
    }
    return GeoFence(std::move(pts));
}

namespace detail {

inline Vec2 draw_position(const PlacementRule& rule, const std::optional<GeoFence>& fence, Rng& rng) {
    if (rule.inside_fence) {
        const auto [lo, hi] = fence->bounds();
        for (int k = 0; k < 10000; ++k) {
            const Vec2 p{uniform(rng, lo.x, hi.x), uniform(rng, lo.y, hi.y)};
            if (point_in_polygon(p, *fence)) {
                return p;
            }
        }
        throw SetupError("could not draw a point inside the fence");
    }
    return {rule.center.x + uniform(rng, -rule.width / 2.0, rule.width / 2.0),
            rule.center.y + uniform(rng, -rule.height / 2.0, rule.height / 2.0)};
}

}  // namespace detail

/// Draws start positions satisfying the placement rule.
inline std::vector<Vec2> place_robots(int count, const PlacementRule& rule,
                                      const std::optional<GeoFence>& fence, Rng& rng) {
    if (rule.inside_fence && !fence) {
        throw SetupError("placement inside a fence requested but no fence is configured");
    }
    constexpr int kTriesPerRobot = 200;
    const double min_sq = rule.min_separation * rule.min_separation;
    for (int attempt = 0; attempt < rule.max_attempts; ++attempt) {
        std::vector<Vec2> pts;
        pts.reserve(static_cast<std::size_t>(count));
        bool stuck = false;
        for (int i = 0; i < count && !stuck; ++i) {
            bool placed = false;
            for (int k = 0; k < kTriesPerRobot; ++k) {
                const Vec2 p = detail::draw_position(rule, fence, rng);
                bool ok = true;
                for (const Vec2& q : pts) {
                    if (norm_sq(p - q) < min_sq) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    pts.push_back(p);
                    placed = true;
                    break;
                }
            }
            stuck = !placed;
        }
        if (stuck) {
            continue;
        }
        if (rule.max_nearest > 0.0 && count > 1) {
            bool ok = true;
            for (std::size_t i = 0; i < pts.size() && ok; ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < pts.size(); ++j) {
                    if (i != j) {
                        nearest = std::min(nearest, distance(pts[i], pts[j]));
                    }
                }
                ok = nearest <= rule.max_nearest;
            }
            if (!ok) {
                continue;
            }
        }
        return pts;
    }
    throw SetupError("robot placement infeasible: " + std::to_string(count) +
                     " robots with min separation " + std::to_string(rule.min_separation) + " m");
}

/// Builds a fresh world for one trial. The world's noise stream is seeded from
/// the same generator after setup draws, so one seed fixes everything.
inline WorldState sample_trial(const TrialConfig& cfg, Rng& rng, std::optional<int> robot_count = {}) {
    if (cfg.min_robots < 0 || cfg.max_robots < cfg.min_robots) {
        throw ConfigError("robot count range is empty");
    }
    WorldState w;
    w.limits = cfg.limits;
    w.dynamics = cfg.dynamics;
    w.noise = cfg.noise;

    const int count = robot_count ? *robot_count : uniform_int(rng, cfg.min_robots, cfg.max_robots);

    if (cfg.fixed_fence) {
        w.fence = cfg.fixed_fence;
    } else if (cfg.random_fence) {
        GeoFence f = random_fence(*cfg.random_fence, rng);
        w.fence = std::move(f);
    }

    const std::vector<Vec2> starts = place_robots(count, cfg.placement, w.fence, rng);
    w.robots.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        RobotState r;
        r.id = static_cast<int>(i);
        r.pose = {starts[i], uniform(rng, 0.0, 360.0)};
        r.sensed_pose = r.pose;
        const double pv = cfg.noise.param_variation;
        r.speed_scale = pv > 0.0 ? 1.0 + uniform(rng, -pv, pv) : 1.0;
        w.robots.push_back(r);
    }

    if (!cfg.fixed_waypoints.empty()) {
        w.waypoints = cfg.fixed_waypoints;
    } else {
        Vec2 prev = cfg.placement.inside_fence && w.fence ? w.fence->centroid() : cfg.placement.center;
        for (int leg = 0; leg < cfg.waypoint_chain.legs; ++leg) {
            prev += heading_vector(uniform(rng, 0.0, 360.0)) * cfg.waypoint_chain.leg_distance;
            w.waypoints.push_back(prev);
        }
    }
    if (!w.waypoints.empty()) {
        w.active_waypoint = 0;
    }

    if (cfg.noise.current_speed > 0.0) {
        w.current = heading_vector(uniform(rng, 0.0, 360.0)) * cfg.noise.current_speed;
    }
    w.rng = Rng{rng()};
    initialize_world(w);
    return w;
}

}  // namespace swarmevo
