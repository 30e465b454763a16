#pragma once

// The four evolved tasks: their trial distributions, durations, and the glue
// that runs one genome-controlled trial and scores it.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swarmevo/coverage.hpp"
#include "swarmevo/errors.hpp"
#include "swarmevo/fitness.hpp"
#include "swarmevo/kinematics.hpp"
#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/network.hpp"
#include "swarmevo/random.hpp"
#include "swarmevo/sensors.hpp"
#include "swarmevo/trial.hpp"

namespace swarmevo {

enum class TaskKind { homing, dispersion, clustering, monitoring };

inline std::string_view to_string(TaskKind k) noexcept {
    switch (k) {
        case TaskKind::homing: return "homing";
        case TaskKind::dispersion: return "dispersion";
        case TaskKind::clustering: return "clustering";
        case TaskKind::monitoring: return "monitoring";
    }
    return "homing";
}

inline TaskKind parse_task(std::string_view s) {
    if (s == "homing") return TaskKind::homing;
    if (s == "dispersion") return TaskKind::dispersion;
    if (s == "clustering") return TaskKind::clustering;
    if (s == "monitoring") return TaskKind::monitoring;
    throw ConfigError("unknown task '" + std::string(s) + "'");
}

struct TaskSpec {
    TaskKind kind = TaskKind::homing;
    TrialConfig trial;
    int duration_steps = 600;
    int waypoint_period_steps = 0;  ///< > 0: advance to the next waypoint this often
    SensorConfig sensors;
    CoverageConfig coverage;
    double target_distance = 20.0;   ///< dispersion
    double cluster_threshold = 7.0;  ///< clustering
    double neat_sigmoid_slope = 4.9;
};

/// Default trial distribution for each task (robot count 5-10, start layouts
/// and durations of the corresponding field experiments).
inline TaskSpec default_task(TaskKind kind) {
    TaskSpec t;
    t.kind = kind;
    t.trial.min_robots = 5;
    t.trial.max_robots = 10;
    switch (kind) {
        case TaskKind::homing:
            t.trial.placement = {{0.0, 0.0}, 20.0, 20.0, false, 3.0, 0.0, 500};
            t.trial.waypoint_chain = {2, 40.0};
            t.duration_steps = 1200;
            t.waypoint_period_steps = 600;
            break;
        case TaskKind::dispersion:
            t.trial.placement = {{0.0, 0.0}, 28.0, 28.0, false, 5.0, 0.0, 500};
            t.duration_steps = 900;
            break;
        case TaskKind::clustering:
            t.trial.placement = {{0.0, 0.0}, 100.0, 100.0, false, 5.0, 40.0, 500};
            t.duration_steps = 1800;
            break;
        case TaskKind::monitoring:
            t.trial.placement = {{0.0, 0.0}, 0.0, 0.0, true, 5.0, 0.0, 500};
            t.trial.random_fence = RandomFenceRule{};
            t.duration_steps = 3000;
            break;
    }
    return t;
}

/// Network outputs -> actuation: v = out0 * v_max, w = (2 * out1 - 1) * w_max.
inline ActuationCommand outputs_to_command(std::span<const double> out, const MotionLimits& limits) noexcept {
    return {out[0] * limits.max_speed, (2.0 * out[1] - 1.0) * limits.max_angular_rate};
}

/// Scores a finished trace with the task's fitness function.
inline double score_trace(const TaskSpec& task, const TrajectoryTrace& trace) {
    switch (task.kind) {
        case TaskKind::homing: return homing_fitness(trace);
        case TaskKind::dispersion: return dispersion_fitness(trace);
        case TaskKind::clustering: return clustering_fitness(trace, task.cluster_threshold);
        case TaskKind::monitoring: return monitoring_fitness(trace, task.coverage);
    }
    return 0.0;
}

/// One controller instance per robot, all decoded from the same genome.
class SwarmController {
public:
    SwarmController(const neat::Genome& g, std::size_t robots, double slope = 4.9)
        : nets_(robots, neat::Network(g, slope)) {}

    void resize(std::size_t robots, const neat::Genome& g, double slope = 4.9) {
        nets_.resize(robots, neat::Network(g, slope));
    }

    void reset() {
        for (auto& n : nets_) {
            n.reset();
        }
    }

    /// Fills `commands` for every active robot from its own sensors.
    void act(const WorldState& w, const SensorConfig& sensors, std::span<ActuationCommand> commands) {
        for (std::size_t i = 0; i < w.robots.size(); ++i) {
            if (!w.robots[i].active) {
                commands[i] = {};
                continue;
            }
            const SensorFrame f = read_sensors(w, i, sensors, scratch_);
            commands[i] = outputs_to_command(nets_[i].activate(f.values), w.limits);
        }
    }

    neat::Network& network(std::size_t i) { return nets_[i]; }

private:
    std::vector<neat::Network> nets_;
    std::vector<Vec2> scratch_;
};

struct TrialResult {
    TrajectoryTrace trace;
    double score = 0.0;
};

/// Advances the waypoint schedule before step index `step`.
inline void update_waypoint(WorldState& w, int period_steps) {
    if (period_steps <= 0 || !w.active_waypoint || w.step == 0 || w.step % period_steps != 0) {
        return;
    }
    if (*w.active_waypoint + 1 < w.waypoints.size()) {
        ++*w.active_waypoint;
    }
}

/// Runs one genome-controlled trial on a prepared world.
inline TrialResult run_trial(const neat::Genome& g, const TaskSpec& task, WorldState world) {
    SwarmController ctrl(g, world.robots.size(), task.neat_sigmoid_slope);
    TraceRecorder rec(world, task.target_distance);
    std::vector<ActuationCommand> cmds(world.robots.size());
    for (int s = 0; s < task.duration_steps; ++s) {
        update_waypoint(world, task.waypoint_period_steps);
        ctrl.act(world, task.sensors, cmds);
        step_world(world, cmds);
        rec.record(world);
    }
    TrialResult r;
    r.trace = rec.take();
    r.score = score_trace(task, r.trace);
    return r;
}

/// Samples a trial from `seed` and runs it.
inline TrialResult run_trial(const neat::Genome& g, const TaskSpec& task, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return run_trial(g, task, sample_trial(task.trial, rng));
}

}  // namespace swarmevo
