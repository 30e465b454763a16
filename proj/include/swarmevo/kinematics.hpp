#pragma once

// Discrete-time swarm stepper. One step is one 100 ms control period: robots
// follow a first-order lag toward the commanded linear speed and turn rate,
// drift with the water current, and broadcast a (noisy) GPS fix once a second
// into the broadcast ledger that neighbours' sensors read from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/random.hpp"

namespace swarmevo {

struct MotionLimits {
    double max_speed = 1.7;          ///< m/s, nominal
    double max_angular_rate = 90.0;  ///< deg/s
    double baseline = 0.3;           ///< m, wheel separation used by the motor-speed view
};

struct DynamicsConfig {
    double dt = 0.1;       ///< s, equals the control period
    double tau_speed = 1.0;  ///< s, 0 means the command is reached in one step
    double tau_turn = 0.5;   ///< s
};

struct NoiseConfig {
    double param_variation = 0.10;  ///< per-trial max-speed scale drawn from 1 ± this
    double gps_sigma = 1.5;         ///< m, per-step sensed position noise
    double heading_sigma = 5.0;     ///< deg, per-step compass noise
    double actuator_noise = 0.05;   ///< per-step multiplicative speed/turn noise, uniform ±
    double current_speed = 0.1;     ///< m/s, direction drawn once per trial

    static NoiseConfig none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }
};

struct ActuationCommand {
    double linear_speed = 0.0;  ///< m/s
    double angular_rate = 0.0;  ///< deg/s, clockwise positive
};

struct RobotState {
    int id = 0;
    Pose pose;                  ///< true pose
    Pose sensed_pose;           ///< what the robot's GPS and compass report this step
    double linear_speed = 0.0;  ///< m/s, in [0, effective max]
    double angular_rate = 0.0;  ///< deg/s
    double speed_scale = 1.0;   ///< per-trial multiplier on the nominal max speed
    bool active = true;         ///< removed robots stay in the vector but stop moving and broadcasting
    int group = 0;              ///< scenario bookkeeping (e.g. the robustness groups)

    [[nodiscard]] double max_speed(const MotionLimits& limits) const noexcept {
        return limits.max_speed * speed_scale;
    }
};

struct MotorSpeeds {
    double left = 0.0;   ///< m/s
    double right = 0.0;  ///< m/s
};

/// Differential-drive view of a command: left = v + w*B/2, right = v - w*B/2
/// (w in rad/s, clockwise positive), each wheel clamped to ±max_speed.
/// The command is first clamped to the actuator limits.
inline MotorSpeeds convert_to_motor_speeds(const ActuationCommand& cmd,
                                           const MotionLimits& limits) noexcept {
    const double v = std::clamp(cmd.linear_speed, 0.0, limits.max_speed);
    const double w_deg = std::clamp(cmd.angular_rate, -limits.max_angular_rate, limits.max_angular_rate);
    const double half_diff = deg_to_rad(w_deg) * limits.baseline / 2.0;
    return {std::clamp(v + half_diff, -limits.max_speed, limits.max_speed),
            std::clamp(v - half_diff, -limits.max_speed, limits.max_speed)};
}

/// Inverse of convert_to_motor_speeds: the (v, w) actually achieved.
inline ActuationCommand motor_speeds_to_command(const MotorSpeeds& m,
                                                const MotionLimits& limits) noexcept {
    return {(m.left + m.right) / 2.0, rad_to_deg((m.left - m.right) / limits.baseline)};
}

/// Per-step disturbances, drawn by the world stepper so step_robot stays pure.
struct StepDisturbance {
    double speed_factor = 1.0;
    double turn_factor = 1.0;
    Vec2 current;  ///< m/s drift
};

namespace detail {
inline double lag_gain(double dt, double tau) noexcept {
    return tau > 0.0 ? 1.0 - std::exp(-dt / tau) : 1.0;
}
}  // namespace detail

/// Advances one robot by dynamics.dt. Pose integration uses the midpoint
/// heading, which makes the unicycle update second-order in dt.
inline RobotState step_robot(RobotState s, const ActuationCommand& cmd, const MotionLimits& limits,
                             const DynamicsConfig& dyn, const StepDisturbance& dist = {}) noexcept {
    const double vmax = s.max_speed(limits);
    const double wmax = limits.max_angular_rate;
    const double v_target = std::clamp(cmd.linear_speed, 0.0, vmax);
    const double w_target = std::clamp(cmd.angular_rate, -wmax, wmax);

    s.linear_speed += detail::lag_gain(dyn.dt, dyn.tau_speed) * (v_target - s.linear_speed);
    s.angular_rate += detail::lag_gain(dyn.dt, dyn.tau_turn) * (w_target - s.angular_rate);
    s.linear_speed = std::clamp(s.linear_speed, 0.0, vmax);
    s.angular_rate = std::clamp(s.angular_rate, -wmax, wmax);

    const double v = std::clamp(s.linear_speed * dist.speed_factor, 0.0, vmax);
    const double w = std::clamp(s.angular_rate * dist.turn_factor, -wmax, wmax);

    const double mid_heading = s.pose.heading + 0.5 * w * dyn.dt;
    s.pose.position += heading_vector(mid_heading) * (v * dyn.dt);
    s.pose.position += dist.current * dyn.dt;
    s.pose.heading = normalize_heading(s.pose.heading + w * dyn.dt);
    return s;
}

/// Last position a robot announced to its neighbours.
struct LedgerEntry {
    Vec2 position;
    std::int64_t step = 0;  ///< step at which it was broadcast
    bool valid = false;
};

struct WorldState {
    std::int64_t step = 0;
    std::vector<RobotState> robots;
    std::vector<LedgerEntry> ledger;  ///< indexed like robots

    std::vector<Vec2> waypoints;
    std::optional<std::size_t> active_waypoint;
    std::optional<GeoFence> fence;
    Vec2 current;  ///< m/s

    MotionLimits limits;
    DynamicsConfig dynamics;
    NoiseConfig noise;
    int broadcast_period_steps = 10;  ///< 1 s at dt = 0.1
    int ledger_expiry_steps = 30;     ///< entries older than this are ignored by sensors
    Rng rng{0};
    std::normal_distribution<double> unit_normal{0.0, 1.0};

    /// Zero-mean Gaussian draw from the world's noise stream.
    double gauss(double sigma) { return sigma > 0.0 ? sigma * unit_normal(rng) : 0.0; }

    [[nodiscard]] double clock() const noexcept { return static_cast<double>(step) * dynamics.dt; }

    [[nodiscard]] std::optional<Vec2> waypoint() const noexcept {
        if (!active_waypoint || *active_waypoint >= waypoints.size()) {
            return std::nullopt;
        }
        return waypoints[*active_waypoint];
    }

    [[nodiscard]] std::size_t active_count() const noexcept {
        std::size_t n = 0;
        for (const auto& r : robots) {
            n += r.active ? 1U : 0U;
        }
        return n;
    }
};

/// Draws a fresh sensed pose for robot i from its true pose.
inline void resense(WorldState& w, std::size_t i) {
    RobotState& r = w.robots[i];
    const double dx = w.gauss(w.noise.gps_sigma);
    const double dy = w.gauss(w.noise.gps_sigma);
    r.sensed_pose.position = r.pose.position + Vec2{dx, dy};
    r.sensed_pose.heading = normalize_heading(r.pose.heading + w.gauss(w.noise.heading_sigma));
}

inline void broadcast(WorldState& w, std::size_t i) {
    w.ledger[i] = {w.robots[i].sensed_pose.position, w.step, true};
}

/// Fills sensed poses and the ledger for a freshly placed world (step 0).
inline void initialize_world(WorldState& w) {
    w.ledger.assign(w.robots.size(), LedgerEntry{});
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
        if (!w.robots[i].active) {
            continue;
        }
        resense(w, i);
        broadcast(w, i);
    }
}

/// Advances the whole swarm by one control period. `commands` must hold one
/// entry per robot (entries for inactive robots are ignored).
inline void step_world(WorldState& w, std::span<const ActuationCommand> commands) {
    if (commands.size() != w.robots.size()) {
        throw ContractViolation("step_world: got " + std::to_string(commands.size()) +
                                " commands for " + std::to_string(w.robots.size()) + " robots");
    }
    if (w.ledger.size() != w.robots.size()) {
        w.ledger.resize(w.robots.size());
    }
    const double an = w.noise.actuator_noise;
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
        if (!w.robots[i].active) {
            continue;
        }
        StepDisturbance d;
        d.current = w.current;
        if (an > 0.0) {
            d.speed_factor = 1.0 + uniform(w.rng, -an, an);
            d.turn_factor = 1.0 + uniform(w.rng, -an, an);
        }
        w.robots[i] = step_robot(w.robots[i], commands[i], w.limits, w.dynamics, d);
    }
    ++w.step;
    for (std::size_t i = 0; i < w.robots.size(); ++i) {
        if (!w.robots[i].active) {
            continue;
        }
        resense(w, i);
        const LedgerEntry& e = w.ledger[i];
        if (!e.valid || w.step - e.step >= w.broadcast_period_steps) {
            broadcast(w, i);
        }
    }
}

}  // namespace swarmevo
