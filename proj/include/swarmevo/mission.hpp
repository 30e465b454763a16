#pragma once

// Sequential multi-behaviour mission: evolved controllers are switched on a
// fixed timetable, robots sample a temperature field once per second while
// sampling is active, and the samples are kriged into field and error maps
// at configured checkpoints.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"
#include "swarmevo/kriging.hpp"
#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/random.hpp"
#include "swarmevo/scenario.hpp"
#include "swarmevo/sensors.hpp"
#include "swarmevo/tasks.hpp"
#include "swarmevo/trial.hpp"

namespace swarmevo {

struct MissionStage {
    std::string name;
    TaskKind behavior = TaskKind::homing;
    std::string genome_path;
    std::optional<neat::Genome> genome;  ///< loaded from genome_path when empty
    double duration = 60.0;              ///< s
    std::optional<Vec2> waypoint;
    bool use_fence = false;  ///< expose the mission area to the geo-fence sensor
};

/// Smooth synthetic ground truth: a base temperature plus Gaussian bumps.
struct TemperatureField {
    struct Bump {
        Vec2 center;
        double amplitude = 1.0;  ///< degrees C
        double sigma = 20.0;     ///< m
    };
    double base = 20.0;
    std::vector<Bump> bumps;

    [[nodiscard]] double operator()(Vec2 p) const noexcept {
        double v = base;
        for (const Bump& b : bumps) {
            v += b.amplitude * std::exp(-norm_sq(p - b.center) / (2.0 * b.sigma * b.sigma));
        }
        return v;
    }
};

struct MissionPlan {
    std::vector<MissionStage> stages;
    GeoFence area = GeoFence::rectangle({0.0, 0.0}, 100.0, 100.0);
    int robots = 8;
    PlacementRule start{{0.0, -90.0}, 20.0, 20.0, false, 3.0, 0.0, 500};
    double sampling_start = 100.0;  ///< s
    double sampling_end = 360.0;    ///< s, sampling stops here
    double sample_period = 1.0;     ///< s
    double temperature_noise = 0.0;  ///< degrees C, sensor noise sigma
    std::vector<double> checkpoints{160.0, 260.0, 360.0};  ///< s, kriged map times
    TemperatureField field;
    double map_cell_size = 2.0;  ///< m
    KrigingOptions kriging;
    SensorConfig sensors;
    MotionLimits limits;
    DynamicsConfig dynamics;
    NoiseConfig noise;

    [[nodiscard]] double total_duration() const noexcept {
        double t = 0.0;
        for (const auto& s : stages) {
            t += s.duration;
        }
        return t;
    }

    void validate() const {
        if (stages.empty()) {
            throw ConfigError("mission plan has no stages");
        }
        for (const auto& s : stages) {
            if (!(s.duration > 0.0)) {
                throw ConfigError("mission stage '" + s.name + "' needs a positive duration");
            }
            if (s.behavior == TaskKind::homing && !s.waypoint) {
                throw ConfigError("homing stage '" + s.name + "' needs a waypoint");
            }
        }
        if (robots < 1) {
            throw ConfigError("mission needs at least one robot");
        }
        if (!(sample_period > 0.0) || !(map_cell_size > 0.0)) {
            throw ConfigError("mission sample period and map cell size must be positive");
        }
        for (std::size_t i = 1; i < checkpoints.size(); ++i) {
            if (checkpoints[i] <= checkpoints[i - 1]) {
                throw ConfigError("mission checkpoints must be increasing");
            }
        }
    }
};

/// Index of the stage whose half-open window [start, end) contains t, or
/// nothing once the mission is complete.
inline std::optional<std::size_t> active_stage(const MissionPlan& plan, double t) {
    if (t < 0.0) {
        throw ContractViolation("mission time must be non-negative");
    }
    double end = 0.0;
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        end += plan.stages[i].duration;
        if (t < end) {
            return i;
        }
    }
    return std::nullopt;
}

/// Default five-stage plan over a 100 x 100 m area with the base station 90 m
/// south of its centre. `genome_dir` holds <task>.genome files.
inline MissionPlan default_mission_plan(const std::string& genome_dir = ".") {
    MissionPlan p;
    auto path = [&](TaskKind k) { return (std::filesystem::path(genome_dir) / (std::string(to_string(k)) + ".genome")).string(); };
    p.stages = {
        {"navigate_to_area", TaskKind::homing, path(TaskKind::homing), {}, 100.0, Vec2{0.0, 0.0}, false},
        {"disperse", TaskKind::dispersion, path(TaskKind::dispersion), {}, 60.0, {}, false},
        {"monitor", TaskKind::monitoring, path(TaskKind::monitoring), {}, 200.0, {}, true},
        {"aggregate", TaskKind::clustering, path(TaskKind::clustering), {}, 60.0, {}, false},
        {"return_to_base", TaskKind::homing, path(TaskKind::homing), {}, 100.0, Vec2{0.0, -90.0}, false},
    };
    p.field.base = 18.0;
    p.field.bumps = {{{-25.0, 20.0}, 3.0, 18.0}, {{30.0, -15.0}, -2.0, 22.0}, {{10.0, 35.0}, 1.5, 12.0}};
    return p;
}

/// Loads every stage genome that is not already present.
inline void load_stage_genomes(MissionPlan& plan) {
    for (auto& s : plan.stages) {
        if (s.genome) {
            continue;
        }
        if (s.genome_path.empty() || !std::filesystem::exists(s.genome_path)) {
            throw ConfigError("mission stage '" + s.name + "': genome file '" + s.genome_path + "' not found");
        }
        s.genome = neat::load_genome(s.genome_path);
        if (s.genome->num_inputs != static_cast<int>(kSensorInputs) || s.genome->num_outputs != 2) {
            throw ConfigError("mission stage '" + s.name + "': genome has the wrong arity");
        }
    }
}

struct StageLog {
    std::string name;
    TaskKind behavior = TaskKind::homing;
    double start = 0.0;
    double end = 0.0;
    TrajectoryLog trajectory;
};

struct MissionLog {
    std::vector<StageLog> stages;
    std::vector<TemperatureSample> samples;
    std::optional<Variogram> variogram;
    std::vector<KrigedMap> maps;  ///< one per reached checkpoint
    std::vector<std::string> warnings;
};

/// Executes the plan on one world. Deterministic in (plan, seed).
inline MissionLog run_mission(MissionPlan plan, std::uint64_t seed, double sigmoid_slope = 4.9,
                              unsigned threads = default_threads()) {
    plan.validate();
    load_stage_genomes(plan);

    Rng rng = make_rng(derive_seed({seed_tag::mission, seed}));
    TrialConfig tc;
    tc.min_robots = tc.max_robots = plan.robots;
    tc.placement = plan.start;
    tc.limits = plan.limits;
    tc.dynamics = plan.dynamics;
    tc.noise = plan.noise;
    WorldState w = sample_trial(tc, rng, plan.robots);
    Rng sample_rng = make_rng(derive_seed({seed_tag::mission, seed, 1}));

    MissionLog log;
    const double dt = plan.dynamics.dt;
    const auto total_steps = static_cast<std::int64_t>(std::llround(plan.total_duration() / dt));
    const auto sample_every = std::max<std::int64_t>(1, std::llround(plan.sample_period / dt));
    std::vector<ActuationCommand> cmds(w.robots.size());
    std::optional<SwarmController> ctrl;
    std::optional<std::size_t> current;

    auto enter_stage = [&](std::size_t k) {
        const MissionStage& st = plan.stages[k];
        // A fresh controller per stage: recurrent state never leaks across behaviours.
        ctrl.emplace(*st.genome, w.robots.size(), sigmoid_slope);
        w.waypoints.clear();
        w.active_waypoint.reset();
        if (st.waypoint) {
            w.waypoints.push_back(*st.waypoint);
            w.active_waypoint = 0;
        }
        if (st.use_fence) {
            w.fence = plan.area;
        } else {
            w.fence.reset();
        }
        StageLog sl;
        sl.name = st.name;
        sl.behavior = st.behavior;
        sl.start = w.clock();
        sl.trajectory.dt = dt;
        sl.trajectory.record(w);
        log.stages.push_back(std::move(sl));
        current = k;
    };

    auto take_samples = [&] {
        const double t = w.clock();
        if (t < plan.sampling_start || t >= plan.sampling_end || w.step % sample_every != 0) {
            return;
        }
        for (const RobotState& r : w.robots) {
            if (!r.active) {
                continue;
            }
            const double v = plan.field(r.pose.position) + gaussian(sample_rng, plan.temperature_noise);
            log.samples.push_back({r.sensed_pose.position, v, t});
        }
    };

    enter_stage(0);
    take_samples();
    for (std::int64_t s = 0; s < total_steps; ++s) {
        const auto stage = active_stage(plan, static_cast<double>(s) * dt + 1e-9);
        if (!stage) {
            break;
        }
        if (*stage != *current) {
            log.stages.back().end = w.clock();
            enter_stage(*stage);
        }
        ctrl->act(w, plan.sensors, cmds);
        step_world(w, cmds);
        log.stages.back().trajectory.record(w);
        take_samples();
    }
    log.stages.back().end = w.clock();

    // Variogram from everything collected by the last checkpoint; each
    // checkpoint map uses only the samples available at that time.
    const double last_cp = plan.checkpoints.empty() ? 0.0 : plan.checkpoints.back();
    std::vector<TemperatureSample> fit_set;
    for (const auto& smp : log.samples) {
        if (smp.time <= last_cp) {
            fit_set.push_back(smp);
        }
    }
    if (plan.checkpoints.empty()) {
        return log;
    }
    try {
        log.variogram = fit_variogram(fit_set);
    } catch (const FitError& e) {
        log.warnings.push_back(std::string("no kriged maps: ") + e.what());
        return log;
    }
    const GridSpec grid = GridSpec::covering(plan.area, plan.map_cell_size);
    for (double cp : plan.checkpoints) {
        std::vector<TemperatureSample> avail;
        for (const auto& smp : log.samples) {
            if (smp.time <= cp) {
                avail.push_back(smp);
            }
        }
        if (avail.empty()) {
            log.warnings.push_back("checkpoint " + neat::format_real(cp) + " s has no samples");
            continue;
        }
        KrigedMap m = krige_grid(KrigingModel(*log.variogram, avail), grid, &plan.area, plan.kriging, threads);
        m.time = cp;
        log.maps.push_back(std::move(m));
    }
    return log;
}

}  // namespace swarmevo
