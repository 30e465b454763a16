#pragma once

// Fixed experiment scenarios: a deterministic start layout, timed events
// (robot additions and removals, scripted groups) and per-second metrics.
// Start positions depend only on the scenario seed, never on the controller.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swarmevo/coverage.hpp"
#include "swarmevo/errors.hpp"
#include "swarmevo/fitness.hpp"
#include "swarmevo/geometry.hpp"
#include "swarmevo/kinematics.hpp"
#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/random.hpp"
#include "swarmevo/sensors.hpp"
#include "swarmevo/tasks.hpp"
#include "swarmevo/trial.hpp"

namespace swarmevo {

enum class EventKind {
    add_robots,     ///< spawn `count` robots of `group` in the spawn region
    remove_robots,  ///< deactivate the `count` highest-indexed active robots
    release_group,  ///< hand robots of `group` from the scripted approach to the controller
};

struct ScenarioEvent {
    double time = 0.0;  ///< s
    EventKind kind = EventKind::add_robots;
    int count = 0;
    int group = 0;
    bool scripted = false;  ///< added robots start under the scripted approach behaviour
};

struct Scenario {
    std::string id;
    TaskKind task = TaskKind::homing;
    int robots = 8;
    PlacementRule placement;
    std::optional<GeoFence> fence;
    std::vector<Vec2> waypoints;  ///< visited in order
    double waypoint_period = 0.0;  ///< s between switches; 0 keeps the first waypoint
    double duration = 60.0;        ///< s
    std::vector<ScenarioEvent> events;
    PlacementRule spawn;  ///< region for robots added by events
    double target_distance = 20.0;
    double cluster_threshold = 7.0;
    CoverageConfig coverage;
    SensorConfig sensors;
    MotionLimits limits;
    DynamicsConfig dynamics;
    NoiseConfig noise;

    [[nodiscard]] int duration_steps() const noexcept {
        return static_cast<int>(std::llround(duration / dynamics.dt));
    }

    void validate() const {
        if (robots < 1) {
            throw ConfigError("scenario '" + id + "' needs at least one robot");
        }
        if (!(duration > 0.0) || duration_steps() < 1) {
            throw ConfigError("scenario '" + id + "' needs a positive duration");
        }
        double prev = 0.0;
        for (const auto& e : events) {
            if (e.time < prev || e.time > duration) {
                throw ConfigError("scenario '" + id + "' events must be time-ordered within the duration");
            }
            prev = e.time;
        }
        if ((task == TaskKind::monitoring || placement.inside_fence) && !fence) {
            throw ConfigError("scenario '" + id + "' needs a geo-fence");
        }
        if (task == TaskKind::homing && waypoints.empty()) {
            throw ConfigError("scenario '" + id + "' needs waypoints");
        }
    }
};

/// Named per-second time series. Column order is fixed at construction.
struct MetricSeries {
    std::vector<std::string> names;
    std::vector<double> time;                  ///< s, strictly increasing
    std::vector<std::vector<double>> columns;  ///< one per name

    MetricSeries() = default;
    explicit MetricSeries(std::vector<std::string> n) : names(std::move(n)), columns(names.size()) {}

    void add_row(double t, const std::vector<double>& values) {
        if (values.size() != names.size()) {
            throw ContractViolation("metric row has the wrong number of values");
        }
        if (!time.empty() && !(t > time.back())) {
            throw ContractViolation("metric timestamps must be strictly increasing");
        }
        time.push_back(t);
        for (std::size_t i = 0; i < values.size(); ++i) {
            columns[i].push_back(values[i]);
        }
    }

    [[nodiscard]] bool has(const std::string& name) const {
        return std::find(names.begin(), names.end(), name) != names.end();
    }

    [[nodiscard]] const std::vector<double>& column(const std::string& name) const {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            throw ConfigError("metric series has no column '" + name + "'");
        }
        return columns[static_cast<std::size_t>(it - names.begin())];
    }

    /// Mean of a column over samples with lo < t <= hi.
    [[nodiscard]] double window_mean(const std::string& name, double lo, double hi) const {
        const auto& c = column(name);
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < time.size(); ++i) {
            if (time[i] > lo && time[i] <= hi && std::isfinite(c[i])) {
                s += c[i];
                ++n;
            }
        }
        return n == 0 ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(n);
    }

    /// CSV with a `t` column followed by the metric columns.
    void write_csv(std::ostream& os) const {
        os << 't';
        for (const auto& n : names) {
            os << ',' << n;
        }
        os << '\n';
        for (std::size_t i = 0; i < time.size(); ++i) {
            os << neat::format_real(time[i]);
            for (const auto& c : columns) {
                os << ',' << neat::format_real(c[i]);
            }
            os << '\n';
        }
    }
};

struct TrajectoryRow {
    std::int64_t step = 0;
    int id = 0;
    Pose pose;
    double speed = 0.0;
};

/// Per-step poses of the active robots.
struct TrajectoryLog {
    double dt = 0.1;
    std::vector<TrajectoryRow> rows;
    std::vector<std::size_t> frame_start;  ///< frame k spans [frame_start[k], frame_start[k + 1])

    void record(const WorldState& w) {
        frame_start.push_back(rows.size());
        for (const RobotState& r : w.robots) {
            if (r.active) {
                rows.push_back({w.step, r.id, r.pose, r.linear_speed});
            }
        }
    }

    [[nodiscard]] std::size_t frames() const noexcept { return frame_start.size(); }

    [[nodiscard]] std::vector<Vec2> positions(std::size_t frame) const {
        const std::size_t a = frame_start[frame];
        const std::size_t b = frame + 1 < frame_start.size() ? frame_start[frame + 1] : rows.size();
        std::vector<Vec2> out;
        out.reserve(b - a);
        for (std::size_t i = a; i < b; ++i) {
            out.push_back(rows[i].pose.position);
        }
        return out;
    }

    /// Columns: t (s), id, x (m, east), y (m, north), heading (deg, 0 = north,
    /// clockwise), speed (m/s).
    void write_csv(std::ostream& os) const {
        os << "t,id,x,y,heading,speed\n";
        for (const auto& r : rows) {
            os << neat::format_real(static_cast<double>(r.step) * dt) << ',' << r.id << ','
               << neat::format_real(r.pose.position.x) << ',' << neat::format_real(r.pose.position.y) << ','
               << neat::format_real(r.pose.heading) << ',' << neat::format_real(r.speed) << '\n';
        }
    }
};

/// Mean over a snapshot of |nearest-neighbour distance - target|.
inline double dispersion_error(std::span<const Vec2> positions, double target = 20.0) {
    if (positions.size() < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double s = 0.0;
    for (double d : nearest_neighbour_distances(positions)) {
        s += std::abs(d - target);
    }
    return s / static_cast<double>(positions.size());
}

/// Dispersion error averaged over the final `window` seconds of a log.
inline double dispersion_error(const TrajectoryLog& log, double window = 10.0, double target = 20.0) {
    if (log.frames() < 2) {
        throw ConfigError("dispersion error needs a recorded run");
    }
    const auto last = static_cast<std::int64_t>(log.frames() - 1);
    const auto span_steps = static_cast<std::int64_t>(std::llround(window / log.dt));
    if (span_steps < 1 || span_steps > last) {
        throw ConfigError("dispersion error window is longer than the run");
    }
    double s = 0.0;
    for (std::int64_t k = last - span_steps + 1; k <= last; ++k) {
        s += dispersion_error(log.positions(static_cast<std::size_t>(k)), target);
    }
    return s / static_cast<double>(span_steps);
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            return out;
        }
        start = comma + 1;
    }
}

inline std::size_t require_column(const std::vector<std::string>& header, const std::string& name,
                                  const std::string& what) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ConfigError(what + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

/// Reads a metric CSV written by MetricSeries::write_csv.
inline MetricSeries read_metric_series(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("metrics csv: empty input");
    }
    auto header = detail::split_fields(line);
    const std::size_t tcol = detail::require_column(header, "t", "metrics csv");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != tcol) {
            names.push_back(header[i]);
        }
    }
    MetricSeries m(names);
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_fields(line);
        if (cells.size() != header.size()) {
            throw ConfigError("metrics csv: row has " + std::to_string(cells.size()) + " fields, expected " +
                              std::to_string(header.size()));
        }
        std::vector<double> row;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i != tcol) {
                row.push_back(neat::parse_real(cells[i]));
            }
        }
        m.add_row(neat::parse_real(cells[tcol]), row);
    }
    return m;
}

/// Reads a trajectory CSV written by TrajectoryLog::write_csv.
inline TrajectoryLog read_trajectory_log(std::istream& is, double dt = 0.1) {
    std::string line;
    if (!std::getline(is, line)) {
        throw ConfigError("trajectory csv: empty input");
    }
    const auto header = detail::split_fields(line);
    const std::string what = "trajectory csv";
    const std::size_t ct = detail::require_column(header, "t", what);
    const std::size_t cid = detail::require_column(header, "id", what);
    const std::size_t cx = detail::require_column(header, "x", what);
    const std::size_t cy = detail::require_column(header, "y", what);
    const std::size_t ch = detail::require_column(header, "heading", what);
    const std::size_t cs = detail::require_column(header, "speed", what);
    TrajectoryLog log;
    log.dt = dt;
    std::int64_t last_step = -1;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto c = detail::split_fields(line);
        if (c.size() != header.size()) {
            throw ConfigError("trajectory csv: malformed row '" + line + "'");
        }
        TrajectoryRow r;
        r.step = std::llround(neat::parse_real(c[ct]) / dt);
        r.id = std::stoi(c[cid]);
        r.pose = {{neat::parse_real(c[cx]), neat::parse_real(c[cy])}, neat::parse_real(c[ch])};
        r.speed = neat::parse_real(c[cs]);
        while (last_step < r.step) {
            log.frame_start.push_back(log.rows.size());
            ++last_step;
        }
        log.rows.push_back(r);
    }
    return log;
}

struct ScenarioResult {
    MetricSeries metrics;
    TrajectoryLog trajectory;
    std::optional<CoverageGrid> coverage;  ///< final state, monitoring scenarios only
    std::vector<Vec2> start_positions;
};

namespace detail {

/// Heads for the centroid of the neighbours it hears about; stops within `stop`.
inline ActuationCommand approach_centroid(const WorldState& w, std::size_t i, double stop = 10.0) {
    const Pose& me = w.robots[i].sensed_pose;
    Vec2 sum;
    int n = 0;
    for (std::size_t j = 0; j < w.ledger.size(); ++j) {
        const LedgerEntry& e = w.ledger[j];
        if (j == i || !e.valid || w.step - e.step > w.ledger_expiry_steps || w.robots[j].group != 0) {
            continue;
        }
        sum += e.position;
        ++n;
    }
    if (n == 0) {
        return {};
    }
    const Vec2 target = sum * (1.0 / static_cast<double>(n));
    const double bearing = relative_bearing(me, target);
    const double rate = std::clamp(bearing * 2.0, -w.limits.max_angular_rate, w.limits.max_angular_rate);
    const double speed = distance(me.position, target) > stop ? w.limits.max_speed : 0.0;
    return {std::abs(bearing) > 60.0 ? 0.2 * speed : speed, rate};
}

inline Vec2 draw_spawn(const PlacementRule& rule, const std::optional<GeoFence>& fence, const WorldState& w,
                       Rng& rng) {
    const double min_sq = rule.min_separation * rule.min_separation;
    for (int k = 0; k < rule.max_attempts * 20; ++k) {
        const Vec2 p{rule.center.x + uniform(rng, -rule.width / 2.0, rule.width / 2.0),
                     rule.center.y + uniform(rng, -rule.height / 2.0, rule.height / 2.0)};
        if (rule.inside_fence && fence && !point_in_polygon(p, *fence)) {
            continue;
        }
        bool ok = true;
        for (const RobotState& r : w.robots) {
            if (r.active && norm_sq(r.pose.position - p) < min_sq) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return p;
        }
    }
    throw SetupError("no room to add a robot in the spawn region");
}

}  // namespace detail

/// Builds the starting world of a scenario from its seed alone.
inline WorldState scenario_world(const Scenario& sc, std::uint64_t seed) {
    sc.validate();
    TrialConfig tc;
    tc.min_robots = tc.max_robots = sc.robots;
    tc.placement = sc.placement;
    tc.fixed_fence = sc.fence;
    tc.fixed_waypoints = sc.waypoints;
    tc.limits = sc.limits;
    tc.dynamics = sc.dynamics;
    tc.noise = sc.noise;
    Rng rng = make_rng(derive_seed({seed_tag::scenario, seed}));
    return sample_trial(tc, rng, sc.robots);
}

/// Metric columns recorded for a scenario.
inline std::vector<std::string> scenario_metric_names(const Scenario& sc) {
    std::vector<std::string> n{"active_robots", "min_pair_distance", "dispersion_error", "cluster_count"};
    if (!sc.waypoints.empty()) {
        n.emplace_back("mean_waypoint_distance");
    }
    if (sc.fence) {
        n.emplace_back("coverage_fraction");
        n.emplace_back("coverage_mean");
    }
    return n;
}

/// Runs a scenario with one controller genome (11 inputs, 2 outputs).
/// Metrics are sampled at t = 0 and then every second.
inline ScenarioResult run_scenario(const Scenario& sc, const neat::Genome& genome, std::uint64_t seed,
                                   double sigmoid_slope = 4.9) {
    if (genome.num_inputs != static_cast<int>(kSensorInputs) || genome.num_outputs != 2) {
        throw ConfigError("controller genome must have " + std::to_string(kSensorInputs) + " inputs and 2 outputs");
    }
    WorldState w = scenario_world(sc, seed);
    Rng event_rng = make_rng(derive_seed({seed_tag::scenario, seed, 1}));

    ScenarioResult res;
    res.trajectory.dt = sc.dynamics.dt;
    for (const auto& r : w.robots) {
        res.start_positions.push_back(r.pose.position);
    }
    res.metrics = MetricSeries(scenario_metric_names(sc));
    if (sc.fence) {
        res.coverage.emplace(*sc.fence, sc.coverage);
    }

    SwarmController ctrl(genome, w.robots.size(), sigmoid_slope);
    std::vector<char> scripted(w.robots.size(), 0);
    std::vector<ActuationCommand> cmds(w.robots.size());
    std::vector<Vec2> active_pos;
    const int steps = sc.duration_steps();
    const int period = static_cast<int>(std::llround(sc.waypoint_period / sc.dynamics.dt));
    const int sample_every = static_cast<int>(std::llround(1.0 / sc.dynamics.dt));
    std::size_t next_event = 0;

    auto sample = [&] {
        active_pos.clear();
        for (const auto& r : w.robots) {
            if (r.active) {
                active_pos.push_back(r.pose.position);
            }
        }
        std::vector<double> row;
        row.push_back(static_cast<double>(active_pos.size()));
        row.push_back(active_pos.size() < 2 ? std::numeric_limits<double>::quiet_NaN()
                                            : min_pairwise_distance(active_pos));
        row.push_back(dispersion_error(active_pos, sc.target_distance));
        row.push_back(static_cast<double>(cluster_count(active_pos, sc.cluster_threshold)));
        if (!sc.waypoints.empty()) {
            const Vec2 wp = *w.waypoint();
            double s = 0.0;
            for (const Vec2& p : active_pos) {
                s += distance(p, wp);
            }
            row.push_back(active_pos.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : s / static_cast<double>(active_pos.size()));
        }
        if (res.coverage) {
            row.push_back(res.coverage->covered_fraction());
            row.push_back(res.coverage->mean_value());
        }
        res.metrics.add_row(w.clock(), row);
    };

    auto apply_events = [&] {
        while (next_event < sc.events.size() &&
               std::llround(sc.events[next_event].time / sc.dynamics.dt) <= w.step) {
            const ScenarioEvent& e = sc.events[next_event++];
            switch (e.kind) {
                case EventKind::remove_robots: {
                    int left = e.count;
                    for (std::size_t k = w.robots.size(); k-- > 0 && left > 0;) {
                        RobotState& r = w.robots[k];
                        if (!r.active) {
                            continue;
                        }
                        // Taken out of the water: the last broadcast simply ages out of the ledger.
                        r.active = false;
                        r.pose.position = {1e6 + static_cast<double>(k) * 100.0, 1e6};
                        r.linear_speed = 0.0;
                        r.angular_rate = 0.0;
                        --left;
                    }
                    break;
                }
                case EventKind::add_robots:
                    for (int k = 0; k < e.count; ++k) {
                        RobotState r;
                        r.id = static_cast<int>(w.robots.size());
                        r.group = e.group;
                        r.pose = {detail::draw_spawn(sc.spawn, sc.fence, w, event_rng), uniform(event_rng, 0.0, 360.0)};
                        r.sensed_pose = r.pose;
                        const double pv = w.noise.param_variation;
                        r.speed_scale = pv > 0.0 ? 1.0 + uniform(event_rng, -pv, pv) : 1.0;
                        w.robots.push_back(r);
                        w.ledger.emplace_back();
                        resense(w, w.robots.size() - 1);
                        broadcast(w, w.robots.size() - 1);
                        scripted.push_back(e.scripted ? 1 : 0);
                    }
                    ctrl.resize(w.robots.size(), genome, sigmoid_slope);
                    cmds.resize(w.robots.size());
                    break;
                case EventKind::release_group:
                    for (std::size_t k = 0; k < w.robots.size(); ++k) {
                        if (w.robots[k].group == e.group && scripted[k]) {
                            scripted[k] = 0;
                            ctrl.network(k).reset();
                        }
                    }
                    break;
            }
        }
    };

    apply_events();
    res.trajectory.record(w);
    sample();
    for (int s = 0; s < steps; ++s) {
        update_waypoint(w, period);
        ctrl.act(w, sc.sensors, cmds);
        for (std::size_t k = 0; k < w.robots.size(); ++k) {
            if (scripted[k] && w.robots[k].active) {
                cmds[k] = detail::approach_centroid(w, k);
            }
        }
        step_world(w, cmds);
        if (res.coverage) {
            active_pos.clear();
            for (const auto& r : w.robots) {
                if (r.active) {
                    active_pos.push_back(r.pose.position);
                }
            }
            res.coverage->step(active_pos);
        }
        apply_events();
        res.trajectory.record(w);
        if (w.step % sample_every == 0) {
            sample();
        }
    }
    return res;
}

namespace scenarios {

/// L-shaped area: a square with one quarter removed, scaled to `area` m².
inline GeoFence l_shape(double area = 10000.0) {
    const double s = std::sqrt(area / 0.75);
    const double h = s / 2.0;
    return GeoFence({{-h, -h}, {h, -h}, {h, 0.0}, {0.0, 0.0}, {0.0, h}, {-h, h}});
}

inline Scenario base(std::string id, TaskKind task, int robots, double duration) {
    Scenario s;
    s.id = std::move(id);
    s.task = task;
    s.robots = robots;
    s.duration = duration;
    return s;
}

/// Four-waypoint tour: start S, then A -> B -> C -> B, each 40 m from the
/// previous one, switched every 60 s.
inline Scenario homing_tour(int robots = 8) {
    Scenario s = base("homing_tour", TaskKind::homing, robots, 240.0);
    s.placement = {{0.0, 0.0}, 20.0, 20.0, false, 3.0, 0.0, 500};
    s.waypoints = {{0.0, 40.0}, {40.0, 40.0}, {40.0, 80.0}, {40.0, 40.0}};
    s.waypoint_period = 60.0;
    return s;
}

inline Scenario dispersion(int robots = 8) {
    Scenario s = base("dispersion", TaskKind::dispersion, robots, 90.0);
    s.placement = {{0.0, 0.0}, 28.0, 28.0, false, 5.0, 0.0, 500};
    return s;
}

inline Scenario clustering(int robots = 8) {
    Scenario s = base("clustering", TaskKind::clustering, robots, 180.0);
    s.placement = {{0.0, 0.0}, 100.0, 100.0, false, 5.0, 40.0, 500};
    return s;
}

inline Scenario monitoring(const std::string& id, GeoFence fence, int robots = 8, double duration = 300.0) {
    Scenario s = base(id, TaskKind::monitoring, robots, duration);
    s.fence = std::move(fence);
    s.placement = {{0.0, 0.0}, 0.0, 0.0, true, 5.0, 0.0, 500};
    return s;
}

inline Scenario monitoring_square(int robots = 8) {
    return monitoring("monitoring_square", GeoFence::rectangle({0.0, 0.0}, 100.0, 100.0), robots);
}

inline Scenario monitoring_lshape(int robots = 8) { return monitoring("monitoring_lshape", l_shape(), robots); }

inline Scenario monitoring_rectangle(int robots = 8) {
    return monitoring("monitoring_rectangle", GeoFence::rectangle({0.0, 0.0}, 200.0, 50.0), robots);
}

/// Four robots disperse; at 60 s four more are launched 50 m south and head
/// for the swarm; at 180 s all eight run the controller.
inline Scenario dispersion_robustness() {
    Scenario s = base("dispersion_robustness", TaskKind::dispersion, 4, 300.0);
    s.placement = {{0.0, 0.0}, 28.0, 28.0, false, 5.0, 0.0, 500};
    s.spawn = {{0.0, -50.0}, 20.0, 10.0, false, 3.0, 0.0, 500};
    s.events = {{60.0, EventKind::add_robots, 4, 1, true}, {180.0, EventKind::release_group, 0, 1, false}};
    return s;
}

/// 15 minutes over the 100 x 100 m square: four robots removed at 300 s, two
/// added at the southern edge at 600 s.
inline Scenario monitoring_robustness() {
    Scenario s = monitoring("monitoring_robustness", GeoFence::rectangle({0.0, 0.0}, 100.0, 100.0), 8, 900.0);
    s.spawn = {{0.0, -45.0}, 40.0, 8.0, true, 3.0, 0.0, 500};
    s.events = {{300.0, EventKind::remove_robots, 4, 0, false}, {600.0, EventKind::add_robots, 2, 0, false}};
    return s;
}

inline std::vector<std::string> names() {
    return {"homing_tour",       "dispersion",           "clustering",           "monitoring_square",
            "monitoring_lshape", "monitoring_rectangle", "dispersion_robustness", "monitoring_robustness"};
}

/// Built-in scenario by id; `robots` overrides the swarm size when given.
inline Scenario by_name(const std::string& id, std::optional<int> robots = {}) {
    Scenario s;
    if (id == "homing_tour") {
        s = homing_tour();
    } else if (id == "dispersion") {
        s = dispersion();
    } else if (id == "clustering") {
        s = clustering();
    } else if (id == "monitoring_square") {
        s = monitoring_square();
    } else if (id == "monitoring_lshape") {
        s = monitoring_lshape();
    } else if (id == "monitoring_rectangle") {
        s = monitoring_rectangle();
    } else if (id == "dispersion_robustness") {
        s = dispersion_robustness();
    } else if (id == "monitoring_robustness") {
        s = monitoring_robustness();
    } else {
        throw ConfigError("unknown scenario '" + id + "'");
    }
    if (robots) {
        s.robots = *robots;
    }
    return s;
}

}  // namespace scenarios

}  // namespace swarmevo
