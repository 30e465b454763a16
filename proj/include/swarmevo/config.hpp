#pragma once

// JSON configuration files: evolution runs, scenarios and mission plans.
// Every key is optional and falls back to the task/plan defaults; unknown
// keys are rejected so typos do not silently run the defaults.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "swarmevo/errors.hpp"
#include "swarmevo/evolution.hpp"
#include "swarmevo/mission.hpp"
#include "swarmevo/scenario.hpp"

namespace swarmevo {

using Json = nlohmann::json;

namespace detail {

inline void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (allowed.count(k) == 0) {
            throw ConfigError(where + ": unknown key '" + k + "'");
        }
    }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

inline Vec2 read_vec(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(where + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json write_vec(Vec2 v) { return Json::array({v.x, v.y}); }

inline GeoFence read_fence(const Json& j, const std::string& where) {
    if (!j.is_array()) {
        throw ConfigError(where + ": expected a list of [x, y] vertices");
    }
    std::vector<Vec2> v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        v.push_back(read_vec(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return GeoFence(std::move(v));
}

inline Json write_fence(const GeoFence& f) {
    Json a = Json::array();
    for (Vec2 v : f.vertices()) {
        a.push_back(write_vec(v));
    }
    return a;
}

}  // namespace detail

inline Json to_json(const NoiseConfig& n) {
    return {{"param_variation", n.param_variation}, {"gps_sigma", n.gps_sigma}, {"heading_sigma", n.heading_sigma},
            {"actuator_noise", n.actuator_noise},   {"current_speed", n.current_speed}};
}

inline void apply_json(const Json& j, NoiseConfig& n) {
    const std::string w = "noise";
    detail::allow_keys(j, w, {"param_variation", "gps_sigma", "heading_sigma", "actuator_noise", "current_speed"});
    detail::read(j, "param_variation", n.param_variation, w);
    detail::read(j, "gps_sigma", n.gps_sigma, w);
    detail::read(j, "heading_sigma", n.heading_sigma, w);
    detail::read(j, "actuator_noise", n.actuator_noise, w);
    detail::read(j, "current_speed", n.current_speed, w);
    if (n.param_variation < 0 || n.gps_sigma < 0 || n.heading_sigma < 0 || n.actuator_noise < 0 ||
        n.current_speed < 0) {
        throw ConfigError("noise: all magnitudes must be non-negative");
    }
}

inline Json to_json(const neat::NeatParams& p) {
    return {{"compatibility_threshold", p.compatibility_threshold},
            {"c_excess", p.c_excess},
            {"c_disjoint", p.c_disjoint},
            {"c_weight", p.c_weight},
            {"survival_threshold", p.survival_threshold},
            {"stale_generations", p.stale_generations},
            {"weight_mutation_prob", p.weight_mutation_prob},
            {"weight_perturb_sigma", p.weight_perturb_sigma},
            {"weight_reset_prob", p.weight_reset_prob},
            {"add_connection_prob", p.add_connection_prob},
            {"add_node_prob", p.add_node_prob},
            {"allow_recurrent", p.allow_recurrent},
            {"crossover_prob", p.crossover_prob},
            {"interspecies_mating_prob", p.interspecies_mating_prob}};
}

inline void apply_json(const Json& j, neat::NeatParams& p) {
    const std::string w = "neat";
    detail::allow_keys(j, w,
                       {"compatibility_threshold", "c_excess", "c_disjoint", "c_weight", "survival_threshold",
                        "stale_generations", "weight_mutation_prob", "weight_perturb_sigma", "weight_reset_prob",
                        "add_connection_prob", "add_node_prob", "allow_recurrent", "crossover_prob",
                        "interspecies_mating_prob"});
    detail::read(j, "compatibility_threshold", p.compatibility_threshold, w);
    detail::read(j, "c_excess", p.c_excess, w);
    detail::read(j, "c_disjoint", p.c_disjoint, w);
    detail::read(j, "c_weight", p.c_weight, w);
    detail::read(j, "survival_threshold", p.survival_threshold, w);
    detail::read(j, "stale_generations", p.stale_generations, w);
    detail::read(j, "weight_mutation_prob", p.weight_mutation_prob, w);
    detail::read(j, "weight_perturb_sigma", p.weight_perturb_sigma, w);
    detail::read(j, "weight_reset_prob", p.weight_reset_prob, w);
    detail::read(j, "add_connection_prob", p.add_connection_prob, w);
    detail::read(j, "add_node_prob", p.add_node_prob, w);
    detail::read(j, "allow_recurrent", p.allow_recurrent, w);
    detail::read(j, "crossover_prob", p.crossover_prob, w);
    detail::read(j, "interspecies_mating_prob", p.interspecies_mating_prob, w);
}

/// Snapshot of everything that determines a run's results (thread count is
/// deliberately absent).
inline Json to_json(const RunConfig& c) {
    return {{"task", std::string(to_string(c.task.kind))},
            {"seed", c.seed},
            {"generations", c.generations},
            {"population", c.neat.population_size},
            {"trials", c.trials},
            {"posteval_trials", c.posteval_trials},
            {"posteval_stride", c.posteval_stride},
            {"duration_steps", c.task.duration_steps},
            {"robots", Json::array({c.task.trial.min_robots, c.task.trial.max_robots})},
            {"noise", to_json(c.task.trial.noise)},
            {"neat", to_json(c.neat)}};
}

/// Builds a run config: task defaults first, then the keys present in `j`.
inline RunConfig run_config_from_json(const Json& j, std::optional<TaskKind> task = {}) {
    const std::string w = "run config";
    detail::allow_keys(j, w,
                       {"task", "seed", "generations", "population", "trials", "posteval_trials", "posteval_stride",
                        "duration_steps", "robots", "noise", "neat"});
    std::string name = task ? std::string(to_string(*task)) : std::string("homing");
    detail::read(j, "task", name, w);
    RunConfig c = default_run_config(parse_task(name));
    detail::read(j, "seed", c.seed, w);
    detail::read(j, "generations", c.generations, w);
    detail::read(j, "population", c.neat.population_size, w);
    detail::read(j, "trials", c.trials, w);
    detail::read(j, "posteval_trials", c.posteval_trials, w);
    detail::read(j, "posteval_stride", c.posteval_stride, w);
    detail::read(j, "duration_steps", c.task.duration_steps, w);
    if (j.contains("robots")) {
        const Json& r = j.at("robots");
        if (!r.is_array() || r.size() != 2) {
            throw ConfigError(w + ".robots: expected [min, max]");
        }
        c.task.trial.min_robots = r[0].get<int>();
        c.task.trial.max_robots = r[1].get<int>();
    }
    if (j.contains("noise")) {
        apply_json(j.at("noise"), c.task.trial.noise);
    }
    if (j.contains("neat")) {
        apply_json(j.at("neat"), c.neat);
    }
    if (c.generations < 0 || c.trials < 1 || c.neat.population_size < 1 || c.task.duration_steps < 1 ||
        c.task.trial.min_robots < 1 || c.task.trial.max_robots < c.task.trial.min_robots || c.posteval_trials < 0) {
        throw ConfigError(w + ": budgets, trial counts and robot range must be positive");
    }
    return c;
}

inline Json parse_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open " + path);
    }
    try {
        return Json::parse(is);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline RunConfig load_run_config(const std::string& path) { return run_config_from_json(parse_json_file(path)); }

/// Applies overrides to a scenario: robots, duration, noise, fence, waypoints.
inline void apply_json(const Json& j, Scenario& s) {
    const std::string w = "scenario";
    detail::allow_keys(j, w, {"scenario", "robots", "duration", "noise", "fence", "waypoints", "waypoint_period"});
    detail::read(j, "robots", s.robots, w);
    detail::read(j, "duration", s.duration, w);
    detail::read(j, "waypoint_period", s.waypoint_period, w);
    if (j.contains("noise")) {
        apply_json(j.at("noise"), s.noise);
    }
    if (j.contains("fence")) {
        s.fence = detail::read_fence(j.at("fence"), w + ".fence");
    }
    if (j.contains("waypoints")) {
        s.waypoints.clear();
        for (const auto& v : j.at("waypoints")) {
            s.waypoints.push_back(detail::read_vec(v, w + ".waypoints"));
        }
    }
    s.validate();
}

/// Scenario file: {"scenario": "<built-in id>", ...overrides}.
inline Scenario load_scenario(const std::string& path) {
    const Json j = parse_json_file(path);
    if (!j.contains("scenario")) {
        throw ConfigError(path + ": missing 'scenario'");
    }
    Scenario s = scenarios::by_name(j.at("scenario").get<std::string>());
    apply_json(j, s);
    return s;
}

/// Mission plan file. Stage genome paths are resolved against `base_dir`.
inline MissionPlan mission_plan_from_json(const Json& j, const std::string& base_dir = ".") {
    const std::string w = "mission";
    detail::allow_keys(j, w,
                       {"stages", "area", "robots", "start", "sampling_start", "sampling_end", "sample_period",
                        "temperature_noise", "checkpoints", "field", "map_cell_size", "neighbours", "noise"});
    MissionPlan p = default_mission_plan(base_dir);
    if (j.contains("stages")) {
        p.stages.clear();
        for (const auto& sj : j.at("stages")) {
            detail::allow_keys(sj, w + ".stages", {"name", "behavior", "genome", "duration", "waypoint", "fence"});
            MissionStage st;
            std::string behavior = "homing";
            detail::read(sj, "name", st.name, w);
            detail::read(sj, "behavior", behavior, w);
            st.behavior = parse_task(behavior);
            if (st.name.empty()) {
                st.name = behavior;
            }
            std::string g = std::string(to_string(st.behavior)) + ".genome";
            detail::read(sj, "genome", g, w);
            const std::filesystem::path gp(g);
            st.genome_path = gp.is_absolute() ? g : (std::filesystem::path(base_dir) / gp).string();
            detail::read(sj, "duration", st.duration, w);
            if (sj.contains("waypoint")) {
                st.waypoint = detail::read_vec(sj.at("waypoint"), w + ".stages.waypoint");
            }
            detail::read(sj, "fence", st.use_fence, w);
            p.stages.push_back(std::move(st));
        }
    }
    if (j.contains("area")) {
        p.area = detail::read_fence(j.at("area"), w + ".area");
    }
    detail::read(j, "robots", p.robots, w);
    if (j.contains("start")) {
        const Json& s = j.at("start");
        detail::allow_keys(s, w + ".start", {"center", "width", "height", "min_separation"});
        if (s.contains("center")) {
            p.start.center = detail::read_vec(s.at("center"), w + ".start.center");
        }
        detail::read(s, "width", p.start.width, w);
        detail::read(s, "height", p.start.height, w);
        detail::read(s, "min_separation", p.start.min_separation, w);
    }
    detail::read(j, "sampling_start", p.sampling_start, w);
    detail::read(j, "sampling_end", p.sampling_end, w);
    detail::read(j, "sample_period", p.sample_period, w);
    detail::read(j, "temperature_noise", p.temperature_noise, w);
    detail::read(j, "checkpoints", p.checkpoints, w);
    detail::read(j, "map_cell_size", p.map_cell_size, w);
    detail::read(j, "neighbours", p.kriging.neighbours, w);
    if (j.contains("noise")) {
        apply_json(j.at("noise"), p.noise);
    }
    if (j.contains("field")) {
        const Json& f = j.at("field");
        detail::allow_keys(f, w + ".field", {"base", "bumps"});
        detail::read(f, "base", p.field.base, w);
        if (f.contains("bumps")) {
            p.field.bumps.clear();
            for (const auto& b : f.at("bumps")) {
                detail::allow_keys(b, w + ".field.bumps", {"center", "amplitude", "sigma"});
                TemperatureField::Bump bump;
                bump.center = detail::read_vec(b.at("center"), w + ".field.bumps.center");
                detail::read(b, "amplitude", bump.amplitude, w);
                detail::read(b, "sigma", bump.sigma, w);
                p.field.bumps.push_back(bump);
            }
        }
    }
    p.validate();
    return p;
}

inline MissionPlan load_mission_plan(const std::string& path) {
    const auto base = std::filesystem::path(path).parent_path().string();
    return mission_plan_from_json(parse_json_file(path), base.empty() ? "." : base);
}

}  // namespace swarmevo
