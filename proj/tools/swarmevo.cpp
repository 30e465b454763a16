// Command-line front end: evolve, posteval, select, replay, mission, plot.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "swarmevo/swarmevo.hpp"

namespace fs = std::filesystem;
using namespace swarmevo;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("SWARMEVO_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "runs";
}

std::ofstream open_file(const fs::path& p) {
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream os(p, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot write " + p.string());
    }
    return os;
}

template <class Fn>
void write_file(const fs::path& p, Fn&& fn) {
    auto os = open_file(p);
    fn(os);
}

CoverageMap to_map(const CoverageGrid& g) {
    std::stringstream ss;
    g.write(ss);
    return read_coverage_map(ss);
}

CoverageMap to_map(const KrigedMap& m, const std::vector<double>& layer) {
    std::stringstream ss;
    write_map_layer(ss, m, layer, "map");
    return read_coverage_map(ss);
}

struct EvolveOptions {
    std::string task;
    std::string config;
    std::optional<std::uint64_t> seed;
    int runs = 1;
    std::optional<int> generations;
    std::optional<int> population;
    std::optional<int> trials;
    std::optional<int> posteval;
    std::optional<int> posteval_stride;
    unsigned threads = 0;
    std::string out_dir;
    bool quiet = false;
};

int cmd_evolve(const EvolveOptions& o) {
    RunConfig base;
    if (!o.config.empty()) {
        Json j = parse_json_file(o.config);
        if (!o.task.empty()) {
            j["task"] = o.task;
        }
        base = run_config_from_json(j);
    } else {
        if (o.task.empty()) {
            throw ConfigError("evolve needs --task or --config");
        }
        base = default_run_config(parse_task(o.task));
    }
    if (o.seed) base.seed = *o.seed;
    if (o.generations) base.generations = *o.generations;
    if (o.population) base.neat.population_size = *o.population;
    if (o.trials) base.trials = *o.trials;
    if (o.posteval) base.posteval_trials = *o.posteval;
    if (o.posteval_stride) base.posteval_stride = *o.posteval_stride;
    if (o.threads > 0) base.threads = o.threads;
    run_config_from_json(to_json(base));  // validates the merged configuration

    const fs::path root = fs::path(o.out_dir) / std::string(to_string(base.task.kind));
    for (int r = 0; r < o.runs; ++r) {
        RunConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(r);
        const fs::path dir = root / ("run_" + std::to_string(cfg.seed));
        std::cout << "evolving " << to_string(cfg.task.kind) << " seed " << cfg.seed << " -> " << dir.string() << '\n';
        const RunArchive a = run_evolution(cfg, [&](const GenerationRecord& g) {
            if (!o.quiet) {
                std::cout << "  gen " << g.generation << "  champion " << g.champion_fitness << "  mean "
                          << g.mean_fitness << std::endl;
            }
        });
        write_archive(dir, a);
        if (auto best = best_of_run(a)) {
            std::cout << "  best post-evaluated: gen " << best->generation << "  mean " << best->post_mean << "  std "
                      << best->post_std << '\n';
        }
        std::cout << "  trials executed: " << a.trials_executed << '\n';
    }
    return 0;
}

int cmd_posteval(const std::vector<std::string>& archives, const std::string& genome, const std::string& task,
                 std::uint64_t seed, int trials, int stride, const std::string& out_dir, unsigned threads) {
    if (threads == 0) {
        threads = default_threads();
    }
    if (!genome.empty()) {
        if (task.empty()) {
            throw ConfigError("posteval --genome needs --task");
        }
        const neat::Genome g = neat::load_genome(genome);
        const TaskSpec spec = default_task(parse_task(task));
        const PostEvalStats s = post_evaluate(g, spec, trials, seed, 0, threads);
        const fs::path out = fs::path(out_dir) / (fs::path(genome).stem().string() + "_posteval.csv");
        write_file(out, [&](std::ostream& os) {
            os << "trial,score\n";
            for (std::size_t k = 0; k < s.scores.size(); ++k) {
                os << k << ',' << neat::format_real(s.scores[k]) << '\n';
            }
        });
        std::cout << "mean " << s.mean << "  std " << s.stddev << "  (" << out.string() << ")\n";
        return 0;
    }
    if (archives.empty()) {
        throw ConfigError("posteval needs archive directories or --genome");
    }
    for (const auto& dir : archives) {
        RunArchive a = read_archive(dir);
        post_evaluate_archive(a, trials, stride, threads);
        write_archive(dir, a);
        const auto best = best_of_run(a);
        std::cout << dir << ": best gen " << (best ? best->generation : -1) << "  mean "
                  << (best ? best->post_mean : 0.0) << '\n';
    }
    return 0;
}

int cmd_select(const std::vector<std::string>& archives, const std::string& out_dir, int count) {
    std::vector<RunArchive> runs;
    for (const auto& dir : archives) {
        runs.push_back(read_archive(dir));
    }
    const Selection sel = select_top(runs, static_cast<std::size_t>(count));
    for (const auto& w : sel.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "selection.csv", [&](std::ostream& os) {
        os << "rank,run_seed,generation,posteval_mean,posteval_std,genome\n";
        for (std::size_t i = 0; i < sel.controllers.size(); ++i) {
            const auto& c = sel.controllers[i];
            const std::string file = "selected_" + std::to_string(i + 1) + ".genome";
            neat::save_genome((fs::path(out_dir) / file).string(), c.genome);
            os << i + 1 << ',' << c.run_seed << ',' << c.generation << ',' << neat::format_real(c.post_mean) << ','
               << neat::format_real(c.post_std) << ',' << file << '\n';
            std::cout << "#" << i + 1 << "  run " << c.run_seed << "  gen " << c.generation << "  mean " << c.post_mean
                      << "  std " << c.post_std << '\n';
        }
    });
    return 0;
}

int cmd_replay(const std::string& scenario, const std::string& config, const std::string& genome, std::uint64_t seed,
               std::optional<int> robots, int samples, const std::string& out_dir) {
    if (genome.empty()) {
        throw ConfigError("replay needs --genome");
    }
    Scenario sc = config.empty() ? scenarios::by_name(scenario.empty() ? "homing_tour" : scenario) : load_scenario(config);
    if (robots) {
        sc.robots = *robots;
    }
    const neat::Genome g = neat::load_genome(genome);
    for (int k = 0; k < samples; ++k) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
        const ScenarioResult res = run_scenario(sc, g, s);
        const fs::path dir = fs::path(out_dir) / ("replay_" + sc.id) / ("seed_" + std::to_string(s));
        write_file(dir / "metrics.csv", [&](std::ostream& os) { res.metrics.write_csv(os); });
        write_file(dir / "trajectory.csv", [&](std::ostream& os) { res.trajectory.write_csv(os); });
        write_file(dir / "trajectory.svg",
                   [&](std::ostream& os) { plot::trajectories_svg(os, res.trajectory, sc.fence, sc.waypoints, sc.id); });
        write_file(dir / "metrics.svg", [&](std::ostream& os) {
            plot::metrics_svg(os, res.metrics, {}, sc.id + " metrics");
        });
        if (res.coverage) {
            write_file(dir / "coverage.grid", [&](std::ostream& os) { res.coverage->write(os); });
            write_file(dir / "coverage.svg",
                       [&](std::ostream& os) { plot::heatmap_svg(os, to_map(*res.coverage), sc.id + " coverage"); });
        }
        std::cout << sc.id << " seed " << s << " -> " << dir.string() << '\n';
        const double t_end = res.metrics.time.back();
        for (const auto& name : res.metrics.names) {
            std::cout << "  " << name << " (last 10 s mean): " << res.metrics.window_mean(name, t_end - 10.0, t_end)
                      << '\n';
        }
        if (sc.robots >= 2 && sc.duration >= 10.0) {
            std::cout << "  dispersion error, last 10 s: " << dispersion_error(res.trajectory, 10.0, sc.target_distance)
                      << " m\n";
        }
    }
    return 0;
}

int cmd_mission(const std::string& config, const std::string& genome_dir, std::uint64_t seed,
                std::optional<int> robots, const std::string& out_dir) {
    MissionPlan plan = config.empty() ? default_mission_plan(genome_dir.empty() ? "." : genome_dir)
                                      : load_mission_plan(config);
    if (robots) {
        plan.robots = *robots;
    }
    const MissionLog log = run_mission(plan, seed);
    const fs::path dir = fs::path(out_dir) / ("mission_seed_" + std::to_string(seed));
    for (std::size_t k = 0; k < log.stages.size(); ++k) {
        const auto& st = log.stages[k];
        const std::string stem = "stage_" + std::to_string(k) + "_" + st.name;
        write_file(dir / (stem + ".csv"), [&](std::ostream& os) { st.trajectory.write_csv(os); });
        write_file(dir / (stem + ".svg"), [&](std::ostream& os) {
            plot::trajectories_svg(os, st.trajectory, plan.area, {}, st.name);
        });
    }
    write_file(dir / "samples.csv", [&](std::ostream& os) {
        os << "t,x,y,temperature\n";
        for (const auto& s : log.samples) {
            os << neat::format_real(s.time) << ',' << neat::format_real(s.position.x) << ','
               << neat::format_real(s.position.y) << ',' << neat::format_real(s.value) << '\n';
        }
    });
    write_file(dir / "checkpoints.csv", [&](std::ostream& os) {
        os << "t,mean_error_std\n";
        for (const auto& m : log.maps) {
            os << neat::format_real(m.time) << ',' << neat::format_real(m.mean_error_std()) << '\n';
        }
    });
    if (log.variogram) {
        write_file(dir / "variogram.csv", [&](std::ostream& os) {
            os << "nugget,sill,range\n"
               << neat::format_real(log.variogram->nugget) << ',' << neat::format_real(log.variogram->sill) << ','
               << neat::format_real(log.variogram->range) << '\n';
        });
    }
    for (const auto& m : log.maps) {
        const std::string stem = "map_t" + std::to_string(static_cast<long long>(std::llround(m.time)));
        write_file(dir / (stem + "_prediction.grid"),
                   [&](std::ostream& os) { write_map_layer(os, m, m.prediction, "temperature"); });
        write_file(dir / (stem + "_error.grid"),
                   [&](std::ostream& os) { write_map_layer(os, m, m.error_std, "error"); });
        const CoverageMap pred = to_map(m, m.prediction);
        const CoverageMap err = to_map(m, m.error_std);
        const auto pr = plot::value_range(pred).settled();
        const auto er = plot::value_range(err).settled();
        write_file(dir / (stem + "_prediction.svg"),
                   [&](std::ostream& os) { plot::heatmap_svg(os, pred, stem + " temperature", pr.lo, pr.hi); });
        write_file(dir / (stem + "_error.svg"),
                   [&](std::ostream& os) { plot::heatmap_svg(os, err, stem + " error std", 0.0, er.hi); });
        std::cout << "checkpoint " << m.time << " s: mean error std " << m.mean_error_std() << '\n';
    }
    for (const auto& w : log.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    std::cout << "mission log -> " << dir.string() << " (" << log.samples.size() << " samples)\n";
    return 0;
}

int cmd_plot(const std::vector<std::string>& archives, const std::string& grid, const std::string& metrics,
             const std::string& trajectory, const std::string& out_dir) {
    bool any = false;
    if (!archives.empty()) {
        std::vector<RunArchive> runs;
        for (const auto& d : archives) {
            runs.push_back(read_archive(d));
        }
        write_file(fs::path(out_dir) / "fitness.svg", [&](std::ostream& os) { plot::fitness_curves_svg(os, runs); });
        write_file(fs::path(out_dir) / "fitness.csv", [&](std::ostream& os) { plot::fitness_curves_csv(os, runs); });
        any = true;
    }
    if (!grid.empty()) {
        std::ifstream is(grid);
        if (!is) {
            throw ConfigError("cannot open " + grid);
        }
        const CoverageMap m = read_coverage_map(is);
        const fs::path out = fs::path(out_dir) / (fs::path(grid).stem().string() + ".svg");
        write_file(out, [&](std::ostream& os) { plot::heatmap_svg(os, m, fs::path(grid).stem().string()); });
        any = true;
    }
    if (!metrics.empty()) {
        std::ifstream is(metrics);
        if (!is) {
            throw ConfigError("cannot open " + metrics);
        }
        const MetricSeries m = read_metric_series(is);
        write_file(fs::path(out_dir) / (fs::path(metrics).stem().string() + ".svg"),
                   [&](std::ostream& os) { plot::metrics_svg(os, m); });
        any = true;
    }
    if (!trajectory.empty()) {
        std::ifstream is(trajectory);
        if (!is) {
            throw ConfigError("cannot open " + trajectory);
        }
        const TrajectoryLog log = read_trajectory_log(is);
        write_file(fs::path(out_dir) / (fs::path(trajectory).stem().string() + ".svg"),
                   [&](std::ostream& os) { plot::trajectories_svg(os, log); });
        any = true;
    }
    if (!any) {
        throw ConfigError("plot needs --archive, --grid, --metrics or --trajectory");
    }
    std::cout << "plots -> " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swarmevo: evolve and evaluate swarm controllers"};
    app.require_subcommand(1);
    std::string out_dir = default_out_dir();

    EvolveOptions ev;
    auto* evolve = app.add_subcommand("evolve", "run neuroevolution and archive every generation's champion");
    evolve->add_option("--task", ev.task, "homing | dispersion | clustering | monitoring");
    evolve->add_option("--config", ev.config, "run configuration (JSON)");
    evolve->add_option("--seed", ev.seed, "first run seed");
    evolve->add_option("--runs", ev.runs, "independent runs with consecutive seeds")->check(CLI::PositiveNumber);
    evolve->add_option("--generations", ev.generations, "generation budget");
    evolve->add_option("--population", ev.population, "population size");
    evolve->add_option("--trials", ev.trials, "trials per genome evaluation");
    evolve->add_option("--posteval", ev.posteval, "post-evaluation trials per champion (0 disables)");
    evolve->add_option("--posteval-stride", ev.posteval_stride, "post-evaluate every k-th generation");
    evolve->add_option("--threads", ev.threads, "worker threads (0 = all cores)");
    evolve->add_flag("--quiet", ev.quiet, "no per-generation progress");
    evolve->add_option("--out-dir", out_dir, "output directory (default $SWARMEVO_OUT_DIR or ./runs)");

    std::vector<std::string> pe_archives;
    std::string pe_genome;
    std::string pe_task;
    std::uint64_t pe_seed = 1;
    int pe_trials = 100;
    int pe_stride = 1;
    unsigned pe_threads = 0;
    auto* posteval = app.add_subcommand("posteval", "post-evaluate archived champions or a single genome");
    posteval->add_option("archives", pe_archives, "run archive directories");
    posteval->add_option("--genome", pe_genome, "genome file to post-evaluate instead of archives");
    posteval->add_option("--task", pe_task, "task for --genome");
    posteval->add_option("--seed", pe_seed, "seed for --genome trials");
    posteval->add_option("--trials", pe_trials, "trials per champion")->check(CLI::PositiveNumber);
    posteval->add_option("--stride", pe_stride, "post-evaluate every k-th generation")->check(CLI::PositiveNumber);
    posteval->add_option("--threads", pe_threads, "worker threads (0 = all cores)");
    posteval->add_option("--out-dir", out_dir, "output directory");

    std::vector<std::string> sel_archives;
    int sel_count = 3;
    auto* select = app.add_subcommand("select", "pick the best post-evaluated controllers across runs");
    select->add_option("archives", sel_archives, "run archive directories")->required();
    select->add_option("--count", sel_count, "controllers to keep")->check(CLI::PositiveNumber);
    select->add_option("--out-dir", out_dir, "output directory");

    std::string rp_scenario;
    std::string rp_config;
    std::string rp_genome;
    std::uint64_t rp_seed = 1;
    std::optional<int> rp_robots;
    int rp_samples = 1;
    auto* replay = app.add_subcommand("replay", "run a controller on an experiment scenario");
    replay->add_option("--scenario", rp_scenario, "built-in scenario id")
        ->check(CLI::IsMember(scenarios::names()));
    replay->add_option("--config", rp_config, "scenario file (JSON)");
    replay->add_option("--genome", rp_genome, "controller genome file")->required();
    replay->add_option("--seed", rp_seed, "scenario seed (fixes start positions)");
    replay->add_option("--robots", rp_robots, "swarm size override")->check(CLI::PositiveNumber);
    replay->add_option("--samples", rp_samples, "consecutive seeds to run")->check(CLI::PositiveNumber);
    replay->add_option("--out-dir", out_dir, "output directory");

    std::string ms_config;
    std::string ms_genome;
    std::uint64_t ms_seed = 1;
    std::optional<int> ms_robots;
    auto* mission = app.add_subcommand("mission", "run the sequential multi-behaviour mission");
    mission->add_option("--config", ms_config, "mission plan (JSON)");
    mission->add_option("--genome", ms_genome, "directory holding <task>.genome files for the default plan");
    mission->add_option("--seed", ms_seed, "mission seed");
    mission->add_option("--robots", ms_robots, "swarm size override")->check(CLI::PositiveNumber);
    mission->add_option("--out-dir", out_dir, "output directory");

    std::vector<std::string> pl_archives;
    std::string pl_grid;
    std::string pl_metrics;
    std::string pl_trajectory;
    auto* plotc = app.add_subcommand("plot", "render SVG plots from archives and logs");
    plotc->add_option("--archive", pl_archives, "run archive directories (fitness curves)");
    plotc->add_option("--grid", pl_grid, "grid file (heatmap)");
    plotc->add_option("--metrics", pl_metrics, "metrics CSV");
    plotc->add_option("--trajectory", pl_trajectory, "trajectory CSV");
    plotc->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);
    try {
        if (evolve->parsed()) {
            ev.out_dir = out_dir;
            return cmd_evolve(ev);
        }
        if (posteval->parsed()) {
            return cmd_posteval(pe_archives, pe_genome, pe_task, pe_seed, pe_trials, pe_stride, out_dir, pe_threads);
        }
        if (select->parsed()) {
            return cmd_select(sel_archives, out_dir, sel_count);
        }
        if (replay->parsed()) {
            return cmd_replay(rp_scenario, rp_config, rp_genome, rp_seed, rp_robots, rp_samples, out_dir);
        }
        if (mission->parsed()) {
            return cmd_mission(ms_config, ms_genome, ms_seed, ms_robots, out_dir);
        }
        if (plotc->parsed()) {
            return cmd_plot(pl_archives, pl_grid, pl_metrics, pl_trajectory, out_dir);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const SetupError& e) {
        std::cerr << "setup error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
