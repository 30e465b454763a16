#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "cli_runner.hpp"
#include "swarmevo/archive.hpp"
#include "swarmevo/config.hpp"
#include "swarmevo/plot.hpp"

using namespace swarmevo;
namespace fs = std::filesystem;

namespace {

TEST(Config, RunConfigRoundTrip) {
    RunConfig c = default_run_config(TaskKind::clustering);
    c.seed = 17;
    c.generations = 12;
    c.neat.population_size = 33;
    c.neat.add_node_prob = 0.125;
    c.task.trial.noise.gps_sigma = 0.75;
    const Json j = to_json(c);
    const RunConfig back = run_config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.task.kind, TaskKind::clustering);
    EXPECT_EQ(back.neat.population_size, 33);
    EXPECT_EQ(back.generations, 12);
}

TEST(Config, DefaultsFollowTask) {
    const RunConfig c = run_config_from_json(Json::object(), TaskKind::clustering);
    EXPECT_EQ(c.generations, 400);
    EXPECT_EQ(run_config_from_json(Json::object(), TaskKind::dispersion).generations, 100);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(run_config_from_json(Json{{"genrations", 5}}), ConfigError);
    EXPECT_THROW(run_config_from_json(Json{{"task", "flocking"}}), ConfigError);
    EXPECT_THROW(run_config_from_json(Json{{"trials", 0}}), ConfigError);
    EXPECT_THROW(run_config_from_json(Json{{"neat", {{"bogus", 1}}}}), ConfigError);
    EXPECT_THROW(load_run_config("/nonexistent.json"), ConfigError);
}

TEST(Config, ScenarioOverrides) {
    Scenario s = scenarios::by_name("monitoring_square");
    apply_json(Json{{"robots", 3}, {"duration", 12.5}, {"fence", {{0, 0}, {10, 0}, {0, 10}}}}, s);
    EXPECT_EQ(s.robots, 3);
    EXPECT_DOUBLE_EQ(s.duration, 12.5);
    EXPECT_NEAR(s.fence->area(), 50.0, 1e-12);
    EXPECT_THROW(apply_json(Json{{"color", "red"}}, s), ConfigError);
}

TEST(Config, MissionPlanFromJson) {
    const Json j = {{"robots", 4},
                    {"checkpoints", {50, 80}},
                    {"stages",
                     {{{"behavior", "homing"}, {"duration", 40}, {"waypoint", {0, 0}}},
                      {{"behavior", "monitoring"}, {"duration", 60}, {"fence", true}}}}};
    const MissionPlan p = mission_plan_from_json(j, "dir");
    EXPECT_EQ(p.robots, 4);
    ASSERT_EQ(p.stages.size(), 2U);
    EXPECT_EQ(p.stages[1].genome_path, (fs::path("dir") / "monitoring.genome").string());
    EXPECT_TRUE(p.stages[1].use_fence);
    EXPECT_DOUBLE_EQ(p.total_duration(), 100.0);
}

RunArchive small_archive() {
    RunConfig c = default_run_config(TaskKind::dispersion);
    c.task.duration_steps = 40;
    c.task.trial.min_robots = 3;
    c.task.trial.max_robots = 4;
    c.neat.population_size = 8;
    c.generations = 2;
    c.trials = 1;
    c.posteval_trials = 3;
    c.posteval_stride = 2;
    c.threads = 1;
    c.seed = 5;
    return run_evolution(c);
}

TEST(Archive, WriteReadRoundTrip) {
    const RunArchive a = small_archive();
    const fs::path dir = cli::fresh_dir("swarmevo_archive_rt");
    write_archive(dir, a);
    const RunArchive b = read_archive(dir);
    EXPECT_EQ(b.seed, a.seed);
    ASSERT_EQ(b.generations.size(), a.generations.size());
    for (std::size_t i = 0; i < a.generations.size(); ++i) {
        EXPECT_EQ(b.generations[i].champion.connections, a.generations[i].champion.connections);
        EXPECT_EQ(b.generations[i].champion_fitness, a.generations[i].champion_fitness);
        EXPECT_EQ(b.generations[i].post.has_value(), a.generations[i].post.has_value());
        if (a.generations[i].post) {
            EXPECT_EQ(b.generations[i].post->scores, a.generations[i].post->scores);
            EXPECT_EQ(b.generations[i].post->mean, a.generations[i].post->mean);
        }
    }
    EXPECT_FALSE(a.generations[1].post.has_value());
    const fs::path again = cli::fresh_dir("swarmevo_archive_rt2");
    write_archive(again, b);
    EXPECT_EQ(cli::snapshot(dir), cli::snapshot(again));
    fs::remove_all(dir);
    fs::remove_all(again);
}

TEST(Plot, EmptyRunGivesValidAxes) {
    std::ostringstream os;
    plot::trajectories_svg(os, TrajectoryLog{});
    const std::string s = os.str();
    EXPECT_NE(s.find("<svg"), std::string::npos);
    EXPECT_NE(s.find("class=\"axes\""), std::string::npos);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    std::ostringstream m;
    plot::metrics_svg(m, MetricSeries({"a"}));
    EXPECT_NE(m.str().find("</svg>"), std::string::npos);
    std::ostringstream f;
    plot::fitness_curves_svg(f, {});
    EXPECT_NE(f.str().find("</svg>"), std::string::npos);
}

TEST(Plot, HeatmapValuesMatchGridFile) {
    CoverageGrid g(scenarios::l_shape(900.0));
    Rng rng = make_rng(3);
    for (int t = 0; t < 400; ++t) {
        const std::vector<Vec2> p{{uniform(rng, -15, 15), uniform(rng, -15, 15)}};
        g.step(p);
    }
    std::stringstream grid;
    g.write(grid);
    const CoverageMap m = read_coverage_map(grid);
    std::ostringstream svg;
    plot::heatmap_svg(svg, m);
    const std::string s = svg.str();
    const std::regex cell("data-col=\"(\\d+)\" data-row=\"(\\d+)\" data-v=\"([^\"]+)\"");
    std::size_t n = 0;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), cell); it != std::sregex_iterator(); ++it) {
        const int c = std::stoi((*it)[1]);
        const int r = std::stoi((*it)[2]);
        EXPECT_EQ(neat::parse_real((*it)[3].str()), g.value(c, r));
        ++n;
    }
    EXPECT_EQ(n, g.cell_count());
}

TEST(Plot, FitnessCurvesHighlightBestThree) {
    std::vector<RunArchive> runs;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        RunArchive a;
        a.seed = s;
        for (int g = 0; g < 5; ++g) {
            GenerationRecord r;
            r.generation = g;
            r.champion_fitness = 0.01 * static_cast<double>(s) * g;
            r.best_so_far = r.champion_fitness;
            a.generations.push_back(r);
        }
        runs.push_back(a);
    }
    std::ostringstream os;
    plot::fitness_curves_svg(os, runs);
    const std::string s = os.str();
    std::size_t best = 0;
    for (std::size_t p = s.find("class=\"run best\""); p != std::string::npos; p = s.find("class=\"run best\"", p + 1)) {
        ++best;
    }
    EXPECT_EQ(best, 3U);
    for (int seed : {8, 9, 10}) {
        EXPECT_NE(s.find("class=\"run best\" data-seed=\"" + std::to_string(seed) + "\""), std::string::npos);
    }
    EXPECT_NE(s.find("class=\"mean\""), std::string::npos);
    EXPECT_NE(s.find("class=\"band\""), std::string::npos);
    std::ostringstream csv;
    plot::fitness_curves_csv(csv, runs);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
              "generation,run_1,run_2,run_3,run_4,run_5,run_6,run_7,run_8,run_9,run_10,mean,std");
}

// --- command-line tool -------------------------------------------------------

const char* kTinyConfig = R"({"duration_steps": 40, "robots": [3, 4], "trials": 1, "posteval_trials": 2})";

TEST(Cli, EvolveSelectReplayPlot) {
    const fs::path dir = cli::fresh_dir("swarmevo_cli_flow");
    cli::write_file(dir / "tiny.json", kTinyConfig);
    const std::string out = (dir / "out").string();
    ASSERT_EQ(cli::run("evolve --task dispersion --config " + (dir / "tiny.json").string() +
                       " --seed 3 --runs 2 --generations 1 --population 6 --threads 1 --quiet --out-dir " + out),
              0);
    const fs::path run3 = dir / "out" / "dispersion" / "run_3";
    const fs::path run4 = dir / "out" / "dispersion" / "run_4";
    for (const char* f : {"config.json", "summary.csv", "posteval.csv", "champions/gen_0000.genome",
                          "champions/gen_0001.genome"}) {
        EXPECT_TRUE(fs::exists(run3 / f)) << f;
    }
    EXPECT_TRUE(fs::exists(run4 / "summary.csv"));
    ASSERT_EQ(cli::run("select " + run3.string() + " " + run4.string() + " --out-dir " + out), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "selection.csv"));
    ASSERT_TRUE(fs::exists(dir / "out" / "selected_1.genome"));
    EXPECT_TRUE(fs::exists(dir / "out" / "selected_2.genome"));
    ASSERT_EQ(cli::run("replay --scenario dispersion --robots 3 --genome " + (dir / "out" / "selected_1.genome").string() +
                       " --seed 2 --out-dir " + out),
              0);
    const fs::path rp = dir / "out" / "replay_dispersion" / "seed_2";
    EXPECT_TRUE(fs::exists(rp / "metrics.csv"));
    EXPECT_TRUE(fs::exists(rp / "trajectory.csv"));
    EXPECT_TRUE(fs::exists(rp / "trajectory.svg"));
    ASSERT_EQ(cli::run("plot --archive " + run3.string() + " --archive " + run4.string() + " --metrics " +
                       (rp / "metrics.csv").string() + " --out-dir " + (dir / "plots").string()),
              0);
    EXPECT_FALSE(cli::snapshot(dir / "plots").empty());
    fs::remove_all(dir);
}

TEST(Cli, ErrorsMapToExitCodes) {
    EXPECT_EQ(cli::run("evolve --task flocking --generations 0 --out-dir /tmp/swarmevo_bad"), 2);
    EXPECT_EQ(cli::run("replay --scenario dispersion --genome /nonexistent.genome"), 2);
    EXPECT_NE(cli::run("frobnicate"), 0);
}

TEST(Cli, OutDirFromEnvironment) {
    const fs::path dir = cli::fresh_dir("swarmevo_cli_env");
    cli::write_file(dir / "tiny.json", kTinyConfig);
    const std::string cmd = "SWARMEVO_OUT_DIR=" + (dir / "env").string() + " \"" + cli::tool() +
                            "\" evolve --task homing --config " + (dir / "tiny.json").string() +
                            " --generations 0 --population 4 --quiet > /dev/null 2>&1";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "env" / "homing" / "run_1" / "summary.csv"));
    fs::remove_all(dir);
}

}  // namespace
