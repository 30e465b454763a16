#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "property_checks.hpp"
#include "swarmevo/coverage.hpp"
#include "swarmevo/fitness.hpp"
#include "swarmevo/tasks.hpp"

using namespace swarmevo;

namespace {

/// Trace from explicit frames (frame 0 = start positions).
TrajectoryTrace make_trace(const std::vector<std::vector<Vec2>>& frames, std::vector<Vec2> waypoints = {},
                           std::vector<int> active = {}) {
    TrajectoryTrace tr;
    tr.robots = static_cast<int>(frames.front().size());
    tr.waypoints = std::move(waypoints);
    for (std::size_t t = 0; t < frames.size(); ++t) {
        for (Vec2 p : frames[t]) tr.positions.push_back(p);
        if (t > 0) {
            tr.min_pair_distance.push_back(min_pairwise_distance(frames[t]));
            tr.active_waypoint.push_back(active.empty() ? 0 : active[t - 1]);
        }
    }
    return tr;
}

TEST(Safety, Examples) {
    EXPECT_DOUBLE_EQ(safety_coefficient(3.0), 1.0);
    EXPECT_DOUBLE_EQ(safety_coefficient(0.0), 0.1);
    EXPECT_DOUBLE_EQ(safety_coefficient(1.5), 0.55);
    EXPECT_DOUBLE_EQ(safety_coefficient(10.0), 1.0);
}

TEST(Homing, StationaryScoresZero) {
    const std::vector<Vec2> f{{0, 40}, {40, 0}};
    const auto tr = make_trace({f, f, f}, {{0, 0}});
    EXPECT_DOUBLE_EQ(homing_fitness(tr), 0.0);
}

TEST(Homing, TwoStepApproach) {
    const auto one = make_trace({{{0, 40}}, {{0, 20}}, {{0, 0}}}, {{0, 0}});
    EXPECT_DOUBLE_EQ(homing_fitness(one), 0.75);
    // two robots approaching from opposite sides; raw term stays 0.75
    const auto two = make_trace({{{0, 40}, {0, -40}}, {{0, 20}, {0, -20}}, {{0, 0}, {0, 0}}}, {{0, 0}});
    EXPECT_DOUBLE_EQ(homing_fitness(two), 0.75 * safety_coefficient(two));
}

TEST(Homing, MovingAwayIsNegative) {
    const auto tr = make_trace({{{0, 40}}, {{0, 80}}}, {{0, 0}});
    EXPECT_DOUBLE_EQ(homing_fitness(tr), -1.0);
}

TEST(Homing, StartRebasedOnWaypointSwitch) {
    // second waypoint 10 m from the robot when it becomes active
    const auto tr = make_trace({{{0, 0}}, {{0, 0}}, {{0, 5}}}, {{0, 100}, {0, 10}}, {0, 1});
    EXPECT_DOUBLE_EQ(homing_fitness(tr), (0.0 + 0.5) / 2.0);
}

TEST(Dispersion, Examples) {
    const std::vector<Vec2> lattice{{0, 0}, {20, 0}, {0, 20}, {20, 20}};
    EXPECT_DOUBLE_EQ(dispersion_fitness(make_trace({lattice, lattice, lattice})), 1.0);
    const std::vector<Vec2> tight{{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    EXPECT_DOUBLE_EQ(dispersion_fitness(make_trace({tight, tight})), 0.5);
    const std::vector<Vec2> same{{1, 1}, {1, 1}, {1, 1}};
    EXPECT_DOUBLE_EQ(dispersion_fitness(make_trace({same, same})), 0.0);
}

TEST(Clusters, Examples) {
    const std::vector<Vec2> a{{0, 0}, {5, 0}, {20, 0}};
    const auto pa = cluster_partition(a);
    ASSERT_EQ(pa.clusters.size(), 2U);
    EXPECT_EQ(pa.clusters[0], (std::vector<int>{0, 1}));
    EXPECT_EQ(pa.clusters[1], (std::vector<int>{2}));
    const std::vector<Vec2> b{{0, 0}, {6, 0}, {12, 0}};
    EXPECT_EQ(cluster_count(b), 1U);
    const std::vector<Vec2> c{{3, 3}};
    EXPECT_EQ(cluster_count(c), 1U);
    const std::vector<Vec2> edge{{0, 0}, {7, 0}};
    EXPECT_EQ(cluster_count(edge), 2U);
}

TEST(Clusters, MatchesTransitiveClosure) {
    const auto rep = checks::cluster_oracle_equivalence(400, 5);
    EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Clustering, Examples) {
    const std::vector<Vec2> pair_a{{0, 0}, {4, 0}, {50, 0}, {54, 0}};
    const std::vector<Vec2> joined{{0, 0}, {4, 0}, {8, 0}, {12, 0}};
    const auto tr = make_trace({pair_a, pair_a, joined});
    const double raw = (1.0 * (2.0 / 3.0) + 2.0 * 1.0) / 3.0;
    EXPECT_NEAR(clustering_fitness(tr), raw * safety_coefficient(tr), 1e-15);
    EXPECT_NEAR(raw, 0.8889, 1e-4);
    EXPECT_DOUBLE_EQ(clustering_fitness(make_trace({joined, joined, joined})), safety_coefficient(4.0));
    const std::vector<Vec2> apart{{0, 0}, {50, 0}, {100, 0}};
    EXPECT_DOUBLE_EQ(clustering_fitness(make_trace({apart, apart})), 0.0);
}

TEST(Fitness, MatchesBruteForceOracles) {
    const auto rep = checks::fitness_oracle_equivalence(200, 8);
    EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Fitness, RejectsIncompleteTraces) {
    TrajectoryTrace tr;
    EXPECT_THROW(homing_fitness(tr), EvaluationError);
    auto bad = make_trace({{{0, 0}}, {{0, 1}}}, {{0, 0}});
    bad.positions.pop_back();
    EXPECT_THROW(dispersion_fitness(bad), EvaluationError);
    auto nowp = make_trace({{{0, 0}}, {{0, 1}}}, {}, {-1});
    EXPECT_THROW(homing_fitness(nowp), EvaluationError);
}

TEST(Coverage, DecaysToZeroExactly) {
    const auto rep = checks::coverage_decay_exact();
    EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Coverage, VisitRadius) {
    CoverageGrid g(GeoFence::rectangle({0, 0}, 40, 40));
    const std::vector<Vec2> at{{0.5, 0.5}};
    g.step(at);
    EXPECT_DOUBLE_EQ(g.mean_value(), 0.0);  // t = 1 contributes nothing
    g.step(at);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const double d = distance(g.cell_center(c, r), at[0]);
            EXPECT_EQ(g.value(c, r), d <= 5.0 ? 1.0 : 0.0);
        }
    }
}

TEST(Coverage, IncrementalMeanMatchesDense) {
    Rng rng = make_rng(4);
    CoverageConfig cfg;
    cfg.decay = 0.05;
    CoverageGrid g(GeoFence({{0, 0}, {60, 0}, {60, 30}, {30, 30}, {30, 60}, {0, 60}}), cfg);
    std::vector<Vec2> pos(3, Vec2{10, 10});
    for (int t = 0; t < 300; ++t) {
        for (auto& p : pos) p += Vec2{uniform(rng, -3, 3), uniform(rng, -3, 3)};
        g.step(pos);
        EXPECT_NEAR(g.mean_value(), g.mean_value_dense(), 1e-12);
    }
}

TEST(Monitoring, Examples) {
    TrajectoryTrace away = make_trace({{{500, 500}}, {{500, 500}}, {{500, 500}}});
    away.fence = GeoFence::rectangle({0, 0}, 10, 10);
    EXPECT_DOUBLE_EQ(monitoring_fitness(away), 0.0);

    TrajectoryTrace all = make_trace({{{0, 0}}, {{0, 0}}, {{0, 0}}, {{0, 0}}});
    all.fence = GeoFence::rectangle({0, 0}, 4, 4);
    EXPECT_NEAR(monitoring_fitness(all), 2.0 / 3.0, 1e-15);
}

TEST(Monitoring, MoreRobotsCoverMore) {
    const TaskSpec task = default_task(TaskKind::monitoring);
    // a robot that drives in a wide arc covers the area; more robots cover more
    Rng rng = make_rng(2);
    neat::Genome g = neat::make_minimal_genome(11, 2, rng);
    for (auto& c : g.connections) c.weight = 0.0;
    g.connections[static_cast<std::size_t>(neat::initial_innovation(11, 0, 2))].weight = 1.0;
    g.connections[static_cast<std::size_t>(neat::initial_innovation(11, 1, 2))].weight = 0.05;
    TaskSpec t = task;
    t.trial.fixed_fence = GeoFence::rectangle({0, 0}, 100, 100);
    t.trial.random_fence.reset();
    t.duration_steps = 600;
    int better = 0;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        Rng r1 = make_rng(s);
        Rng r8 = make_rng(s);
        const double one = run_trial(g, t, sample_trial(t.trial, r1, 1)).score;
        const double eight = run_trial(g, t, sample_trial(t.trial, r8, 8)).score;
        better += one < eight ? 1 : 0;
    }
    EXPECT_EQ(better, 3);
}

TEST(Coverage, GridFileRoundTrip) {
    CoverageGrid g(GeoFence::rectangle({3.3, -1.7}, 25, 13));
    Rng rng = make_rng(5);
    for (int t = 0; t < 50; ++t) {
        const std::vector<Vec2> p{{uniform(rng, -10, 15), uniform(rng, -8, 5)}};
        g.step(p);
    }
    std::stringstream ss;
    g.write(ss);
    const CoverageMap m = read_coverage_map(ss);
    ASSERT_EQ(m.cols, g.cols());
    ASSERT_EQ(m.rows, g.rows());
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const double v = m.values[static_cast<std::size_t>(r * m.cols + c)];
            EXPECT_EQ(v, g.in_area(c, r) ? g.value(c, r) : -1.0);
        }
    }
}

}  // namespace
