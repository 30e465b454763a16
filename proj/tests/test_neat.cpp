#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "property_checks.hpp"
#include "swarmevo/neat/genome_io.hpp"
#include "swarmevo/neat/network.hpp"
#include "swarmevo/neat/population.hpp"

using namespace swarmevo;
using namespace swarmevo::neat;

namespace {

Genome bare(int nin, int nout) {
    Genome g;
    g.num_inputs = nin;
    g.num_outputs = nout;
    for (int i = 0; i < nin; ++i) g.nodes.push_back({i, NodeRole::input});
    g.nodes.push_back({nin, NodeRole::bias});
    for (int k = 0; k < nout; ++k) g.nodes.push_back({g.output_id(k), NodeRole::output});
    return g;
}

Genome zero_weight_genome() {
    Rng rng = make_rng(1);
    Genome g = make_minimal_genome(11, 2, rng);
    for (auto& c : g.connections) c.weight = 0.0;
    return g;
}

TEST(Network, ZeroWeightsGiveHalf) {
    Network net(zero_weight_genome());
    std::vector<double> in(11, 0.7);
    const auto out = net.activate(in);
    ASSERT_EQ(out.size(), 2U);
    EXPECT_DOUBLE_EQ(out[0], 0.5);
    EXPECT_DOUBLE_EQ(out[1], 0.5);
}

TEST(Network, SingleConnectionClosedForm) {
    for (double w : {-1.3, -0.2, 0.0, 0.4, 2.0}) {
        Genome g = bare(11, 2);
        g.add_connection({0, g.output_id(0), w, true, 0});
        Network net(g);
        std::vector<double> in(11, 0.0);
        in[0] = 1.0;
        const auto out = net.activate(in);
        EXPECT_NEAR(out[0], 1.0 / (1.0 + std::exp(-4.9 * w)), 1e-15);
        EXPECT_DOUBLE_EQ(out[1], 0.5);
    }
}

TEST(Network, HiddenChainFeedsForwardInOneActivation) {
    Genome g = bare(1, 1);
    g.add_node({3, NodeRole::hidden});
    g.add_connection({0, 3, 1.0, true, 0});
    g.add_connection({3, 2, 1.0, true, 1});
    Network net(g);
    const std::vector<double> in{1.0};
    const double h = steepened_sigmoid(1.0, 4.9);
    EXPECT_NEAR(net.activate(in)[0], steepened_sigmoid(h, 4.9), 1e-15);
}

TEST(Network, DeterministicDecoding) {
    Rng rng = make_rng(4);
    Population pop = make_population(checks::churn_params(), 11, 2, rng);
    for (int gen = 0; gen < 6; ++gen) {
        for (auto& g : pop.genomes) g.fitness = uniform(rng, 0, 1);
        next_generation(pop, rng);
    }
    for (const Genome& g : pop.genomes) {
        Network a(g);
        Network b(g);
        Rng in_rng = make_rng(8);
        for (int t = 0; t < 30; ++t) {
            std::vector<double> in(11);
            for (double& v : in) v = uniform(in_rng, 0, 1);
            const auto oa = a.activate(in);
            const std::vector<double> keep(oa.begin(), oa.end());
            const auto ob = b.activate(in);
            EXPECT_EQ(keep[0], ob[0]);
            EXPECT_EQ(keep[1], ob[1]);
        }
    }
}

TEST(Network, RecurrentSelfLinkRemembersPreviousStep) {
    Genome g = bare(1, 1);
    g.add_connection({2, 2, 1.0, true, 0});
    Network net(g);
    const std::vector<double> in{0.0};
    const double first = net.activate(in)[0];
    EXPECT_DOUBLE_EQ(first, 0.5);
    EXPECT_NEAR(net.activate(in)[0], steepened_sigmoid(0.5, 4.9), 1e-15);
    net.reset();
    EXPECT_DOUBLE_EQ(net.activate(in)[0], 0.5);
}

TEST(Mutation, AllProbabilitiesZeroLeavesGenomeUntouched) {
    Rng rng = make_rng(3);
    Genome g = make_minimal_genome(11, 2, rng);
    const Genome before = g;
    NeatParams p;
    p.add_node_prob = 0;
    p.add_connection_prob = 0;
    p.weight_mutation_prob = 0;
    InnovationRegistry reg(11, 2);
    for (int i = 0; i < 100; ++i) mutate(g, p, reg, rng);
    EXPECT_EQ(g, before);
}

TEST(Mutation, AddNodeRewiring) {
    checks::Report rep;
    for (std::uint64_t s = 1; s <= 50; ++s) checks::check_add_node_rule(rep, s);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Mutation, SameLinkSameGenerationSharesInnovation) {
    Rng rng = make_rng(6);
    InnovationRegistry reg(11, 2);
    Genome a = make_minimal_genome(11, 2, rng);
    Genome b = make_minimal_genome(11, 2, rng);
    neat::detail::mutate_add_node(a, reg, rng);
    // give b the same split so both can grow the same hidden -> output link
    b = a;
    const int h = a.nodes.back().id;
    const int ia = reg.connection(h, a.output_id(1));
    const int ib = reg.connection(h, b.output_id(1));
    EXPECT_EQ(ia, ib);
    Genome c = make_minimal_genome(11, 2, rng);
    Genome d = make_minimal_genome(11, 2, rng);
    Rng r1 = make_rng(100);
    Rng r2 = make_rng(100);
    neat::detail::mutate_add_node(c, reg, r1);
    neat::detail::mutate_add_node(d, reg, r2);
    EXPECT_EQ(c.nodes.back().id, d.nodes.back().id);
    EXPECT_EQ(c.connections.back().innovation, d.connections.back().innovation);
}

TEST(Mutation, NoCycleWhenRecurrenceDisabled) {
    Rng rng = make_rng(12);
    NeatParams p = checks::churn_params();
    p.allow_recurrent = false;
    p.add_connection_prob = 1.0;
    Population pop = make_population(p, 11, 2, rng);
    for (int gen = 0; gen < 10; ++gen) {
        for (auto& g : pop.genomes) g.fitness = uniform(rng, 0, 1);
        next_generation(pop, rng);
    }
    for (const Genome& g : pop.genomes) {
        EXPECT_EQ(Network(g).recurrent_link_count(), 0U);
    }
}

TEST(Registry, MonotoneAndShared) {
    checks::Report rep;
    checks::check_registry(rep);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Crossover, IdenticalParents) {
    Rng rng = make_rng(2);
    Genome a = make_minimal_genome(11, 2, rng);
    InnovationRegistry reg(11, 2);
    neat::detail::mutate_add_node(a, reg, rng);
    const Genome child = crossover(a, a, rng);
    EXPECT_EQ(child.nodes, a.nodes);
    ASSERT_EQ(child.connections.size(), a.connections.size());
    for (std::size_t i = 0; i < a.connections.size(); ++i) {
        EXPECT_EQ(child.connections[i].innovation, a.connections[i].innovation);
        EXPECT_EQ(child.connections[i].weight, a.connections[i].weight);
    }
}

TEST(Crossover, DisjointParentsTakeFitterGenes) {
    Genome a = bare(2, 1);
    a.add_connection({0, 3, 0.5, true, 0});
    a.add_connection({1, 3, -0.5, true, 1});
    Genome b = bare(2, 1);
    b.add_connection({2, 3, 0.9, true, 7});
    a.fitness = 2.0;
    b.fitness = 1.0;
    Rng rng = make_rng(1);
    EXPECT_EQ(crossover(a, b, rng).connections, a.connections);
    EXPECT_EQ(crossover(b, a, rng).connections, a.connections);
}

TEST(Crossover, TieFavoursFirstArgument) {
    Genome a = bare(2, 1);
    a.add_connection({0, 3, 0.5, true, 0});
    Genome b = bare(2, 1);
    b.add_connection({1, 3, 0.9, true, 4});
    Rng rng = make_rng(1);
    EXPECT_EQ(crossover(a, b, rng).connections, a.connections);
    EXPECT_EQ(crossover(b, a, rng).connections, b.connections);
}

TEST(Crossover, ChildGenesAreSubsetOfParents) {
    checks::Report rep;
    checks::check_crossover_subset(rep, 17);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Compatibility, Examples) {
    Genome a = bare(5, 1);
    Genome b = bare(5, 1);
    for (int i = 0; i < 5; ++i) {
        a.add_connection({i, 6, 0.0, true, i});
        b.add_connection({i, 6, (i % 2 == 0) ? 0.5 : -0.5, true, i});
    }
    EXPECT_DOUBLE_EQ(compatibility_distance(a, a, 1, 1, 0.4), 0.0);
    EXPECT_NEAR(compatibility_distance(a, b, 1, 1, 0.4), 0.2, 1e-15);

    Genome c = bare(5, 1);
    c.add_connection({0, 6, 0.0, true, 0});
    Genome d = c;
    d.add_connection({1, 6, 0.0, true, 1});
    d.add_connection({2, 6, 0.0, true, 2});
    EXPECT_DOUBLE_EQ(compatibility_distance(c, d, 1, 1, 0.4), 2.0);
    EXPECT_DOUBLE_EQ(compatibility_distance(d, c, 1, 1, 0.4), 2.0);
}

TEST(Compatibility, DisjointCountedSeparately) {
    Genome a = bare(5, 1);
    Genome b = bare(5, 1);
    a.add_connection({0, 6, 0.0, true, 0});
    a.add_connection({1, 6, 0.0, true, 2});
    b.add_connection({0, 6, 0.0, true, 0});
    b.add_connection({2, 6, 0.0, true, 1});
    b.add_connection({3, 6, 0.0, true, 5});
    // innovation 1 and 2 are disjoint, 5 is excess
    EXPECT_DOUBLE_EQ(compatibility_distance(a, b, 1, 3, 0), 1.0 + 6.0);
}

TEST(Population, SizeInvariantAndSelfDistanceZero) {
    checks::Report rep;
    checks::check_population_invariants(rep, 21);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Population, ElitismKeepsChampionStructure) {
    Rng rng = make_rng(30);
    NeatParams p;
    p.compatibility_threshold = 1e9;  // one species
    Population pop = make_population(p, 11, 2, rng);
    for (auto& g : pop.genomes) g.fitness = uniform(rng, 0, 1);
    pop.genomes[17].fitness = 5.0;
    const Genome champ = pop.genomes[17];
    next_generation(pop, rng);
    ASSERT_EQ(pop.species.size(), 1U);
    bool found = false;
    for (const auto& g : pop.genomes) {
        found = found || (g.nodes == champ.nodes && g.connections == champ.connections);
    }
    EXPECT_TRUE(found);
}

TEST(Population, FixedSeedIdenticalNextGeneration) {
    auto run = [] {
        Rng rng = make_rng(55);
        Population pop = make_population(checks::churn_params(), 11, 2, rng);
        for (int gen = 0; gen < 5; ++gen) {
            for (std::size_t i = 0; i < pop.genomes.size(); ++i) {
                pop.genomes[i].fitness = std::sin(static_cast<double>(i) * 0.37 + gen);
            }
            next_generation(pop, rng);
        }
        return pop.genomes;
    };
    EXPECT_EQ(run(), run());
}

double surrogate_fitness(const Genome& g) {
    // Convex target: drive output 0 towards 0.8 and output 1 towards 0.2 on a
    // fixed probe set.
    Network net(g);
    double err = 0.0;
    for (int k = 0; k < 8; ++k) {
        std::vector<double> in(11);
        for (int i = 0; i < 11; ++i) in[static_cast<std::size_t>(i)] = std::fmod(0.13 * (k + 1) * (i + 1), 1.0);
        net.reset();
        const auto out = net.activate(in);
        err += (out[0] - 0.8) * (out[0] - 0.8) + (out[1] - 0.2) * (out[1] - 0.2);
    }
    return 1.0 - err / 8.0;
}

TEST(Population, FixedTopologyGaImprovesMeanFitness) {
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng = make_rng(seed);
        NeatParams p;
        p.add_node_prob = 0;
        p.add_connection_prob = 0;
        Population pop = make_population(p, 11, 2, rng);
        auto mean = [&] {
            double s = 0;
            for (auto& g : pop.genomes) {
                g.fitness = surrogate_fitness(g);
                s += g.fitness;
            }
            return s / static_cast<double>(pop.genomes.size());
        };
        const double first = mean();
        double last = first;
        for (int gen = 0; gen < 20; ++gen) {
            next_generation(pop, rng);
            last = mean();
        }
        for (const auto& g : pop.genomes) {
            EXPECT_EQ(g.connections.size(), 24U);
        }
        improved += last >= first ? 1 : 0;
    }
    EXPECT_GE(improved, 4);
}

TEST(GenomeIo, RoundTripIsExact) {
    Rng rng = make_rng(40);
    Population pop = make_population(checks::churn_params(), 11, 2, rng);
    for (int gen = 0; gen < 6; ++gen) {
        for (auto& g : pop.genomes) g.fitness = uniform(rng, -1, 1);
        next_generation(pop, rng);
    }
    for (Genome g : pop.genomes) {
        g.fitness = uniform(rng, -1, 1);
        const std::string text = genome_to_string(g);
        const Genome back = genome_from_string(text);
        EXPECT_EQ(back, g);
        EXPECT_EQ(genome_to_string(back), text);
    }
}

TEST(GenomeIo, RejectsMalformedInput) {
    EXPECT_THROW(genome_from_string(""), ConfigError);
    EXPECT_THROW(genome_from_string("swarmevo-genome 2\n"), ConfigError);
    EXPECT_THROW(genome_from_string("swarmevo-genome 1\ninputs 1\noutputs 1\nnode 0 input\n"), ConfigError);
    EXPECT_THROW(genome_from_string("swarmevo-genome 1\nbogus 1\n"), ConfigError);
}

TEST(GenomeIo, RealFormattingRoundTrips) {
    Rng rng = make_rng(41);
    for (int i = 0; i < 1000; ++i) {
        const double v = gaussian(rng, 10.0) * std::pow(10.0, uniform_int(rng, -12, 12));
        EXPECT_EQ(parse_real(format_real(v)), v);
    }
}

}  // namespace
