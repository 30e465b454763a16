#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "swarmevo/neat/genome.hpp"
#include "swarmevo/random.hpp"

namespace swarmevo::neat {

/// Canonical NEAT defaults.
struct NeatParams {
    int population_size = 150;

    double compatibility_threshold = 3.0;
    double c_excess = 1.0;
    double c_disjoint = 1.0;
    double c_weight = 0.4;
    int small_genome_threshold = 20;  ///< N = 1 when both genomes have fewer genes

    double sigmoid_slope = 4.9;
    double survival_threshold = 0.2;
    int stale_generations = 15;
    int elitism_min_species_size = 5;  ///< champion copied when species has more members

    double weight_mutation_prob = 0.8;
    double weight_perturb_sigma = 0.5;
    double weight_reset_prob = 0.1;
    double weight_init_range = 1.0;
    double add_connection_prob = 0.05;
    double add_node_prob = 0.03;
    int add_connection_attempts = 20;
    bool allow_recurrent = true;

    double crossover_prob = 0.75;
    double interspecies_mating_prob = 0.001;
    double disable_inherited_prob = 0.75;
};

/// Hands out innovation numbers and hidden-node ids. Identical structural
/// mutations within one generation receive identical numbers.
class InnovationRegistry {
public:
    InnovationRegistry() = default;
    InnovationRegistry(int num_inputs, int num_outputs)
        : next_innovation_((num_inputs + 1) * num_outputs), next_node_(num_inputs + 1 + num_outputs) {}

    struct Split {
        int node;
        int in_innovation;   ///< in -> node
        int out_innovation;  ///< node -> out
    };

    /// Forget this generation's structural mutations.
    void new_generation() {
        links_.clear();
        splits_.clear();
    }

    int connection(int in, int out) {
        auto [it, fresh] = links_.try_emplace({in, out}, next_innovation_);
        if (fresh) {
            ++next_innovation_;
        }
        return it->second;
    }

    Split split(int innovation) {
        auto it = splits_.find(innovation);
        if (it != splits_.end()) {
            return it->second;
        }
        const Split s{next_node_++, next_innovation_, next_innovation_ + 1};
        next_innovation_ += 2;
        splits_.emplace(innovation, s);
        return s;
    }

    /// Fresh node id outside the per-generation sharing (used when a genome
    /// already owns the shared id).
    Split fresh_split() {
        const Split s{next_node_++, next_innovation_, next_innovation_ + 1};
        next_innovation_ += 2;
        return s;
    }

    [[nodiscard]] int next_innovation() const noexcept { return next_innovation_; }
    [[nodiscard]] int next_node() const noexcept { return next_node_; }

    void restore(int next_innovation, int next_node) {
        next_innovation_ = next_innovation;
        next_node_ = next_node;
    }

private:
    int next_innovation_ = 0;
    int next_node_ = 0;
    std::map<std::pair<int, int>, int> links_;
    std::map<int, Split> splits_;
};

namespace detail {

/// True when a path out -> ... -> in already exists over enabled links, i.e.
/// adding in -> out would close a cycle.
inline bool creates_cycle(const Genome& g, int in, int out) {
    if (in == out) {
        return true;
    }
    std::vector<int> frontier{out};
    std::vector<int> seen{out};
    while (!frontier.empty()) {
        const int n = frontier.back();
        frontier.pop_back();
        for (const ConnectionGene& c : g.connections) {
            if (!c.enabled || c.in != n) {
                continue;
            }
            if (c.out == in) {
                return true;
            }
            if (std::find(seen.begin(), seen.end(), c.out) == seen.end()) {
                seen.push_back(c.out);
                frontier.push_back(c.out);
            }
        }
    }
    return false;
}

inline bool mutate_add_node(Genome& g, InnovationRegistry& reg, Rng& rng) {
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < g.connections.size(); ++i) {
        if (g.connections[i].enabled) {
            enabled.push_back(i);
        }
    }
    if (enabled.empty()) {
        return false;
    }
    const std::size_t pick = enabled[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(enabled.size()) - 1))];
    const ConnectionGene old = g.connections[pick];
    InnovationRegistry::Split s = reg.split(old.innovation);
    if (g.find_node(s.node) != nullptr) {
        s = reg.fresh_split();
    }
    g.connections[pick].enabled = false;
    g.add_node({s.node, NodeRole::hidden});
    g.add_connection({old.in, s.node, 1.0, true, s.in_innovation});
    g.add_connection({s.node, old.out, old.weight, true, s.out_innovation});
    return true;
}

inline bool mutate_add_connection(Genome& g, const NeatParams& p, InnovationRegistry& reg, Rng& rng) {
    std::vector<int> targets;
    for (const NodeGene& n : g.nodes) {
        if (n.role == NodeRole::output || n.role == NodeRole::hidden) {
            targets.push_back(n.id);
        }
    }
    const int n_nodes = static_cast<int>(g.nodes.size());
    const int n_targets = static_cast<int>(targets.size());
    for (int attempt = 0; attempt < p.add_connection_attempts; ++attempt) {
        const int in = g.nodes[static_cast<std::size_t>(uniform_int(rng, 0, n_nodes - 1))].id;
        const int out = targets[static_cast<std::size_t>(uniform_int(rng, 0, n_targets - 1))];
        if (g.has_connection(in, out)) {
            continue;
        }
        if (!p.allow_recurrent && creates_cycle(g, in, out)) {
            continue;
        }
        const double w = uniform(rng, -p.weight_init_range, p.weight_init_range);
        g.add_connection({in, out, w, true, reg.connection(in, out)});
        return true;
    }
    return false;
}

}  // namespace detail

/// Applies NEAT mutation operators in place: add-node, add-connection, then
/// weight perturbation. With every probability at zero the genome is untouched.
inline void mutate(Genome& g, const NeatParams& p, InnovationRegistry& reg, Rng& rng) {
    if (bernoulli(rng, p.add_node_prob)) {
        detail::mutate_add_node(g, reg, rng);
    }
    if (bernoulli(rng, p.add_connection_prob)) {
        detail::mutate_add_connection(g, p, reg, rng);
    }
    if (bernoulli(rng, p.weight_mutation_prob)) {
        for (ConnectionGene& c : g.connections) {
            if (bernoulli(rng, p.weight_reset_prob)) {
                c.weight = uniform(rng, -p.weight_init_range, p.weight_init_range);
            } else {
                c.weight += gaussian(rng, p.weight_perturb_sigma);
            }
        }
    }
}

/// NEAT crossover aligned on innovation numbers. Matching genes come from
/// either parent at random; disjoint and excess genes come from the fitter
/// parent (the first argument when fitness is tied).
inline Genome crossover(const Genome& a, const Genome& b, Rng& rng, double disable_prob = 0.75) {
    const bool a_fitter = a.fitness >= b.fitness;
    const Genome& fit = a_fitter ? a : b;
    const Genome& other = a_fitter ? b : a;

    Genome child;
    child.num_inputs = fit.num_inputs;
    child.num_outputs = fit.num_outputs;
    child.nodes = fit.nodes;
    child.connections.reserve(fit.connections.size());

    std::size_t j = 0;
    for (const ConnectionGene& gene : fit.connections) {
        while (j < other.connections.size() && other.connections[j].innovation < gene.innovation) {
            ++j;
        }
        if (j < other.connections.size() && other.connections[j].innovation == gene.innovation) {
            const ConnectionGene& mate = other.connections[j];
            ConnectionGene c = bernoulli(rng, 0.5) ? gene : mate;
            if (!gene.enabled || !mate.enabled) {
                c.enabled = !bernoulli(rng, disable_prob);
            }
            child.connections.push_back(c);
        } else {
            child.connections.push_back(gene);
        }
    }
    return child;
}

/// delta = c1*E/N + c2*D/N + c3*mean|dw| over matching genes.
inline double compatibility_distance(const Genome& a, const Genome& b, double c1, double c2, double c3,
                                     int small_genome_threshold = 20) {
    const auto& ga = a.connections;
    const auto& gb = b.connections;
    if (ga.empty() && gb.empty()) {
        return 0.0;
    }
    std::size_t i = 0;
    std::size_t j = 0;
    int matching = 0;
    int disjoint = 0;
    int excess = 0;
    double weight_diff = 0.0;
    while (i < ga.size() && j < gb.size()) {
        if (ga[i].innovation == gb[j].innovation) {
            weight_diff += std::abs(ga[i].weight - gb[j].weight);
            ++matching;
            ++i;
            ++j;
        } else if (ga[i].innovation < gb[j].innovation) {
            ++disjoint;
            ++i;
        } else {
            ++disjoint;
            ++j;
        }
    }
    excess = static_cast<int>((ga.size() - i) + (gb.size() - j));
    const auto larger = static_cast<int>(std::max(ga.size(), gb.size()));
    const double n = larger < small_genome_threshold ? 1.0 : static_cast<double>(larger);
    const double mean_w = matching > 0 ? weight_diff / matching : 0.0;
    return c1 * excess / n + c2 * disjoint / n + c3 * mean_w;
}

inline double compatibility_distance(const Genome& a, const Genome& b, const NeatParams& p) {
    return compatibility_distance(a, b, p.c_excess, p.c_disjoint, p.c_weight, p.small_genome_threshold);
}

}  // namespace swarmevo::neat
