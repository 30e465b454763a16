#pragma once

// Speciation, explicit fitness sharing and generational reproduction.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/reproduction.hpp"
#include "swarmevo/random.hpp"

namespace swarmevo::neat {

struct Species {
    int id = 0;
    Genome representative;
    std::vector<std::size_t> members;  ///< indices into Population::genomes
    double best_fitness = -std::numeric_limits<double>::infinity();
    int last_improved = 0;  ///< generation of the last best-fitness improvement
};

struct Population {
    NeatParams params;
    std::vector<Genome> genomes;
    std::vector<Species> species;
    InnovationRegistry registry;
    int generation = 0;
    int next_species_id = 0;
};

inline Population make_population(const NeatParams& params, int num_inputs, int num_outputs, Rng& rng) {
    Population pop;
    pop.params = params;
    pop.registry = InnovationRegistry(num_inputs, num_outputs);
    pop.genomes.reserve(static_cast<std::size_t>(params.population_size));
    for (int i = 0; i < params.population_size; ++i) {
        pop.genomes.push_back(make_minimal_genome(num_inputs, num_outputs, rng, params.weight_init_range));
    }
    return pop;
}

/// Assigns every genome to the first species whose representative lies within
/// the compatibility threshold, founding new species as needed. Species left
/// without members are dropped.
inline void speciate(Population& pop) {
    for (Species& s : pop.species) {
        s.members.clear();
    }
    for (std::size_t i = 0; i < pop.genomes.size(); ++i) {
        const Genome& g = pop.genomes[i];
        bool placed = false;
        for (Species& s : pop.species) {
            if (compatibility_distance(g, s.representative, pop.params) < pop.params.compatibility_threshold) {
                s.members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Species s;
            s.id = pop.next_species_id++;
            s.representative = g;
            s.members.push_back(i);
            s.last_improved = pop.generation;
            pop.species.push_back(std::move(s));
        }
    }
    std::erase_if(pop.species, [](const Species& s) { return s.members.empty(); });
}

namespace detail {

/// Splits `total` proportionally to `scores` using largest remainders; ties go
/// to the lower index.
inline std::vector<int> apportion(const std::vector<double>& scores, int total) {
    const std::size_t n = scores.size();
    std::vector<int> out(n, 0);
    if (n == 0 || total <= 0) {
        return out;
    }
    double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
    std::vector<double> exact(n);
    for (std::size_t i = 0; i < n; ++i) {
        exact[i] = sum > 0.0 ? scores[i] / sum * total : static_cast<double>(total) / static_cast<double>(n);
        out[i] = static_cast<int>(std::floor(exact[i]));
    }
    int assigned = std::accumulate(out.begin(), out.end(), 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return exact[a] - out[a] > exact[b] - out[b];
    });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % n) {
        ++out[order[k]];
        ++assigned;
    }
    return out;
}

}  // namespace detail

/// Produces the next generation from an evaluated population. Population size
/// is preserved exactly; the registry starts a new generation.
inline void next_generation(Population& pop, Rng& rng) {
    const NeatParams& p = pop.params;
    speciate(pop);

    for (Species& s : pop.species) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t m : s.members) {
            best = std::max(best, pop.genomes[m].fitness);
        }
        if (best > s.best_fitness) {
            s.best_fitness = best;
            s.last_improved = pop.generation;
        }
    }

    std::vector<Species*> alive;
    for (Species& s : pop.species) {
        if (pop.generation - s.last_improved < p.stale_generations) {
            alive.push_back(&s);
        }
    }
    if (alive.empty()) {
        // every species stagnated: keep the two with the best fitness
        std::vector<Species*> all;
        for (Species& s : pop.species) {
            all.push_back(&s);
        }
        std::stable_sort(all.begin(), all.end(),
                         [](const Species* a, const Species* b) { return a->best_fitness > b->best_fitness; });
        for (std::size_t k = 0; k < all.size() && k < 2; ++k) {
            all[k]->last_improved = pop.generation;
            alive.push_back(all[k]);
        }
    }

    double min_fitness = std::numeric_limits<double>::infinity();
    for (const Genome& g : pop.genomes) {
        min_fitness = std::min(min_fitness, g.fitness);
    }
    // Fitness sharing: a species' share is the sum of member fitness / size,
    // i.e. its mean (shifted so every genome is non-negative).
    std::vector<double> shares;
    for (const Species* s : alive) {
        double sum = 0.0;
        for (std::size_t m : s->members) {
            sum += pop.genomes[m].fitness - min_fitness + 1e-6;
        }
        shares.push_back(sum / static_cast<double>(s->members.size()));
    }
    const std::vector<int> quota = detail::apportion(shares, p.population_size);

    // ranked parent pools per species
    std::vector<std::vector<std::size_t>> pools(alive.size());
    for (std::size_t k = 0; k < alive.size(); ++k) {
        std::vector<std::size_t> ranked = alive[k]->members;
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            return pop.genomes[a].fitness > pop.genomes[b].fitness;
        });
        pools[k] = std::move(ranked);
    }

    pop.registry.new_generation();
    std::vector<Genome> next;
    next.reserve(static_cast<std::size_t>(p.population_size));
    for (std::size_t k = 0; k < alive.size(); ++k) {
        int remaining = quota[k];
        if (remaining <= 0) {
            continue;
        }
        const std::vector<std::size_t>& ranked = pools[k];
        if (static_cast<int>(ranked.size()) > p.elitism_min_species_size) {
            Genome champ = pop.genomes[ranked.front()];
            next.push_back(std::move(champ));
            --remaining;
        }
        const auto survivors = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(p.survival_threshold * static_cast<double>(ranked.size()))));
        const int pool = static_cast<int>(std::min(survivors, ranked.size()));
        for (; remaining > 0; --remaining) {
            const Genome& mum = pop.genomes[ranked[static_cast<std::size_t>(uniform_int(rng, 0, pool - 1))]];
            Genome child;
            if (bernoulli(rng, p.crossover_prob)) {
                const Genome* dad = nullptr;
                if (alive.size() > 1 && bernoulli(rng, p.interspecies_mating_prob)) {
                    std::size_t other = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(alive.size()) - 2));
                    if (other >= k) {
                        ++other;
                    }
                    dad = &pop.genomes[pools[other].front()];
                } else {
                    dad = &pop.genomes[ranked[static_cast<std::size_t>(uniform_int(rng, 0, pool - 1))]];
                }
                child = crossover(mum, *dad, rng, p.disable_inherited_prob);
            } else {
                child = mum;
            }
            mutate(child, p, pop.registry, rng);
            next.push_back(std::move(child));
        }
    }

    // representatives for the next round: a random member of each surviving species
    std::vector<Species> kept;
    for (Species* s : alive) {
        Species copy = *s;
        copy.representative = pop.genomes[s->members[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<int>(s->members.size()) - 1))]];
        copy.members.clear();
        kept.push_back(std::move(copy));
    }
    pop.species = std::move(kept);
    for (Genome& g : next) {
        g.fitness = 0.0;
    }
    pop.genomes = std::move(next);
    ++pop.generation;
}

}  // namespace swarmevo::neat
