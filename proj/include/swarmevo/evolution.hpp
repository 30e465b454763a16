#pragma once

// Evolutionary pipeline: multi-trial fitness evaluation, the generational
// NEAT loop with per-generation champion archiving, post-evaluation of
// champions on fresh trials, and best-controller selection across runs.
//
// Every trial seed is derived from (namespace, run seed, generation, genome
// index, trial index), so results do not depend on thread scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "swarmevo/neat/genome.hpp"
#include "swarmevo/neat/population.hpp"
#include "swarmevo/parallel.hpp"
#include "swarmevo/random.hpp"
#include "swarmevo/sensors.hpp"
#include "swarmevo/tasks.hpp"

namespace swarmevo {

struct EvaluationSpec {
    TaskSpec task;
    int trials = 10;
    std::uint64_t seed = 1;  ///< run seed
};

/// Counts executed trials; shared by concurrent evaluators.
struct TrialAudit {
    std::atomic<std::uint64_t> executed{0};
    std::atomic<std::uint64_t> failed{0};
};

inline std::uint64_t evolution_trial_seed(std::uint64_t run_seed, int generation, int genome_index, int trial) noexcept {
    return derive_seed({seed_tag::evolution_trial, run_seed, static_cast<std::uint64_t>(generation),
                        static_cast<std::uint64_t>(genome_index), static_cast<std::uint64_t>(trial)});
}

inline std::uint64_t post_evaluation_seed(std::uint64_t run_seed, int generation, int trial) noexcept {
    return derive_seed({seed_tag::post_evaluation, run_seed, static_cast<std::uint64_t>(generation),
                        static_cast<std::uint64_t>(trial)});
}

/// Scores one seeded trial; a setup failure scores 0 and is reported.
inline double score_seeded_trial(const neat::Genome& g, const TaskSpec& task, std::uint64_t seed,
                                 TrialAudit* audit) {
    if (audit != nullptr) {
        audit->executed.fetch_add(1, std::memory_order_relaxed);
    }
    try {
        return run_trial(g, task, seed).score;
    } catch (const SetupError& e) {
        if (audit != nullptr) {
            audit->failed.fetch_add(1, std::memory_order_relaxed);
        }
        std::clog << "trial setup failed (seed " << seed << "): " << e.what() << '\n';
        return 0.0;
    }
}

/// Mean of `trials` scores produced by score(trial_index).
template <class Score>
double mean_of_trials(int trials, Score&& score) {
    double sum = 0.0;
    for (int k = 0; k < trials; ++k) {
        sum += score(k);
    }
    return sum / static_cast<double>(trials);
}

/// Fitness of a controller: the mean score over spec.trials independent trials.
inline double evaluate_genome(const neat::Genome& g, const EvaluationSpec& spec, int generation, int genome_index,
                              TrialAudit* audit = nullptr) {
    if (spec.trials < 1) {
        throw ConfigError("evaluation needs at least one trial");
    }
    return mean_of_trials(spec.trials, [&](int k) {
        return score_seeded_trial(g, spec.task, evolution_trial_seed(spec.seed, generation, genome_index, k), audit);
    });
}

struct PostEvalStats {
    double mean = 0.0;
    double stddev = 0.0;  ///< population standard deviation
    std::vector<double> scores;
};

inline PostEvalStats summarize(std::vector<double> scores) {
    PostEvalStats s;
    const bool constant = std::adjacent_find(scores.begin(), scores.end(), std::not_equal_to<>()) == scores.end();
    if (!scores.empty() && constant) {
        s.mean = scores.front();
    } else if (!scores.empty()) {
        s.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        double var = 0.0;
        for (double v : scores) {
            var += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(var / static_cast<double>(scores.size()));
    }
    s.scores = std::move(scores);
    return s;
}

/// Re-scores a controller on `n` fresh trials drawn from the post-evaluation
/// seed namespace (disjoint from evolution trials).
inline PostEvalStats post_evaluate(const neat::Genome& g, const TaskSpec& task, int n, std::uint64_t run_seed,
                                   int generation, unsigned threads = default_threads(), TrialAudit* audit = nullptr) {
    if (n < 1) {
        throw ConfigError("post-evaluation needs at least one trial");
    }
    std::vector<double> scores(static_cast<std::size_t>(n));
    parallel_for(scores.size(), threads, [&](std::size_t k) {
        scores[k] = score_seeded_trial(g, task, post_evaluation_seed(run_seed, generation, static_cast<int>(k)), audit);
    });
    return summarize(std::move(scores));
}

struct RunConfig {
    TaskSpec task;
    neat::NeatParams neat;
    int generations = 100;  ///< reproduction steps; generations 0..N are evaluated
    int trials = 10;
    std::uint64_t seed = 1;
    int posteval_trials = 100;  ///< 0 disables post-evaluation
    int posteval_stride = 1;    ///< post-evaluate every k-th generation (the last one always)
    unsigned threads = default_threads();
};

/// Budgets used when none is configured: clustering needs longer runs.
inline int default_generations(TaskKind k) noexcept { return k == TaskKind::clustering ? 400 : 100; }

inline RunConfig default_run_config(TaskKind k) {
    RunConfig c;
    c.task = default_task(k);
    c.generations = default_generations(k);
    return c;
}

struct GenerationRecord {
    int generation = 0;
    neat::Genome champion;
    double champion_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_so_far = 0.0;  ///< running maximum of champion_fitness
    std::optional<PostEvalStats> post;
};

struct RunArchive {
    std::uint64_t seed = 0;
    RunConfig config;
    std::vector<GenerationRecord> generations;  ///< append-only, one per evaluated generation
    std::uint64_t trials_executed = 0;
};

using ProgressFn = std::function<void(const GenerationRecord&)>;

/// Evaluates every genome of the current population (possibly concurrently).
inline void evaluate_population(neat::Population& pop, const EvaluationSpec& spec, unsigned threads,
                                TrialAudit* audit) {
    const int gen = pop.generation;
    parallel_for(pop.genomes.size(), threads, [&](std::size_t i) {
        pop.genomes[i].fitness = evaluate_genome(pop.genomes[i], spec, gen, static_cast<int>(i), audit);
    });
}

/// Post-evaluates archived champions in place (every `stride`-th generation
/// plus the last one).
inline void post_evaluate_archive(RunArchive& archive, int n, int stride, unsigned threads,
                                  TrialAudit* audit = nullptr) {
    if (n <= 0 || archive.generations.empty()) {
        return;
    }
    stride = std::max(1, stride);
    const std::size_t last = archive.generations.size() - 1;
    for (std::size_t i = 0; i < archive.generations.size(); ++i) {
        GenerationRecord& rec = archive.generations[i];
        if (i % static_cast<std::size_t>(stride) != 0 && i != last) {
            continue;
        }
        rec.post = post_evaluate(rec.champion, archive.config.task, n, archive.seed, rec.generation, threads, audit);
    }
}

/// Full evolutionary run. Reproducible bit-for-bit from cfg (including seed).
inline RunArchive run_evolution(const RunConfig& cfg, const ProgressFn& progress = {}) {
    if (cfg.generations < 0) {
        throw ConfigError("generation budget must be non-negative");
    }
    RunArchive archive;
    archive.seed = cfg.seed;
    archive.config = cfg;

    Rng init_rng = make_rng(derive_seed({seed_tag::initial_population, cfg.seed}));
    Rng repro_rng = make_rng(derive_seed({seed_tag::reproduction, cfg.seed}));
    neat::NeatParams np = cfg.neat;
    np.sigmoid_slope = cfg.task.neat_sigmoid_slope;
    neat::Population pop = neat::make_population(np, static_cast<int>(kSensorInputs), 2, init_rng);

    const EvaluationSpec spec{cfg.task, cfg.trials, cfg.seed};
    TrialAudit audit;
    double best = -std::numeric_limits<double>::infinity();
    for (int gen = 0; gen <= cfg.generations; ++gen) {
        evaluate_population(pop, spec, cfg.threads, &audit);

        std::size_t champ = 0;
        double sum = 0.0;
        for (std::size_t i = 0; i < pop.genomes.size(); ++i) {
            sum += pop.genomes[i].fitness;
            if (pop.genomes[i].fitness > pop.genomes[champ].fitness) {
                champ = i;
            }
        }
        GenerationRecord rec;
        rec.generation = gen;
        rec.champion = pop.genomes[champ];
        rec.champion_fitness = rec.champion.fitness;
        rec.mean_fitness = sum / static_cast<double>(pop.genomes.size());
        best = std::max(best, rec.champion_fitness);
        rec.best_so_far = best;
        if (progress) {
            progress(rec);
        }
        archive.generations.push_back(std::move(rec));

        if (gen < cfg.generations) {
            neat::next_generation(pop, repro_rng);
        }
    }
    archive.trials_executed = audit.executed.load();
    if (cfg.posteval_trials > 0) {
        post_evaluate_archive(archive, cfg.posteval_trials, cfg.posteval_stride, cfg.threads);
    }
    return archive;
}

struct SelectedController {
    std::uint64_t run_seed = 0;
    int generation = 0;
    neat::Genome genome;
    double post_mean = 0.0;
    double post_std = 0.0;
};

struct Selection {
    std::vector<SelectedController> controllers;
    std::vector<std::string> warnings;
};

/// Best-of-run champion by post-evaluation mean (earlier generation on ties),
/// or nothing when the run has no post-evaluated champion.
inline std::optional<SelectedController> best_of_run(const RunArchive& a) {
    std::optional<SelectedController> best;
    for (const GenerationRecord& r : a.generations) {
        if (!r.post) {
            continue;
        }
        if (!best || r.post->mean > best->post_mean) {
            best = SelectedController{a.seed, r.generation, r.champion, r.post->mean, r.post->stddev};
        }
    }
    return best;
}

/// Picks the `k` best best-of-run controllers across runs. Ties: earlier
/// generation, then lower run seed.
inline Selection select_top(const std::vector<RunArchive>& archives, std::size_t k = 3) {
    Selection sel;
    std::vector<SelectedController> candidates;
    for (const RunArchive& a : archives) {
        if (auto b = best_of_run(a)) {
            candidates.push_back(std::move(*b));
        } else {
            sel.warnings.push_back("run " + std::to_string(a.seed) + " has no post-evaluated champion");
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const SelectedController& x, const SelectedController& y) {
        if (x.post_mean != y.post_mean) {
            return x.post_mean > y.post_mean;
        }
        if (x.generation != y.generation) {
            return x.generation < y.generation;
        }
        return x.run_seed < y.run_seed;
    });
    if (candidates.size() < k) {
        sel.warnings.push_back("only " + std::to_string(candidates.size()) + " best-of-run controllers available, wanted " +
                               std::to_string(k));
    }
    candidates.resize(std::min(k, candidates.size()));
    sel.controllers = std::move(candidates);
    return sel;
}

}  // namespace swarmevo
