#pragma once

// On-disk run archive:
//
//   <dir>/config.json               run configuration snapshot
//   <dir>/summary.csv               generation,champion_fitness,mean_fitness,best_so_far,posteval_mean,posteval_std
//   <dir>/posteval.csv              generation,trial,score
//   <dir>/champions/gen_NNNN.genome one champion per generation
//
// posteval_mean/posteval_std are empty for generations that were not
// post-evaluated.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarmevo/config.hpp"
#include "swarmevo/errors.hpp"
#include "swarmevo/evolution.hpp"
#include "swarmevo/neat/genome_io.hpp"

namespace swarmevo {

inline std::string champion_file_name(int generation) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "gen_%04d.genome", generation);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot write " + p.string());
    }
    return os;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

}  // namespace detail

inline void write_summary_csv(std::ostream& os, const RunArchive& a) {
    os << "generation,champion_fitness,mean_fitness,best_so_far,posteval_mean,posteval_std\n";
    for (const auto& r : a.generations) {
        os << r.generation << ',' << neat::format_real(r.champion_fitness) << ',' << neat::format_real(r.mean_fitness)
           << ',' << neat::format_real(r.best_so_far) << ',';
        if (r.post) {
            os << neat::format_real(r.post->mean) << ',' << neat::format_real(r.post->stddev);
        } else {
            os << ',';
        }
        os << '\n';
    }
}

inline void write_posteval_csv(std::ostream& os, const RunArchive& a) {
    os << "generation,trial,score\n";
    for (const auto& r : a.generations) {
        if (!r.post) {
            continue;
        }
        for (std::size_t k = 0; k < r.post->scores.size(); ++k) {
            os << r.generation << ',' << k << ',' << neat::format_real(r.post->scores[k]) << '\n';
        }
    }
}

inline void write_archive(const std::filesystem::path& dir, const RunArchive& a) {
    std::filesystem::create_directories(dir / "champions");
    {
        auto os = detail::open_out(dir / "config.json");
        os << to_json(a.config).dump(2) << '\n';
    }
    {
        auto os = detail::open_out(dir / "summary.csv");
        write_summary_csv(os, a);
    }
    {
        auto os = detail::open_out(dir / "posteval.csv");
        write_posteval_csv(os, a);
    }
    for (const auto& r : a.generations) {
        neat::save_genome((dir / "champions" / champion_file_name(r.generation)).string(), r.champion);
    }
}

inline RunArchive read_archive(const std::filesystem::path& dir) {
    RunArchive a;
    a.config = load_run_config((dir / "config.json").string());
    a.seed = a.config.seed;

    std::ifstream sum(dir / "summary.csv");
    if (!sum) {
        throw ConfigError("archive " + dir.string() + " has no summary.csv");
    }
    std::string line;
    std::getline(sum, line);
    while (std::getline(sum, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (cells.size() != 6) {
            throw ConfigError("archive " + dir.string() + ": malformed summary row '" + line + "'");
        }
        GenerationRecord r;
        r.generation = std::stoi(cells[0]);
        r.champion_fitness = neat::parse_real(cells[1]);
        r.mean_fitness = neat::parse_real(cells[2]);
        r.best_so_far = neat::parse_real(cells[3]);
        if (!cells[4].empty()) {
            r.post = PostEvalStats{neat::parse_real(cells[4]), neat::parse_real(cells[5]), {}};
        }
        r.champion = neat::load_genome((dir / "champions" / champion_file_name(r.generation)).string());
        a.generations.push_back(std::move(r));
    }

    std::ifstream pe(dir / "posteval.csv");
    if (pe) {
        std::getline(pe, line);
        while (std::getline(pe, line)) {
            if (line.empty()) {
                continue;
            }
            const auto cells = detail::split_csv(line);
            if (cells.size() != 3) {
                throw ConfigError("archive " + dir.string() + ": malformed posteval row '" + line + "'");
            }
            const int gen = std::stoi(cells[0]);
            for (auto& r : a.generations) {
                if (r.generation == gen && r.post) {
                    r.post->scores.push_back(neat::parse_real(cells[2]));
                }
            }
        }
    }
    return a;
}

}  // namespace swarmevo
