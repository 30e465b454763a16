#pragma once

// Line-oriented genome text format:
//
//   swarmevo-genome 1
//   inputs <n>
//   outputs <n>
//   fitness <real>
//   node <id> <input|bias|output|hidden>          (one per node, ascending id)
//   conn <innovation> <in> <out> <weight> <0|1>   (one per gene, ascending innovation)
//
// Reals are written in shortest round-trip form, so write -> read -> write is
// byte-identical and the parsed genome compares equal.

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "swarmevo/errors.hpp"
#include "swarmevo/neat/genome.hpp"

namespace swarmevo::neat {

inline std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline double parse_real(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ConfigError("bad number '" + std::string(s) + "'");
    }
    return v;
}

inline void write_genome(std::ostream& os, const Genome& g) {
    os << "swarmevo-genome 1\n";
    os << "inputs " << g.num_inputs << '\n';
    os << "outputs " << g.num_outputs << '\n';
    os << "fitness " << format_real(g.fitness) << '\n';
    for (const NodeGene& n : g.nodes) {
        os << "node " << n.id << ' ' << to_string(n.role) << '\n';
    }
    for (const ConnectionGene& c : g.connections) {
        os << "conn " << c.innovation << ' ' << c.in << ' ' << c.out << ' ' << format_real(c.weight) << ' '
           << (c.enabled ? 1 : 0) << '\n';
    }
}

inline std::string genome_to_string(const Genome& g) {
    std::ostringstream os;
    write_genome(os, g);
    return os.str();
}

inline Genome read_genome(std::istream& is) {
    Genome g;
    std::string line;
    int line_no = 0;
    bool header = false;
    auto fail = [&](const std::string& why) {
        throw ConfigError("genome line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (!header) {
            int version = 0;
            if (key != "swarmevo-genome" || !(ls >> version) || version != 1) {
                fail("expected 'swarmevo-genome 1'");
            }
            header = true;
            continue;
        }
        if (key == "inputs") {
            if (!(ls >> g.num_inputs)) fail("bad inputs");
        } else if (key == "outputs") {
            if (!(ls >> g.num_outputs)) fail("bad outputs");
        } else if (key == "fitness") {
            std::string v;
            if (!(ls >> v)) fail("bad fitness");
            g.fitness = parse_real(v);
        } else if (key == "node") {
            NodeGene n;
            std::string role;
            if (!(ls >> n.id >> role)) fail("bad node");
            const auto r = parse_role(role);
            if (!r) fail("unknown role '" + role + "'");
            n.role = *r;
            g.nodes.push_back(n);
        } else if (key == "conn") {
            ConnectionGene c;
            std::string w;
            int enabled = 0;
            if (!(ls >> c.innovation >> c.in >> c.out >> w >> enabled)) fail("bad conn");
            c.weight = parse_real(w);
            c.enabled = enabled != 0;
            g.connections.push_back(c);
        } else {
            fail("unknown record '" + key + "'");
        }
    }
    if (!header) {
        throw ConfigError("empty genome file");
    }
    try {
        g.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string("invalid genome: ") + e.what());
    }
    return g;
}

inline Genome genome_from_string(const std::string& s) {
    std::istringstream is(s);
    return read_genome(is);
}

inline void save_genome(const std::string& path, const Genome& g) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot write genome file " + path);
    }
    write_genome(os, g);
}

inline Genome load_genome(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("cannot open genome file " + path);
    }
    return read_genome(is);
}

}  // namespace swarmevo::neat
