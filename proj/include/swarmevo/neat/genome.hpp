#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/random.hpp"

namespace swarmevo::neat {

enum class NodeRole : std::uint8_t { input, bias, output, hidden };

inline std::string_view to_string(NodeRole r) noexcept {
    switch (r) {
        case NodeRole::input: return "input";
        case NodeRole::bias: return "bias";
        case NodeRole::output: return "output";
        case NodeRole::hidden: return "hidden";
    }
    return "hidden";
}

inline std::optional<NodeRole> parse_role(std::string_view s) noexcept {
    if (s == "input") return NodeRole::input;
    if (s == "bias") return NodeRole::bias;
    if (s == "output") return NodeRole::output;
    if (s == "hidden") return NodeRole::hidden;
    return std::nullopt;
}

struct NodeGene {
    int id = 0;
    NodeRole role = NodeRole::hidden;

    friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
    int in = 0;
    int out = 0;
    double weight = 0.0;
    bool enabled = true;
    int innovation = 0;

    friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

/// NEAT genotype. Node ids are laid out as inputs [0, n_in), the bias node
/// n_in, outputs [n_in + 1, n_in + 1 + n_out), then hidden nodes. Nodes are
/// kept sorted by id and connections by innovation number.
struct Genome {
    int num_inputs = 0;
    int num_outputs = 0;
    std::vector<NodeGene> nodes;
    std::vector<ConnectionGene> connections;
    double fitness = 0.0;

    friend bool operator==(const Genome&, const Genome&) = default;

    [[nodiscard]] int bias_id() const noexcept { return num_inputs; }
    [[nodiscard]] int output_id(int k) const noexcept { return num_inputs + 1 + k; }
    [[nodiscard]] int first_hidden_id() const noexcept { return num_inputs + 1 + num_outputs; }

    [[nodiscard]] const NodeGene* find_node(int id) const noexcept {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                                   [](const NodeGene& n, int v) { return n.id < v; });
        return (it != nodes.end() && it->id == id) ? &*it : nullptr;
    }

    [[nodiscard]] bool has_connection(int in, int out) const noexcept {
        return std::any_of(connections.begin(), connections.end(),
                           [&](const ConnectionGene& c) { return c.in == in && c.out == out; });
    }

    void add_node(NodeGene n) {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), n.id,
                                   [](const NodeGene& a, int v) { return a.id < v; });
        nodes.insert(it, n);
    }

    void add_connection(ConnectionGene c) {
        auto it = std::lower_bound(connections.begin(), connections.end(), c.innovation,
                                   [](const ConnectionGene& a, int v) { return a.innovation < v; });
        connections.insert(it, c);
    }

    /// Throws ContractViolation when a structural invariant is broken.
    void validate() const {
        if (num_inputs <= 0 || num_outputs <= 0) {
            throw ContractViolation("genome needs at least one input and one output");
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (nodes[i - 1].id >= nodes[i].id) {
                throw ContractViolation("genome node ids must be unique and sorted");
            }
        }
        for (int k = 0; k < first_hidden_id(); ++k) {
            const NodeGene* n = find_node(k);
            const NodeRole expect = k < num_inputs    ? NodeRole::input
                                    : k == bias_id() ? NodeRole::bias
                                                     : NodeRole::output;
            if (n == nullptr || n->role != expect) {
                throw ContractViolation("genome is missing fixed node " + std::to_string(k));
            }
        }
        for (const NodeGene& n : nodes) {
            if (n.id >= first_hidden_id() && n.role != NodeRole::hidden) {
                throw ContractViolation("node " + std::to_string(n.id) + " must be hidden");
            }
        }
        for (std::size_t i = 0; i < connections.size(); ++i) {
            const ConnectionGene& c = connections[i];
            if (i > 0 && connections[i - 1].innovation >= c.innovation) {
                throw ContractViolation("innovation numbers must be unique and sorted");
            }
            const NodeGene* src = find_node(c.in);
            const NodeGene* dst = find_node(c.out);
            if (src == nullptr || dst == nullptr) {
                throw ContractViolation("connection " + std::to_string(c.innovation) +
                                        " references a missing node");
            }
            if (dst->role == NodeRole::input || dst->role == NodeRole::bias) {
                throw ContractViolation("connection " + std::to_string(c.innovation) +
                                        " feeds an input node");
            }
        }
    }
};

/// Innovation number given to the initial link source -> output k, shared by
/// every genome of every run so initial populations align.
constexpr int initial_innovation(int source, int output, int num_outputs) noexcept {
    return source * num_outputs + output;
}

/// Fully connected inputs+bias -> outputs genome with weights uniform in
/// [-weight_range, weight_range].
inline Genome make_minimal_genome(int num_inputs, int num_outputs, Rng& rng, double weight_range = 1.0) {
    Genome g;
    g.num_inputs = num_inputs;
    g.num_outputs = num_outputs;
    for (int i = 0; i < num_inputs; ++i) {
        g.nodes.push_back({i, NodeRole::input});
    }
    g.nodes.push_back({num_inputs, NodeRole::bias});
    for (int k = 0; k < num_outputs; ++k) {
        g.nodes.push_back({g.output_id(k), NodeRole::output});
    }
    for (int src = 0; src <= num_inputs; ++src) {
        for (int k = 0; k < num_outputs; ++k) {
            g.connections.push_back({src, g.output_id(k), uniform(rng, -weight_range, weight_range), true,
                                     initial_innovation(src, k, num_outputs)});
        }
    }
    return g;
}

}  // namespace swarmevo::neat
