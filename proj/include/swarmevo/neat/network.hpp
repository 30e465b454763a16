#pragma once

// Phenotype decoding and activation. Feed-forward links are propagated in
// dependency order within a control step; links that close a cycle (found as
// DFS back edges) read the source's value from the previous step.

#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "swarmevo/errors.hpp"
#include "swarmevo/neat/genome.hpp"

namespace swarmevo::neat {

inline double steepened_sigmoid(double x, double slope) noexcept {
    return 1.0 / (1.0 + std::exp(-slope * x));
}

class Network {
public:
    Network() = default;

    explicit Network(const Genome& g, double sigmoid_slope = 4.9)
        : num_inputs_(g.num_inputs), num_outputs_(g.num_outputs), slope_(sigmoid_slope) {
        const std::size_t n = g.nodes.size();
        std::unordered_map<int, int> index;
        index.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            index.emplace(g.nodes[i].id, static_cast<int>(i));
        }
        bias_index_ = index.at(g.bias_id());
        input_index_.resize(static_cast<std::size_t>(g.num_inputs));
        for (int k = 0; k < g.num_inputs; ++k) {
            input_index_[static_cast<std::size_t>(k)] = index.at(k);
        }
        output_index_.resize(static_cast<std::size_t>(g.num_outputs));
        for (int k = 0; k < g.num_outputs; ++k) {
            output_index_[static_cast<std::size_t>(k)] = index.at(g.output_id(k));
        }

        std::vector<std::vector<std::pair<int, double>>> incoming(n);
        for (const ConnectionGene& c : g.connections) {
            if (c.enabled) {
                incoming[static_cast<std::size_t>(index.at(c.out))].push_back({index.at(c.in), c.weight});
            }
        }

        // DFS post-order over incoming links; state 0 = new, 1 = on stack, 2 = done.
        std::vector<int> state(n, 0);
        std::vector<char> is_source(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const NodeRole r = g.nodes[i].role;
            if (r == NodeRole::input || r == NodeRole::bias) {
                is_source[i] = 1;
                state[i] = 2;
            }
        }
        struct Frame {
            int node;
            std::size_t next;
        };
        std::vector<Frame> stack;
        std::vector<std::vector<char>> recurrent(n);
        for (std::size_t i = 0; i < n; ++i) {
            recurrent[i].assign(incoming[i].size(), 0);
        }
        for (std::size_t root = 0; root < n; ++root) {
            if (state[root] != 0) {
                continue;
            }
            stack.push_back({static_cast<int>(root), 0});
            state[root] = 1;
            while (!stack.empty()) {
                Frame& f = stack.back();
                const auto node = static_cast<std::size_t>(f.node);
                if (f.next < incoming[node].size()) {
                    const std::size_t k = f.next++;
                    const auto src = static_cast<std::size_t>(incoming[node][k].first);
                    if (state[src] == 1) {
                        recurrent[node][k] = 1;
                    } else if (state[src] == 0) {
                        state[src] = 1;
                        stack.push_back({static_cast<int>(src), 0});
                    }
                    continue;
                }
                state[node] = 2;
                order_.push_back(static_cast<int>(node));
                stack.pop_back();
            }
        }

        link_begin_.reserve(order_.size() + 1);
        for (int node : order_) {
            link_begin_.push_back(links_.size());
            const auto u = static_cast<std::size_t>(node);
            for (std::size_t k = 0; k < incoming[u].size(); ++k) {
                links_.push_back({incoming[u][k].first, incoming[u][k].second, recurrent[u][k] != 0});
            }
        }
        link_begin_.push_back(links_.size());
        value_.assign(n, 0.0);
        previous_.assign(n, 0.0);
        outputs_.assign(static_cast<std::size_t>(num_outputs_), 0.0);
    }

    /// Clears all activation state (start of a trial or behaviour switch).
    void reset() noexcept {
        std::fill(value_.begin(), value_.end(), 0.0);
        std::fill(previous_.begin(), previous_.end(), 0.0);
    }

    /// One control step. Returns the output activations in [0, 1].
    std::span<const double> activate(std::span<const double> inputs) {
        if (static_cast<int>(inputs.size()) != num_inputs_) {
            throw ContractViolation("network expects " + std::to_string(num_inputs_) + " inputs, got " +
                                    std::to_string(inputs.size()));
        }
        previous_ = value_;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            value_[static_cast<std::size_t>(input_index_[k])] = inputs[k];
        }
        value_[static_cast<std::size_t>(bias_index_)] = 1.0;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            double sum = 0.0;
            for (std::size_t l = link_begin_[i]; l < link_begin_[i + 1]; ++l) {
                const Link& link = links_[l];
                const auto src = static_cast<std::size_t>(link.source);
                sum += link.weight * (link.recurrent ? previous_[src] : value_[src]);
            }
            value_[static_cast<std::size_t>(order_[i])] = steepened_sigmoid(sum, slope_);
        }
        for (std::size_t k = 0; k < outputs_.size(); ++k) {
            outputs_[k] = value_[static_cast<std::size_t>(output_index_[k])];
        }
        return outputs_;
    }

    [[nodiscard]] int num_inputs() const noexcept { return num_inputs_; }
    [[nodiscard]] int num_outputs() const noexcept { return num_outputs_; }
    [[nodiscard]] std::size_t recurrent_link_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(links_.begin(), links_.end(), [](const Link& l) { return l.recurrent; }));
    }

private:
    struct Link {
        int source;
        double weight;
        bool recurrent;
    };

    int num_inputs_ = 0;
    int num_outputs_ = 0;
    double slope_ = 4.9;
    int bias_index_ = 0;
    std::vector<int> input_index_;
    std::vector<int> output_index_;
    std::vector<int> order_;
    std::vector<std::size_t> link_begin_;
    std::vector<Link> links_;
    std::vector<double> value_;
    std::vector<double> previous_;
    std::vector<double> outputs_;
};

}  // namespace swarmevo::neat
