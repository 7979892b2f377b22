#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vocmcts/mdp.hpp"

namespace vocmcts {

struct EdgeStats {
    int visits = 0;
    double mean = 0.0;  // running mean of backed-up returns
};

/// UCB1 over the edges of one node: unvisited actions first (lowest index),
/// otherwise argmax mean + c * sqrt(2 ln N(s) / N(s,a)), lowest index on ties.
std::size_t uct_select(std::span<const EdgeStats> edges, int parent_visits, double exploration);

/// UCT search tree over a simulator. Each sample is one descent with the
/// UCB1 tree policy, one expansion, a uniform-random rollout to a terminal
/// state and a backup of the return. Exactly one terminal sample per call.
class UctTree {
public:
    UctTree(const Mdp& mdp, StateId root, double exploration);

    /// Runs one iteration and returns the return observed from the root state.
    double sample(Rng& rng);

    StateId root_state() const { return nodes_.front().state; }
    int root_visits() const { return nodes_.front().visits; }
    std::vector<EdgeStats> root_edges() const;
    /// Most visited root action; ties by higher mean, then lower index. 0 if unvisited.
    std::size_t best_action() const;

private:
    struct Edge {
        EdgeStats stats;
        std::vector<std::pair<StateId, std::size_t>> children;
    };
    struct Node {
        StateId state;
        bool terminal;
        int visits = 0;
        std::vector<Edge> edges;
    };
    std::size_t add_node(StateId s);

    const Mdp* mdp_;
    double exploration_;
    std::vector<Node> nodes_;
};

/// Uniform-random playout from `s` to a terminal state; returns the discounted return.
double random_rollout(const Mdp& mdp, StateId s, Rng& rng);

}  // namespace vocmcts
