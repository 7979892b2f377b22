#include "vocmcts/uct.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vocmcts {

std::size_t uct_select(std::span<const EdgeStats> edges, int parent_visits, double exploration) {
    if (edges.empty()) throw std::invalid_argument("uct_select on a node without actions");
    for (std::size_t a = 0; a < edges.size(); ++a)
        if (edges[a].visits == 0) return a;
    const double log_n = std::log(static_cast<double>(std::max(parent_visits, 1)));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < edges.size(); ++a) {
        const double score = edges[a].mean + exploration * std::sqrt(2.0 * log_n / edges[a].visits);
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

double random_rollout(const Mdp& mdp, StateId s, Rng& rng) {
    const double gamma = mdp.discount();
    double total = 0.0, scale = 1.0;
    while (!mdp.is_terminal(s)) {
        const std::size_t actions = mdp.num_actions(s);
        const auto a = static_cast<std::size_t>(rng() % actions);
        const Transition t = sample_transition(mdp, s, a, rng);
        total += scale * t.reward;
        scale *= gamma;
        s = t.next;
    }
    return total + scale * mdp.sample_terminal_value(s, rng);
}

UctTree::UctTree(const Mdp& mdp, StateId root, double exploration) : mdp_(&mdp), exploration_(exploration) {
    add_node(root);
}

std::size_t UctTree::add_node(StateId s) {
    Node node{s, mdp_->is_terminal(s), 0, {}};
    if (!node.terminal) node.edges.resize(mdp_->num_actions(s));
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

double UctTree::sample(Rng& rng) {
    struct Step {
        std::size_t node;
        std::size_t action;
        double reward;
    };
    std::vector<Step> path;
    std::size_t current = 0;
    double leaf_return = 0.0;
    while (true) {
        if (nodes_[current].terminal) {
            leaf_return = mdp_->sample_terminal_value(nodes_[current].state, rng);
            break;
        }
        std::vector<EdgeStats> stats;
        stats.reserve(nodes_[current].edges.size());
        for (const auto& e : nodes_[current].edges) stats.push_back(e.stats);
        const std::size_t a = uct_select(stats, nodes_[current].visits, exploration_);
        const Transition t = sample_transition(*mdp_, nodes_[current].state, a, rng);
        path.push_back({current, a, t.reward});

        std::size_t next = nodes_.size();
        for (const auto& [state, index] : nodes_[current].edges[a].children)
            if (state == t.next) next = index;
        if (next < nodes_.size()) {
            current = next;
            continue;
        }
        const std::size_t child = add_node(t.next);
        nodes_[current].edges[a].children.emplace_back(t.next, child);
        ++nodes_[child].visits;
        leaf_return = nodes_[child].terminal ? mdp_->sample_terminal_value(t.next, rng) : random_rollout(*mdp_, t.next, rng);
        break;
    }
    const double gamma = mdp_->discount();
    double g = leaf_return;
    if (path.empty()) ++nodes_[0].visits;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        g = it->reward + gamma * g;
        auto& edge = nodes_[it->node].edges[it->action].stats;
        ++edge.visits;
        edge.mean += (g - edge.mean) / edge.visits;
        ++nodes_[it->node].visits;
    }
    return g;
}

std::vector<EdgeStats> UctTree::root_edges() const {
    std::vector<EdgeStats> out;
    for (const auto& e : nodes_.front().edges) out.push_back(e.stats);
    return out;
}

std::size_t UctTree::best_action() const {
    const auto& edges = nodes_.front().edges;
    std::size_t best = 0;
    for (std::size_t a = 1; a < edges.size(); ++a) {
        const auto& s = edges[a].stats;
        const auto& b = edges[best].stats;
        if (s.visits > b.visits || (s.visits == b.visits && s.mean > b.mean)) best = a;
    }
    return best;
}

}  // namespace vocmcts
