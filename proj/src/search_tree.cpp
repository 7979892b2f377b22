#include "vocmcts/search_tree.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace vocmcts {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

PartialSearchTree build_pst(const Mdp& mdp, StateId root, int n) {
    if (n < 1) throw std::invalid_argument("partial search tree height must be >= 1");
    if (mdp.is_terminal(root)) throw std::invalid_argument("cannot plan from a terminal root state");

    PartialSearchTree pst;
    pst.depth_ = n;
    pst.discount_ = mdp.discount();

    std::map<std::pair<int, StateId>, std::size_t> index;
    auto intern = [&](StateId s, int depth) {
        auto [it, fresh] = index.try_emplace({depth, s}, pst.nodes_.size());
        if (fresh) {
            PstNode node;
            node.state = s;
            node.depth = depth;
            node.terminal = mdp.is_terminal(s);
            if (node.terminal) node.terminal_value = mdp.terminal_value(s);
            pst.nodes_.push_back(std::move(node));
        }
        return it->second;
    };
    intern(root, 0);

    // nodes_ grows while we walk it, which gives breadth-first order.
    for (std::size_t i = 0; i < pst.nodes_.size(); ++i) {
        if (pst.nodes_[i].terminal) continue;
        const StateId s = pst.nodes_[i].state;
        const int depth = pst.nodes_[i].depth;
        const std::size_t actions = mdp.num_actions(s);
        if (actions == 0) throw std::invalid_argument("non-terminal state without actions");
        std::vector<PstAction> expanded(actions);
        for (std::size_t a = 0; a < actions; ++a) {
            if (depth == n) {
                expanded[a].leaf = static_cast<int>(pst.leaves_.size());
                pst.leaves_.push_back({s, a, i});
                continue;
            }
            const auto successors = mdp.transitions(s, a);
            double total = 0.0;
            for (const auto& t : successors) {
                total += t.probability;
                const std::size_t child = intern(t.next, depth + 1);
                expanded[a].branches.push_back({child, t.probability, t.reward});
            }
            if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("transition probabilities do not sum to 1");
            if (successors.size() != 1) pst.deterministic_ = false;
        }
        pst.nodes_[i].actions = std::move(expanded);
    }
    if (pst.leaves_.empty()) throw NoLeavesError("every path terminates within the horizon; no leaves");
    if (pst.deterministic_) pst.build_flat_views();
    return pst;
}

std::optional<std::size_t> PartialSearchTree::find_node(StateId s, int depth) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].state == s && nodes_[i].depth == depth) return i;
    return std::nullopt;
}

void PartialSearchTree::build_flat_views() {
    const std::size_t actions = root().actions.size();
    flat_actions_.assign(actions, {});
    std::vector<double> root_leaf(leaves_.size(), kNegInf);
    std::vector<double> root_terminal(nodes_.size(), kNegInf);

    for (std::size_t a = 0; a < actions; ++a) {
        // Largest discounted reward sum from the root to each node via action a.
        std::vector<double> best(nodes_.size(), kNegInf);
        const auto& first = root().actions[a].branches.front();
        best[first.child] = first.reward;
        std::vector<double> leaf_offset(leaves_.size(), kNegInf);
        for (std::size_t i = 1; i < nodes_.size(); ++i) {
            if (best[i] == kNegInf) continue;
            const auto& node = nodes_[i];
            const double scale = std::pow(discount_, node.depth);
            if (node.terminal) {
                const double value = best[i] + scale * node.terminal_value;
                flat_actions_[a].push_back({-1, value, 0.0});
                root_terminal[i] = std::max(root_terminal[i], value);
                continue;
            }
            for (const auto& act : node.actions) {
                if (act.leaf >= 0) {
                    leaf_offset[act.leaf] = std::max(leaf_offset[act.leaf], best[i]);
                    continue;
                }
                const auto& b = act.branches.front();
                best[b.child] = std::max(best[b.child], best[i] + scale * b.reward);
            }
        }
        const double leaf_scale = std::pow(discount_, depth_);
        for (std::size_t l = 0; l < leaves_.size(); ++l) {
            if (leaf_offset[l] == kNegInf) continue;
            flat_actions_[a].push_back({static_cast<int>(l), leaf_offset[l], leaf_scale});
            root_leaf[l] = std::max(root_leaf[l], leaf_offset[l]);
        }
    }

    flat_root_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (root_terminal[i] != kNegInf) flat_root_.push_back({-1, root_terminal[i], 0.0});
    const double leaf_scale = std::pow(discount_, depth_);
    for (std::size_t l = 0; l < leaves_.size(); ++l)
        if (root_leaf[l] != kNegInf) flat_root_.push_back({static_cast<int>(l), root_leaf[l], leaf_scale});
}

std::span<const FlatEntry> PartialSearchTree::flat_action(std::size_t a) const {
    if (!deterministic_) throw std::logic_error("flat view requires deterministic transitions");
    return flat_actions_.at(a);
}

std::span<const FlatEntry> PartialSearchTree::flat_root() const {
    if (!deterministic_) throw std::logic_error("flat view requires deterministic transitions");
    return flat_root_;
}

}  // namespace vocmcts
