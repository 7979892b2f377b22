#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vocmcts/mdp.hpp"

namespace vocmcts {

struct PstBranch {
    std::size_t child;  // node index
    double probability;
    double reward;
};

struct PstAction {
    std::vector<PstBranch> branches;  // empty for frontier actions
    int leaf = -1;                    // index into leaves() for frontier actions
};

struct PstNode {
    StateId state = 0;
    int depth = 0;
    bool terminal = false;
    double terminal_value = 0.0;
    std::vector<PstAction> actions;
};

/// A leaf state-action of the partial search tree.
struct Leaf {
    StateId state;
    std::size_t action;
    std::size_t node;
};

/// One term of the flat (deterministic) view: Z = offset + scale * Q0(leaf).
/// Terminal states inside the horizon appear with leaf = -1 and scale = 0.
struct FlatEntry {
    int leaf;
    double offset;
    double scale;
};

/// The n-step unrolled expectimax DAG rooted at a state. Nodes are keyed by
/// (depth, state) so identical states at equal depth are merged, and are
/// stored in breadth-first order: every branch points to a higher index.
class PartialSearchTree {
public:
    const std::vector<PstNode>& nodes() const { return nodes_; }
    const PstNode& node(std::size_t i) const { return nodes_.at(i); }
    const PstNode& root() const { return nodes_.front(); }
    const std::vector<Leaf>& leaves() const { return leaves_; }
    std::size_t num_leaves() const { return leaves_.size(); }
    std::size_t num_root_actions() const { return nodes_.front().actions.size(); }
    int depth() const { return depth_; }
    double discount() const { return discount_; }
    bool deterministic() const { return deterministic_; }

    std::optional<std::size_t> find_node(StateId s, int depth) const;

    /// Flat view of root action `a`: every leaf and in-horizon terminal
    /// reachable through `a`, with the largest discounted path reward.
    /// Only available for deterministic trees.
    std::span<const FlatEntry> flat_action(std::size_t a) const;
    /// All root actions collapsed into a single max over the flat entries.
    std::span<const FlatEntry> flat_root() const;

private:
    friend PartialSearchTree build_pst(const Mdp&, StateId, int);
    void build_flat_views();

    std::vector<PstNode> nodes_;
    std::vector<Leaf> leaves_;
    int depth_ = 0;
    double discount_ = 1.0;
    bool deterministic_ = true;
    std::vector<std::vector<FlatEntry>> flat_actions_;
    std::vector<FlatEntry> flat_root_;
};

/// Thrown by build_pst when every path ends inside the horizon.
class NoLeavesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Expands `root` for n steps. Leaves are the (state, action) pairs of
/// non-terminal states reached after exactly n transitions, in BFS order
/// with action-index tie-break. Throws if n < 1, the root is terminal, or
/// every path terminates inside the horizon (NoLeavesError).
PartialSearchTree build_pst(const Mdp& mdp, StateId root, int n);

}  // namespace vocmcts
