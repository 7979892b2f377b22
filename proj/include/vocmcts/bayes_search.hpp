#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "vocmcts/mdp.hpp"
#include "vocmcts/normal.hpp"

namespace vocmcts {

/// Normal prior on a mean return with known outcome noise.
struct ConjugatePrior {
    double mean = 0.0;
    double variance = 1.0;
    double noise_variance = 1.0;
};

/// Sufficient statistics of the returns observed at one node or edge.
struct ReturnStats {
    int count = 0;
    double sum = 0.0;

    void add(double g) {
        ++count;
        sum += g;
    }
    NormalDist posterior(const ConjugatePrior& prior) const;
};

/// Moment-matched Normal for max(X, Y) of independent Normals.
NormalDist max_moment_match(const NormalDist& x, const NormalDist& y);

/// Shared tree bookkeeping for the Bayesian searches below.
class BayesTreeBase {
protected:
    struct Edge {
        ReturnStats stats;
        std::vector<Transition> successors;
        std::vector<std::pair<StateId, std::size_t>> children;
    };
    struct Node {
        StateId state;
        bool terminal;
        ReturnStats stats;  // returns observed from this node
        std::vector<Edge> edges;
        NormalDist value;   // cached value belief (Bayes-UCT)
    };

    BayesTreeBase(const Mdp& mdp, StateId root, ConjugatePrior prior);
    std::size_t add_node(StateId s);
    std::size_t find_child(std::size_t node, std::size_t action, StateId s) const;

    const Mdp* mdp_;
    ConjugatePrior prior_;
    std::vector<Node> nodes_;
};

/// Bayes-UCT: per-node Normal value beliefs. Frontier nodes use the
/// conjugate posterior of the returns seen through them; expanded nodes take
/// the moment-matched max over their actions, and an action averages its
/// successors' beliefs under the known transition probabilities (an
/// unexpanded successor borrows the action's own return posterior).
/// Selection maximizes mean + c * sd.
class BayesUctTree : private BayesTreeBase {
public:
    BayesUctTree(const Mdp& mdp, StateId root, ConjugatePrior prior, double exploration);

    double sample(Rng& rng);
    NormalDist action_belief(std::size_t node, std::size_t action) const;
    std::vector<NormalDist> root_beliefs() const;
    /// argmax of the root posterior means; lowest index on ties.
    std::size_t best_action() const;

private:
    void refresh(std::size_t node);
    double exploration_;
};

/// Thompson sampling down the tree with per-edge conjugate Normal
/// posteriors over mean returns.
class ThompsonTree : private BayesTreeBase {
public:
    ThompsonTree(const Mdp& mdp, StateId root, ConjugatePrior prior);

    double sample(Rng& rng);
    std::vector<NormalDist> root_beliefs() const;
    std::vector<int> root_counts() const;
    std::size_t best_action() const;
};

}  // namespace vocmcts
