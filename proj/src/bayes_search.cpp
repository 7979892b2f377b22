#include "vocmcts/bayes_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vocmcts/uct.hpp"

namespace vocmcts {

NormalDist ReturnStats::posterior(const ConjugatePrior& prior) const {
    if (count == 0 || prior.variance <= 0.0) return {prior.mean, std::max(prior.variance, 0.0)};
    const double precision = 1.0 / prior.variance + count / prior.noise_variance;
    return {(prior.mean / prior.variance + sum / prior.noise_variance) / precision, 1.0 / precision};
}

NormalDist max_moment_match(const NormalDist& x, const NormalDist& y) {
    const double theta = std::sqrt(std::max(0.0, x.variance + y.variance));
    if (theta <= 0.0) return {std::max(x.mean, y.mean), 0.0};
    const double alpha = (x.mean - y.mean) / theta;
    const double cdf = std_normal_cdf(alpha), cdf_neg = std_normal_cdf(-alpha), pdf = std_normal_pdf(alpha);
    const double first = x.mean * cdf + y.mean * cdf_neg + theta * pdf;
    const double second = (x.mean * x.mean + x.variance) * cdf + (y.mean * y.mean + y.variance) * cdf_neg +
                           (x.mean + y.mean) * theta * pdf;
    return {first, std::max(0.0, second - first * first)};
}

BayesTreeBase::BayesTreeBase(const Mdp& mdp, StateId root, ConjugatePrior prior) : mdp_(&mdp), prior_(prior) {
    if (!(prior.noise_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
    add_node(root);
}

std::size_t BayesTreeBase::add_node(StateId s) {
    Node node{s, mdp_->is_terminal(s), {}, {}, {prior_.mean, std::max(prior_.variance, 0.0)}};
    if (!node.terminal) {
        node.edges.resize(mdp_->num_actions(s));
        for (std::size_t a = 0; a < node.edges.size(); ++a) node.edges[a].successors = mdp_->transitions(s, a);
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

std::size_t BayesTreeBase::find_child(std::size_t node, std::size_t action, StateId s) const {
    for (const auto& [state, index] : nodes_[node].edges[action].children)
        if (state == s) return index;
    return nodes_.size();
}

BayesUctTree::BayesUctTree(const Mdp& mdp, StateId root, ConjugatePrior prior, double exploration)
    : BayesTreeBase(mdp, root, prior), exploration_(exploration) {}

NormalDist BayesUctTree::action_belief(std::size_t node, std::size_t action) const {
    const Edge& edge = nodes_.at(node).edges.at(action);
    if (edge.stats.count == 0) return {prior_.mean, std::max(prior_.variance, 0.0)};
    const NormalDist own = edge.stats.posterior(prior_);
    const double gamma = mdp_->discount();
    double mean = 0.0, var = 0.0;
    for (const auto& t : edge.successors) {
        const std::size_t child = find_child(node, action, t.next);
        // An unexpanded successor stands in with the edge's own posterior,
        // which already includes the immediate reward.
        const NormalDist v = child < nodes_.size() ? NormalDist{t.reward + gamma * nodes_[child].value.mean,
                                                                gamma * gamma * nodes_[child].value.variance}
                                                   : own;
        mean += t.probability * v.mean;
        var += t.probability * t.probability * v.variance;
    }
    return {mean, var};
}

void BayesUctTree::refresh(std::size_t index) {
    Node& node = nodes_[index];
    const bool expanded = std::any_of(node.edges.begin(), node.edges.end(), [](const Edge& e) { return e.stats.count > 0; });
    if (node.terminal || !expanded) {
        node.value = node.stats.posterior(prior_);
        return;
    }
    NormalDist best = action_belief(index, 0);
    for (std::size_t a = 1; a < node.edges.size(); ++a) best = max_moment_match(best, action_belief(index, a));
    nodes_[index].value = best;
}

double BayesUctTree::sample(Rng& rng) {
    struct Step {
        std::size_t node;
        std::size_t action;
        double reward;
    };
    std::vector<Step> path;
    std::size_t current = 0;
    double g = 0.0;
    while (true) {
        if (nodes_[current].terminal) {
            g = mdp_->sample_terminal_value(nodes_[current].state, rng);
            break;
        }
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < nodes_[current].edges.size(); ++a) {
            const NormalDist belief = action_belief(current, a);
            const double score = belief.mean + exploration_ * belief.sd();
            if (score > best_score) {
                best_score = score;
                best = a;
            }
        }
        const Transition t = sample_transition(*mdp_, nodes_[current].state, best, rng);
        path.push_back({current, best, t.reward});
        const std::size_t next = find_child(current, best, t.next);
        if (next < nodes_.size()) {
            current = next;
            continue;
        }
        const std::size_t child = add_node(t.next);
        nodes_[current].edges[best].children.emplace_back(t.next, child);
        g = nodes_[child].terminal ? mdp_->sample_terminal_value(t.next, rng) : random_rollout(*mdp_, t.next, rng);
        current = child;
        break;
    }
    nodes_[current].stats.add(g);
    refresh(current);
    const double gamma = mdp_->discount();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        g = it->reward + gamma * g;
        nodes_[it->node].edges[it->action].stats.add(g);
        nodes_[it->node].stats.add(g);
        refresh(it->node);
    }
    return g;
}

std::vector<NormalDist> BayesUctTree::root_beliefs() const {
    std::vector<NormalDist> out;
    for (std::size_t a = 0; a < nodes_.front().edges.size(); ++a) out.push_back(action_belief(0, a));
    return out;
}

std::size_t BayesUctTree::best_action() const {
    const auto beliefs = root_beliefs();
    std::size_t best = 0;
    for (std::size_t a = 1; a < beliefs.size(); ++a)
        if (beliefs[a].mean > beliefs[best].mean) best = a;
    return best;
}

ThompsonTree::ThompsonTree(const Mdp& mdp, StateId root, ConjugatePrior prior) : BayesTreeBase(mdp, root, prior) {}

double ThompsonTree::sample(Rng& rng) {
    struct Step {
        std::size_t node;
        std::size_t action;
        double reward;
    };
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Step> path;
    std::size_t current = 0;
    double g = 0.0;
    while (true) {
        if (nodes_[current].terminal) {
            g = mdp_->sample_terminal_value(nodes_[current].state, rng);
            break;
        }
        std::size_t best = 0;
        double best_draw = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < nodes_[current].edges.size(); ++a) {
            const NormalDist post = nodes_[current].edges[a].stats.posterior(prior_);
            const double draw = post.mean + post.sd() * normal(rng);
            if (draw > best_draw) {
                best_draw = draw;
                best = a;
            }
        }
        const Transition t = sample_transition(*mdp_, nodes_[current].state, best, rng);
        path.push_back({current, best, t.reward});
        const std::size_t next = find_child(current, best, t.next);
        if (next < nodes_.size()) {
            current = next;
            continue;
        }
        const std::size_t child = add_node(t.next);
        nodes_[current].edges[best].children.emplace_back(t.next, child);
        g = nodes_[child].terminal ? mdp_->sample_terminal_value(t.next, rng) : random_rollout(*mdp_, t.next, rng);
        break;
    }
    const double gamma = mdp_->discount();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        g = it->reward + gamma * g;
        nodes_[it->node].edges[it->action].stats.add(g);
    }
    return g;
}

std::vector<NormalDist> ThompsonTree::root_beliefs() const {
    std::vector<NormalDist> out;
    for (const auto& e : nodes_.front().edges) out.push_back(e.stats.posterior(prior_));
    return out;
}

std::vector<int> ThompsonTree::root_counts() const {
    std::vector<int> out;
    for (const auto& e : nodes_.front().edges) out.push_back(e.stats.count);
    return out;
}

std::size_t ThompsonTree::best_action() const {
    const auto beliefs = root_beliefs();
    std::size_t best = 0;
    for (std::size_t a = 1; a < beliefs.size(); ++a)
        if (beliefs[a].mean > beliefs[best].mean) best = a;
    return best;
}

}  // namespace vocmcts
