#include "vocmcts/values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vocmcts/normal.hpp"

namespace vocmcts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t require_node(const PartialSearchTree& pst, StateId s, int depth, std::size_t action) {
    const auto node = pst.find_node(s, depth);
    if (!node || action >= pst.node(*node).actions.size())
        throw std::invalid_argument("state-action is not part of the partial search tree");
    return *node;
}

}  // namespace

TreeEvaluator::TreeEvaluator(const PartialSearchTree& pst) : pst_(&pst), root_actions_(pst.num_root_actions()) {}

double TreeEvaluator::action_value(const Eigen::VectorXd& leaf_values, const std::vector<double>& node_values,
                                   std::size_t node, std::size_t action) const {
    const auto& act = pst_->node(node).actions[action];
    if (act.leaf >= 0) return leaf_values[act.leaf];
    const double gamma = pst_->discount();
    double q = 0.0;
    for (const auto& b : act.branches) q += b.probability * (b.reward + gamma * node_values[b.child]);
    return q;
}

void TreeEvaluator::fold(const Eigen::VectorXd& leaf_values, std::vector<double>& node_values) const {
    const auto& nodes = pst_->nodes();
    node_values.resize(nodes.size());
    // Children always have larger indices, so a reverse sweep is bottom-up.
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const auto& node = nodes[i];
        if (node.terminal) {
            node_values[i] = node.terminal_value;
            continue;
        }
        double best = kNegInf;
        for (std::size_t a = 0; a < node.actions.size(); ++a)
            best = std::max(best, action_value(leaf_values, node_values, i, a));
        node_values[i] = best;
    }
}

void TreeEvaluator::root_values(const Eigen::VectorXd& leaf_values, std::vector<double>& scratch,
                                std::span<double> out) const {
    fold(leaf_values, scratch);
    for (std::size_t a = 0; a < root_actions_; ++a) out[a] = action_value(leaf_values, scratch, 0, a);
}

std::vector<double> TreeEvaluator::root_values(const Eigen::VectorXd& leaf_values) const {
    std::vector<double> scratch, out(root_actions_);
    root_values(leaf_values, scratch, out);
    return out;
}

double TreeEvaluator::root_max(const Eigen::VectorXd& leaf_values, std::vector<double>& scratch) const {
    fold(leaf_values, scratch);
    return scratch[0];
}

double TreeEvaluator::q(const Eigen::VectorXd& leaf_values, std::size_t node, std::size_t action) const {
    std::vector<double> scratch;
    fold(leaf_values, scratch);
    return action_value(leaf_values, scratch, node, action);
}

double static_value(const PartialSearchTree& pst, const Belief& belief, StateId s, int depth, std::size_t action) {
    const std::size_t node = require_node(pst, s, depth, action);
    return TreeEvaluator(pst).q(belief.means(), node, action);
}

std::vector<double> static_root_values(const PartialSearchTree& pst, const Belief& belief) {
    return TreeEvaluator(pst).root_values(belief.means());
}

double upsilon_sample(const PartialSearchTree& pst, const Eigen::VectorXd& draw, StateId s, int depth, std::size_t action) {
    if (static_cast<std::size_t>(draw.size()) != pst.num_leaves()) throw std::invalid_argument("draw has the wrong size");
    const std::size_t node = require_node(pst, s, depth, action);
    return TreeEvaluator(pst).q(draw, node, action);
}

std::vector<Estimate> dynamic_root_values_mc(const PartialSearchTree& pst, const Belief& belief, int samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
    const TreeEvaluator eval(pst);
    const JointSampler sampler = JointSampler::from_belief(belief);
    const std::size_t actions = pst.num_root_actions();
    const int pairs = (samples + 1) / 2;
    const auto m = static_cast<Eigen::Index>(pst.num_leaves());

    Eigen::VectorXd z(m), draw(m);
    std::vector<double> scratch, plus(actions), minus(actions);
    std::vector<double> sum(actions, 0.0), sum_sq(actions, 0.0);
    for (int p = 0; p < pairs; ++p) {
        fill_standard_normal(z, rng);
        sampler.transform(z, draw);
        eval.root_values(draw, scratch, plus);
        sampler.transform(-z, draw);
        eval.root_values(draw, scratch, minus);
        for (std::size_t a = 0; a < actions; ++a) {
            const double avg = 0.5 * (plus[a] + minus[a]);
            sum[a] += avg;
            sum_sq[a] += avg * avg;
        }
    }
    std::vector<Estimate> out(actions);
    for (std::size_t a = 0; a < actions; ++a) {
        const double mean = sum[a] / pairs;
        const double var = pairs > 1 ? std::max(0.0, (sum_sq[a] - pairs * mean * mean) / (pairs - 1)) : 0.0;
        out[a] = {mean, std::sqrt(var / pairs)};
    }
    return out;
}

Estimate dynamic_value_mc(const PartialSearchTree& pst, const Belief& belief, StateId s, int depth, std::size_t action,
                          int samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
    const std::size_t node = require_node(pst, s, depth, action);
    if (node == 0) return dynamic_root_values_mc(pst, belief, samples, rng)[action];
    const TreeEvaluator eval(pst);
    const JointSampler sampler = JointSampler::from_belief(belief);
    const auto m = static_cast<Eigen::Index>(pst.num_leaves());
    const int pairs = (samples + 1) / 2;
    Eigen::VectorXd z(m), draw(m);
    double sum = 0.0, sum_sq = 0.0;
    for (int p = 0; p < pairs; ++p) {
        fill_standard_normal(z, rng);
        sampler.transform(z, draw);
        const double a = eval.q(draw, node, action);
        sampler.transform(-z, draw);
        const double b = eval.q(draw, node, action);
        const double avg = 0.5 * (a + b);
        sum += avg;
        sum_sq += avg * avg;
    }
    const double mean = sum / pairs;
    const double var = pairs > 1 ? std::max(0.0, (sum_sq - pairs * mean * mean) / (pairs - 1)) : 0.0;
    return {mean, std::sqrt(var / pairs)};
}

std::vector<LeafGaussian> root_leaf_gaussians(const PartialSearchTree& pst, const Belief& belief) {
    std::vector<LeafGaussian> out;
    for (const auto& e : pst.flat_root()) {
        if (e.leaf < 0) {
            out.push_back({e.offset, 0.0});
            continue;
        }
        const auto l = static_cast<std::size_t>(e.leaf);
        out.push_back({e.offset + e.scale * belief.mean(l), e.scale * std::sqrt(belief.variance(l))});
    }
    return out;
}

namespace {

double upper_tail(const LeafGaussian& g, double c) {
    if (g.sd <= 0.0) return g.mean > c ? 1.0 : 0.0;
    return std_normal_cdf((g.mean - c) / g.sd);
}

double expected_excess(const LeafGaussian& g, double c) {
    if (g.sd <= 0.0) return std::max(0.0, g.mean - c);
    const double z = (c - g.mean) / g.sd;
    return (g.mean - c) * std_normal_cdf(-z) + g.sd * std_normal_pdf(z);
}

}  // namespace

double lambda_at(std::span<const LeafGaussian> leaves, double c) {
    double total = c;
    for (const auto& g : leaves) total += expected_excess(g, c);
    return total;
}

CBound optimal_c(std::span<const LeafGaussian> leaves) {
    if (leaves.empty()) throw std::invalid_argument("lambda bound needs at least one leaf");
    double lo_mean = std::numeric_limits<double>::infinity(), hi_mean = kNegInf, sd_max = 0.0;
    for (const auto& g : leaves) {
        lo_mean = std::min(lo_mean, g.mean);
        hi_mean = std::max(hi_mean, g.mean);
        sd_max = std::max(sd_max, g.sd);
    }
    if (sd_max <= 0.0) return {hi_mean, hi_mean};
    if (leaves.size() == 1) return {kNegInf, leaves.front().mean};

    auto excess_mass = [&](double c) {
        double total = -1.0;
        for (const auto& g : leaves) total += upper_tail(g, c);
        return total;
    };
    double lo = lo_mean - 6.0 * sd_max;
    double hi = hi_mean + 6.0 * sd_max;
    // excess_mass is non-increasing; widen if the tails are too light.
    while (excess_mass(lo) < 0.0) lo -= 6.0 * sd_max;
    double c = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        c = 0.5 * (lo + hi);
        const double g = excess_mass(c);
        if (std::abs(g) < 1e-12 || hi - lo < 1e-15 * std::max(1.0, std::abs(c))) break;
        if (g > 0.0)
            lo = c;
        else
            hi = c;
    }
    return {c, lambda_at(leaves, c)};
}

CBound dynamic_value_bound(const PartialSearchTree& pst, const Belief& belief) {
    if (!pst.deterministic()) throw std::invalid_argument("the lambda bound requires deterministic transitions");
    const auto leaves = root_leaf_gaussians(pst, belief);
    return optimal_c(leaves);
}

LambdaPartials lambda_partials(const LeafGaussian& leaf, double c) {
    if (leaf.sd <= 0.0) return {leaf.mean > c ? 1.0 : 0.0, 0.0};
    const double z = (leaf.mean - c) / leaf.sd;
    return {std_normal_cdf(z), std_normal_pdf(z)};
}

}  // namespace vocmcts
