#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vocmcts/mdp.hpp"

namespace vocmcts {

enum class ArmKind { correlated, uncorrelated };

struct BanditTreeOptions {
    int depth = 7;
    double desired_probability = 0.75;
    /// Outcome noise variance; negative selects the kind's default
    /// (0.1 correlated, 0.01 uncorrelated).
    double noise_variance = -1.0;
    double rbf_scale = 1.0;
    double rbf_variance = 1.0;
};

/// Complete binary tree of height d whose 2^d leaves are noisy bandit arms.
/// States use heap numbering: root 1, children 2s (left) and 2s+1 (right);
/// arms are the ids in [2^d, 2^(d+1)). Action 0 = LEFT, 1 = RIGHT; the
/// chosen subtree is entered with probability p, the other with 1 - p.
class BanditTree final : public Mdp {
public:
    BanditTree(int depth, double desired_probability, std::vector<double> arm_means, double noise_variance);

    static constexpr StateId kRoot = 1;

    int depth() const { return depth_; }
    double desired_probability() const { return p_; }
    const std::vector<double>& arm_means() const { return arm_means_; }
    double noise_variance() const { return noise_variance_; }
    std::size_t num_arms() const { return arm_means_.size(); }

    std::size_t num_actions(StateId s) const override;
    std::vector<Transition> transitions(StateId s, std::size_t a) const override;
    bool is_terminal(StateId s) const override;
    double terminal_value(StateId s) const override;
    double sample_terminal_value(StateId s, Rng& rng) const override;

    /// Q*(root, a), computed once at construction.
    double root_q(std::size_t a) const { return root_q_.at(a); }
    std::size_t optimal_root_action() const;

    /// One line: "bandit-tree depth=<d> p=<p> noise=<v> means=<m0>,<m1>,..."
    std::string serialize() const;
    static BanditTree deserialize(const std::string& text);

private:
    int depth_;
    double p_;
    std::vector<double> arm_means_;
    double noise_variance_;
    std::vector<double> root_q_;
};

BanditTree gen_bandit_tree(ArmKind kind, std::uint64_t seed, const BanditTreeOptions& options = {});

/// max_a Q*(root, a) - Q*(root, chosen).
double objective_regret(const BanditTree& tree, std::size_t chosen_root_action);

}  // namespace vocmcts
