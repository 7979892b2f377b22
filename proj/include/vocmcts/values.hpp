#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vocmcts/belief.hpp"
#include "vocmcts/search_tree.hpp"

namespace vocmcts {

/// Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Bellman fold over a partial search tree for a given assignment of leaf
/// values: max over actions at decision nodes, expectation over successors
/// at chance nodes. Evaluating it at the posterior means gives the static
/// value; at a joint posterior draw it gives one sample of Upsilon.
class TreeEvaluator {
public:
    explicit TreeEvaluator(const PartialSearchTree& pst);

    const PartialSearchTree& tree() const { return *pst_; }
    std::size_t num_root_actions() const { return root_actions_; }

    /// Root action values for the given leaf values. `scratch` is resized as needed.
    void root_values(const Eigen::VectorXd& leaf_values, std::vector<double>& scratch, std::span<double> out) const;
    std::vector<double> root_values(const Eigen::VectorXd& leaf_values) const;
    double root_max(const Eigen::VectorXd& leaf_values, std::vector<double>& scratch) const;

    /// Value of (node, action) for the given leaf values.
    double q(const Eigen::VectorXd& leaf_values, std::size_t node, std::size_t action) const;

private:
    void fold(const Eigen::VectorXd& leaf_values, std::vector<double>& node_values) const;
    double action_value(const Eigen::VectorXd& leaf_values, const std::vector<double>& node_values,
                        std::size_t node, std::size_t action) const;

    const PartialSearchTree* pst_;
    std::size_t root_actions_;
};

/// phi_n(s, a): exact Bellman recursion over posterior means.
double static_value(const PartialSearchTree& pst, const Belief& belief, StateId s, int depth, std::size_t action);
std::vector<double> static_root_values(const PartialSearchTree& pst, const Belief& belief);

/// Upsilon_n(s, a) for one joint leaf-value draw.
double upsilon_sample(const PartialSearchTree& pst, const Eigen::VectorXd& draw, StateId s, int depth, std::size_t action);

/// psi_n at the root: average of Upsilon over joint posterior draws drawn in
/// antithetic pairs. `samples` counts draws (rounded up to even); the SE is
/// computed over pair averages.
std::vector<Estimate> dynamic_root_values_mc(const PartialSearchTree& pst, const Belief& belief, int samples, Rng& rng);
Estimate dynamic_value_mc(const PartialSearchTree& pst, const Belief& belief, StateId s, int depth, std::size_t action,
                          int samples, Rng& rng);

/// Marginal Normal of one term of the flat view, Z = offset + scale * Q0.
struct LeafGaussian {
    double mean = 0.0;
    double sd = 0.0;
};

/// Flat-view marginals for the collapsed root (deterministic trees only).
std::vector<LeafGaussian> root_leaf_gaussians(const PartialSearchTree& pst, const Belief& belief);

struct CBound {
    double c = 0.0;
    double lambda = 0.0;
};

/// c + sum E[(Z - c)^+] evaluated at a fixed c.
double lambda_at(std::span<const LeafGaussian> leaves, double c);

/// Tightest c for the expected-maximum bound: solves sum [1 - F(c)] = 1 by
/// bisection on [min mu - 6 sd_max, max mu + 6 sd_max].
/// All-deterministic input returns c = lambda = max mean; a single random
/// leaf returns c = -inf and lambda = its mean (the limit of the bound).
CBound optimal_c(std::span<const LeafGaussian> leaves);

/// lambda upper bound on E[max] over the leaves below the root with all
/// root actions collapsed. Throws for stochastic trees.
CBound dynamic_value_bound(const PartialSearchTree& pst, const Belief& belief);

/// d lambda / d mu and d lambda / d sd of one term at fixed c.
struct LambdaPartials {
    double d_mean = 0.0;
    double d_sd = 0.0;
};
LambdaPartials lambda_partials(const LeafGaussian& leaf, double c);

}  // namespace vocmcts
