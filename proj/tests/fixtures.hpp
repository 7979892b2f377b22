// Small MDPs and random beliefs shared by the tests.
#pragma once

#include <cmath>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

#include "vocmcts/belief.hpp"
#include "vocmcts/mdp.hpp"

namespace fixture {

using vocmcts::Belief;
using vocmcts::Prior;
using vocmcts::StateId;
using vocmcts::TabularMdp;

/// Root with one action per entry of `widths`; action i leads to a state
/// with widths[i] actions, each ending in a terminal. Expanded one step,
/// the leaves are numbered left to right.
inline TabularMdp two_level(std::initializer_list<int> widths) {
    TabularMdp mdp;
    mdp.add_state(0);
    StateId next = 1 + static_cast<StateId>(widths.size());
    StateId mid = 1;
    for (int w : widths) {
        mdp.add_state(mid);
        mdp.add_action(0, {{mid, 1.0, 0.0}});
        for (int j = 0; j < w; ++j) {
            mdp.add_terminal(next, 0.0);
            mdp.add_action(mid, {{next, 1.0, 0.0}});
            ++next;
        }
        ++mid;
    }
    return mdp;
}

inline Belief random_belief(std::mt19937_64& rng, std::size_t m, bool correlated, double noise = 0.5) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd mean(static_cast<Eigen::Index>(m)), var(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        mean[i] = normal(rng);
        var[i] = 0.05 + std::abs(normal(rng));
    }
    if (!correlated) return Belief(Prior::isotropic(mean, var, noise));
    Eigen::MatrixXd a(mean.size(), mean.size());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(rng);
    Eigen::MatrixXd cov = a * a.transpose() / static_cast<double>(m);
    cov.diagonal().array() += 0.05;
    return Belief(Prior::correlated(mean, cov, noise));
}

/// Random deterministic two-level instance with m = widths sum leaves.
inline TabularMdp random_two_level(std::mt19937_64& rng, int max_leaves) {
    std::uniform_int_distribution<int> actions(2, 3);
    const int k = actions(rng);
    std::uniform_int_distribution<int> width(1, std::max(1, max_leaves / k));
    switch (k) {
        case 2: return two_level({width(rng), width(rng)});
        default: return two_level({width(rng), width(rng), width(rng)});
    }
}

}  // namespace fixture
