#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vocmcts/mdp.hpp"
#include "vocmcts/normal.hpp"

namespace vocmcts {

class PartialSearchTree;

/// Normal prior over the leaf values, Q0 ~ N(mean, covariance), plus the
/// variance of the additive outcome noise.
class Prior {
public:
    static Prior isotropic(Eigen::VectorXd mean, Eigen::VectorXd variance, double noise_variance);
    static Prior isotropic(std::size_t leaves, double mean, double variance, double noise_variance);
    /// Throws unless the covariance is symmetric and factors with jitter <= 1e-8.
    static Prior correlated(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double noise_variance);

    std::size_t size() const { return static_cast<std::size_t>(mean_.size()); }
    bool correlated() const { return correlated_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    /// Marginal prior variances.
    Eigen::VectorXd variances() const;
    /// Full covariance (diagonal matrix for isotropic priors).
    Eigen::MatrixXd covariance() const;
    double noise_variance() const { return noise_variance_; }

private:
    Prior() = default;

    bool correlated_ = false;
    Eigen::VectorXd mean_;
    Eigen::VectorXd variance_;
    Eigen::MatrixXd covariance_;
    double noise_variance_ = 1.0;
};

struct Observation {
    std::size_t leaf;
    double outcome;
    int time;
};

/// The sequence of performed computations. Append-only; times strictly increase.
class KnowledgeState {
public:
    void append(const Observation& obs);
    /// Appends with time = previous time + 1.
    void append(std::size_t leaf, double outcome);
    const std::vector<Observation>& observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }

private:
    std::vector<Observation> observations_;
};

/// Posterior over the leaf values given the computations performed so far.
class Belief {
public:
    explicit Belief(const Prior& prior);

    std::size_t size() const { return static_cast<std::size_t>(mean_.size()); }
    bool correlated() const { return correlated_; }
    const Prior& prior() const { return prior_; }
    double noise_variance() const { return prior_.noise_variance(); }
    int time() const { return time_; }

    const Eigen::VectorXd& means() const { return mean_; }
    double mean(std::size_t leaf) const { return mean_[static_cast<Eigen::Index>(leaf)]; }
    double variance(std::size_t leaf) const;
    Eigen::VectorXd variances() const;
    /// Full posterior covariance (diagonal for isotropic beliefs).
    Eigen::MatrixXd covariance() const;

    int count(std::size_t leaf) const { return counts_.at(leaf); }
    /// Empirical mean of the outcomes observed at `leaf` (prior mean if none).
    double outcome_mean(std::size_t leaf) const;

    /// Conjugate update with one outcome. Throws on a non-finite outcome
    /// or an out-of-range leaf.
    void update(std::size_t leaf, double outcome);
    Belief updated(std::size_t leaf, double outcome) const;

    /// Posterior predictive distribution of the next outcome at `leaf`.
    NormalDist predictive(std::size_t leaf) const;

    /// Change of the posterior mean vector per unit of standardized
    /// predictive outcome at `leaf`: mean after observing
    /// o = mu_leaf + z * sqrt(var_leaf + noise) is means() + z * mean_shift(leaf).
    Eigen::VectorXd mean_shift(std::size_t leaf) const;
    /// Posterior covariance after one more observation of `leaf` (outcome-independent).
    Eigen::MatrixXd covariance_after(std::size_t leaf) const;

private:
    friend Belief posterior(const Prior& prior, const KnowledgeState& knowledge);
    void check_leaf(std::size_t leaf) const;

    Prior prior_;
    bool correlated_;
    Eigen::VectorXd mean_;
    Eigen::VectorXd variance_;    // isotropic
    Eigen::MatrixXd covariance_;  // correlated
    std::vector<int> counts_;
    std::vector<double> outcome_sums_;
    int time_ = 0;
};

/// init_belief: checks the prior dimension against the tree's leaf count.
Belief init_belief(const Prior& prior, const PartialSearchTree& pst);

/// Batch posterior (precision form) from all outcomes at once.
Belief posterior(const Prior& prior, const KnowledgeState& knowledge);

/// Factor L with L L^T = cov. Tries Cholesky with jitter up to `max_jitter`
/// and falls back to a clamped eigendecomposition for singular PSD input.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double max_jitter = 1e-8);

/// cov[i][j] = variance * exp(-(i-j)^2 / (2 scale^2)) over indices 0..m-1.
Eigen::MatrixXd rbf_covariance(std::size_t m, double scale, double variance);

/// Covariance over PST leaves that decays with tree distance:
/// cov[i][j] = variance * rho^(n + 2 - shared), where `shared` is the length
/// of the common prefix of the two leaves' first-discovery paths
/// (root, ..., leaf state, leaf action). PSD for rho in [0, 1].
Eigen::MatrixXd lineage_covariance(const PartialSearchTree& pst, double variance, double rho);

/// Draws joint leaf-value samples mean + L z for standard-normal z.
class JointSampler {
public:
    JointSampler(Eigen::VectorXd mean, Eigen::MatrixXd factor);
    static JointSampler from_belief(const Belief& belief);

    std::size_t size() const { return static_cast<std::size_t>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& factor() const { return factor_; }
    void set_mean(const Eigen::VectorXd& mean) { mean_ = mean; }

    /// out = mean + L z
    void transform(const Eigen::VectorXd& z, Eigen::VectorXd& out) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;
    bool diagonal_;
};

/// Fills z with i.i.d. standard normals.
void fill_standard_normal(Eigen::VectorXd& z, Rng& rng);

}  // namespace vocmcts
