#include "vocmcts/belief.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vocmcts/search_tree.hpp"

namespace vocmcts {

Prior Prior::isotropic(Eigen::VectorXd mean, Eigen::VectorXd variance, double noise_variance) {
    if (mean.size() != variance.size()) throw std::invalid_argument("prior mean/variance size mismatch");
    if (mean.size() == 0) throw std::invalid_argument("empty prior");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if ((variance.array() < 0.0).any()) throw std::invalid_argument("negative prior variance");
    Prior p;
    p.correlated_ = false;
    p.mean_ = std::move(mean);
    p.variance_ = std::move(variance);
    p.noise_variance_ = noise_variance;
    return p;
}

Prior Prior::isotropic(std::size_t leaves, double mean, double variance, double noise_variance) {
    const auto m = static_cast<Eigen::Index>(leaves);
    return isotropic(Eigen::VectorXd::Constant(m, mean), Eigen::VectorXd::Constant(m, variance), noise_variance);
}

Prior Prior::correlated(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double noise_variance) {
    if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
        throw std::invalid_argument("prior covariance has the wrong shape");
    if (mean.size() == 0) throw std::invalid_argument("empty prior");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if (!covariance.isApprox(covariance.transpose(), 1e-12)) throw std::invalid_argument("prior covariance is not symmetric");
    // PSD check: Cholesky must succeed with jitter <= 1e-8.
    bool ok = false;
    for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
        Eigen::MatrixXd trial = covariance;
        trial.diagonal().array() += jitter;
        if (Eigen::LLT<Eigen::MatrixXd>(trial).info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok) throw std::invalid_argument("prior covariance is not positive semi-definite");
    Prior p;
    p.correlated_ = true;
    p.mean_ = std::move(mean);
    p.covariance_ = std::move(covariance);
    p.variance_ = p.covariance_.diagonal();
    p.noise_variance_ = noise_variance;
    return p;
}

Eigen::VectorXd Prior::variances() const { return variance_; }

Eigen::MatrixXd Prior::covariance() const {
    if (correlated_) return covariance_;
    return variance_.asDiagonal();
}

void KnowledgeState::append(const Observation& obs) {
    if (!observations_.empty() && obs.time <= observations_.back().time)
        throw std::invalid_argument("knowledge state times must strictly increase");
    if (!std::isfinite(obs.outcome)) throw std::invalid_argument("non-finite outcome");
    observations_.push_back(obs);
}

void KnowledgeState::append(std::size_t leaf, double outcome) {
    const int t = observations_.empty() ? 1 : observations_.back().time + 1;
    append(Observation{leaf, outcome, t});
}

Belief::Belief(const Prior& prior)
    : prior_(prior),
      correlated_(prior.correlated()),
      mean_(prior.mean()),
      counts_(prior.size(), 0),
      outcome_sums_(prior.size(), 0.0) {
    if (correlated_)
        covariance_ = prior.covariance();
    else
        variance_ = prior.variances();
}

void Belief::check_leaf(std::size_t leaf) const {
    if (leaf >= size()) throw std::out_of_range("leaf index " + std::to_string(leaf) + " out of range");
}

double Belief::variance(std::size_t leaf) const {
    const auto i = static_cast<Eigen::Index>(leaf);
    return correlated_ ? covariance_(i, i) : variance_[i];
}

Eigen::VectorXd Belief::variances() const { return correlated_ ? Eigen::VectorXd(covariance_.diagonal()) : variance_; }

Eigen::MatrixXd Belief::covariance() const {
    if (correlated_) return covariance_;
    return variance_.asDiagonal();
}

double Belief::outcome_mean(std::size_t leaf) const {
    check_leaf(leaf);
    if (counts_[leaf] == 0) return prior_.mean()[static_cast<Eigen::Index>(leaf)];
    return outcome_sums_[leaf] / counts_[leaf];
}

void Belief::update(std::size_t leaf, double outcome) {
    check_leaf(leaf);
    if (!std::isfinite(outcome)) throw std::invalid_argument("non-finite outcome");
    const auto i = static_cast<Eigen::Index>(leaf);
    const double noise = noise_variance();
    if (correlated_) {
        const double denom = covariance_(i, i) + noise;
        const Eigen::VectorXd column = covariance_.col(i);
        mean_ += column * ((outcome - mean_[i]) / denom);
        covariance_.noalias() -= column * column.transpose() / denom;
        covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
        for (Eigen::Index k = 0; k < covariance_.rows(); ++k)
            if (covariance_(k, k) < 0.0) covariance_(k, k) = 0.0;
    } else if (variance_[i] > 0.0) {
        const double precision = 1.0 / variance_[i] + 1.0 / noise;
        mean_[i] = (mean_[i] / variance_[i] + outcome / noise) / precision;
        variance_[i] = 1.0 / precision;
    }
    ++counts_[leaf];
    outcome_sums_[leaf] += outcome;
    ++time_;
}

Belief Belief::updated(std::size_t leaf, double outcome) const {
    Belief next = *this;
    next.update(leaf, outcome);
    return next;
}

NormalDist Belief::predictive(std::size_t leaf) const {
    check_leaf(leaf);
    return {mean(leaf), variance(leaf) + noise_variance()};
}

Eigen::VectorXd Belief::mean_shift(std::size_t leaf) const {
    check_leaf(leaf);
    const auto i = static_cast<Eigen::Index>(leaf);
    const double scale = std::sqrt(variance(leaf) + noise_variance());
    if (correlated_) return covariance_.col(i) / scale;
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(mean_.size());
    shift[i] = variance_[i] / scale;
    return shift;
}

Eigen::MatrixXd Belief::covariance_after(std::size_t leaf) const {
    check_leaf(leaf);
    const auto i = static_cast<Eigen::Index>(leaf);
    Eigen::MatrixXd cov = covariance();
    const Eigen::VectorXd column = cov.col(i);
    cov.noalias() -= column * column.transpose() / (cov(i, i) + noise_variance());
    return 0.5 * (cov + cov.transpose());
}

Belief init_belief(const Prior& prior, const PartialSearchTree& pst) {
    if (prior.size() != pst.num_leaves())
        throw std::invalid_argument("prior has " + std::to_string(prior.size()) + " entries but the tree has " +
                                    std::to_string(pst.num_leaves()) + " leaves");
    return Belief(prior);
}

Belief posterior(const Prior& prior, const KnowledgeState& knowledge) {
    Belief belief(prior);
    const auto m = static_cast<Eigen::Index>(prior.size());
    const double noise = prior.noise_variance();
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(m);
    for (const auto& obs : knowledge.observations()) {
        if (obs.leaf >= prior.size()) throw std::out_of_range("observation leaf out of range");
        counts[static_cast<Eigen::Index>(obs.leaf)] += 1.0;
        sums[static_cast<Eigen::Index>(obs.leaf)] += obs.outcome;
    }
    if (!prior.correlated()) {
        const Eigen::VectorXd& v0 = prior.variances();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (v0[i] <= 0.0) continue;
            const double precision = 1.0 / v0[i] + counts[i] / noise;
            belief.variance_[i] = 1.0 / precision;
            belief.mean_[i] = (prior.mean()[i] / v0[i] + sums[i] / noise) / precision;
        }
    } else {
        // Information form: S = (S0^-1 + D/noise)^-1 written without inverting S0:
        // S = S0 - S0 D^1/2 (noise I + D^1/2 S0 D^1/2)^-1 D^1/2 S0.
        const Eigen::MatrixXd& s0 = prior.covariance();
        const Eigen::VectorXd root = counts.cwiseSqrt();
        const Eigen::MatrixXd inner = root.asDiagonal() * s0 * root.asDiagonal() +
                                      noise * Eigen::MatrixXd::Identity(m, m);
        const Eigen::LDLT<Eigen::MatrixXd> solver(inner);
        const Eigen::MatrixXd cross = root.asDiagonal() * s0;
        belief.covariance_ = s0 - cross.transpose() * solver.solve(cross);
        belief.covariance_ = 0.5 * (belief.covariance_ + belief.covariance_.transpose()).eval();
        // residual form of the mean: mu = mu0 + S0 D^1/2 inner^-1 D^-1/2 (sums - counts mu0)
        Eigen::VectorXd residual = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i)
            if (counts[i] > 0.0) residual[i] = (sums[i] - counts[i] * prior.mean()[i]) / root[i];
        belief.mean_ = prior.mean() + cross.transpose() * solver.solve(residual);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        belief.counts_[static_cast<std::size_t>(i)] = static_cast<int>(counts[i]);
        belief.outcome_sums_[static_cast<std::size_t>(i)] = sums[i];
    }
    belief.time_ = static_cast<int>(knowledge.size());
    return belief;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, double max_jitter) {
    for (double jitter : {0.0, 1e-12, 1e-10, max_jitter}) {
        if (jitter > max_jitter) break;
        Eigen::MatrixXd trial = cov;
        trial.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
    if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd rbf_covariance(std::size_t m, double scale, double variance) {
    if (m < 1) throw std::invalid_argument("rbf covariance needs at least one index");
    if (!(scale > 0.0)) throw std::invalid_argument("rbf scale must be positive");
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = static_cast<double>(i - j);
            cov(i, j) = variance * std::exp(-d * d / (2.0 * scale * scale));
        }
    return cov;
}

Eigen::MatrixXd lineage_covariance(const PartialSearchTree& pst, double variance, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("lineage correlation must lie in [0, 1]");
    const auto& nodes = pst.nodes();
    // First-discovery parent: the lowest-index node with a branch into each node.
    std::vector<std::size_t> parent(nodes.size(), 0);
    std::vector<bool> seen(nodes.size(), false);
    seen[0] = true;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (const auto& act : nodes[i].actions)
            for (const auto& b : act.branches)
                if (!seen[b.child]) {
                    seen[b.child] = true;
                    parent[b.child] = i;
                }
    const auto& leaves = pst.leaves();
    const std::size_t m = leaves.size();
    std::vector<std::vector<std::size_t>> paths(m);
    for (std::size_t l = 0; l < m; ++l) {
        std::vector<std::size_t> path;
        for (std::size_t v = leaves[l].node;; v = parent[v]) {
            path.push_back(v);
            if (v == 0) break;
        }
        paths[l].assign(path.rbegin(), path.rend());
    }
    const int full = pst.depth() + 2;
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            int shared = 0;
            const auto& a = paths[i];
            const auto& b = paths[j];
            while (shared < static_cast<int>(std::min(a.size(), b.size())) && a[shared] == b[shared]) ++shared;
            if (shared == static_cast<int>(a.size()) && a.size() == b.size() && leaves[i].action == leaves[j].action)
                ++shared;
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = variance * std::pow(rho, full - shared);
        }
    return cov;
}

JointSampler::JointSampler(Eigen::VectorXd mean, Eigen::MatrixXd factor)
    : mean_(std::move(mean)), factor_(std::move(factor)) {
    diagonal_ = factor_.isDiagonal(0.0);
}

JointSampler JointSampler::from_belief(const Belief& belief) {
    if (!belief.correlated()) {
        Eigen::MatrixXd factor = belief.variances().cwiseSqrt().asDiagonal();
        return JointSampler(belief.means(), std::move(factor));
    }
    return JointSampler(belief.means(), psd_factor(belief.covariance()));
}

void JointSampler::transform(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
    if (diagonal_)
        out = mean_ + factor_.diagonal().cwiseProduct(z);
    else
        out.noalias() = mean_ + factor_.triangularView<Eigen::Lower>() * z;
}

void fill_standard_normal(Eigen::VectorXd& z, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
}

}  // namespace vocmcts
