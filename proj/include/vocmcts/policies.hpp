#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "vocmcts/belief.hpp"
#include "vocmcts/mdp.hpp"
#include "vocmcts/search_tree.hpp"
#include "vocmcts/uct.hpp"
#include "vocmcts/voc.hpp"

namespace vocmcts {

enum class PolicyKind { voc_phi, voc_psi, uct, bayes_uct, thompson, voi };
enum class CovarianceKind { isotropic, rbf, lineage };
/// How VOC(psi) scores candidates.
enum class DynamicMode { proxy, monte_carlo };

std::string_view to_string(PolicyKind kind);
/// Accepts voc-phi, voc-psi, uct, bayes-uct, thompson, voi.
PolicyKind parse_policy_kind(std::string_view name);
std::string_view to_string(CovarianceKind kind);
CovarianceKind parse_covariance_kind(std::string_view name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::uct;
    int budget = 0;  // environment simulations
    int pst_height = 4;

    // Normal prior over leaf values (VOC policies, VOI) or over mean
    // returns (Bayes-UCT, Thompson).
    double prior_mean = 0.5;
    double prior_variance = 1.0;
    double noise_variance = 0.1;
    CovarianceKind covariance = CovarianceKind::isotropic;
    double covariance_scale = 1.0;  // RBF length scale or lineage decay rho

    double uct_exploration = 1.0;    // UCT, and the base sampler below the PST
    double bayes_exploration = 1.0;  // Bayes-UCT's c in mu + c * sd

    DynamicMode dynamic_mode = DynamicMode::proxy;
    int psi_samples = 2048;  // joint draws when reporting psi at the root
    MonteCarloOptions mc;    // nested VOC(psi) estimation
    double epsilon = 1e-9;   // stop once every candidate scores below this
    int rollouts_per_computation = 1;
};

/// Sets one named parameter from text. Known names: kind, budget, height,
/// prior_mean, prior_variance, noise_variance, covariance, scale,
/// exploration, bayes_exploration, dynamic_mode, psi_samples, mc_outer,
/// mc_inner, mc_replicas, epsilon, rollouts. Throws on unknown names or
/// unparsable values.
void set_parameter(PolicyConfig& config, std::string_view name, std::string_view value);
/// Stable "name=value;..." rendering of the tunable fields.
std::string describe(const PolicyConfig& config);

struct PolicyRun {
    std::size_t action = 0;
    std::size_t simulations = 0;
    int computations = 0;
    bool stopped_early = false;
};

/// Algorithm-1 driver: builds the PST, scores every leaf by VOC(phi) or
/// VOC(psi), samples the best one through a per-successor UCT tree, updates
/// the belief, and stops when the best score drops below epsilon or the
/// budget runs out. Returns argmax_a of phi or psi at the root.
PolicyRun voc_greedy_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);
/// Plain UCT from the root for `budget` iterations; most visited action.
PolicyRun uct_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);
PolicyRun bayes_uct_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);
PolicyRun thompson_dng_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);
/// VOI of every root candidate: VOC'(phi_1) per leaf of a height-1 PST.
std::vector<double> voi_scores(const PartialSearchTree& pst, const Belief& belief);

/// VOC'(phi_1)-greedy on a height-1 PST with an isotropic belief and UCT below.
PolicyRun voi_based_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);

/// Dispatches on config.kind. Simulations are counted on a wrapper around
/// `mdp`; the count never exceeds the budget.
PolicyRun run_policy(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng);

/// Builds the configured prior over the leaves of `pst`.
Prior make_prior(const PolicyConfig& config, const PartialSearchTree& pst);

/// Per-successor UCT trees used as the base sampler below the PST. Created
/// lazily and kept for the whole decision.
class SuccessorSampler {
public:
    SuccessorSampler(const Mdp& mdp, double exploration) : mdp_(&mdp), exploration_(exploration) {}

    /// One computation at leaf (s, a): draws s' ~ P(.|s, a) and returns
    /// r + gamma * (return of one UCT iteration from s'), averaged over
    /// `rollouts` iterations.
    double sample_leaf(StateId s, std::size_t a, int rollouts, Rng& rng);
    std::size_t num_trees() const { return trees_.size(); }

private:
    const Mdp* mdp_;
    double exploration_;
    std::map<StateId, std::unique_ptr<UctTree>> trees_;
};

}  // namespace vocmcts
