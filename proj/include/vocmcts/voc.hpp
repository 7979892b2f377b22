#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vocmcts/belief.hpp"
#include "vocmcts/search_tree.hpp"
#include "vocmcts/values.hpp"

namespace vocmcts {

enum class VocMethod { isotropic_exact, kg_exact, quadrature, lambda_sensitivity, monte_carlo };

std::string_view to_string(VocMethod method);

/// Selects phi_n (static) or psi_n (dynamic).
enum class ValueKind { static_value, dynamic_value };

struct VocResult {
    std::size_t candidate = 0;  // leaf index
    double value = 0.0;
    double se = 0.0;  // zero for exact methods
    VocMethod method = VocMethod::isotropic_exact;
};

/// E[max_j (a_j + b_j Z)] - max_j a_j for Z ~ N(0,1), via the upper envelope
/// of the lines (sort by slope, drop dominated lines, sum over breakpoints).
double expected_max_gain(std::span<const double> intercepts, std::span<const double> slopes);

/// One-step VOC of a candidate leaf with f = phi_n.
///  - deterministic + isotropic: truncated-Normal closed form
///  - deterministic + correlated: envelope algorithm over all flat entries
///  - stochastic: 32-node Gauss-Hermite over the predictive outcome
VocResult voc_static(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate);
std::vector<VocResult> voc_static_all(const PartialSearchTree& pst, const Belief& belief);

/// Posterior sd and mean of an isotropic leaf as smooth functions of the
/// observation count n, with the empirical outcome mean held fixed.
struct CountSensitivity {
    double prior_mean;
    double prior_variance;
    double noise_variance;
    double outcome_mean;

    double sd(double n) const;
    double mean(double n) const;
    double d_sd(double n) const;
    double d_mean(double n) const;
};

/// |d lambda / d n| for every leaf, holding c at its current optimum.
/// Requires deterministic transitions and an isotropic belief.
std::vector<VocResult> voc_dynamic_proxy_all(const PartialSearchTree& pst, const Belief& belief);
VocResult voc_dynamic_proxy(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate);

/// Nested Monte Carlo sizes: `replicas` independent estimates, each with
/// `outer` predictive-outcome draws and `inner` joint leaf draws (both in
/// antithetic pairs). SEs are computed across replicas.
struct MonteCarloOptions {
    int outer = 32;
    int inner = 128;
    int replicas = 8;
};

/// Everything the nested estimator produces for one candidate.
struct NestedDynamicEstimate {
    Estimate voc;        // E[max_a psi'] - max_a psi
    Estimate voc_prime;  // E[max_a psi' - psi'(alpha)]
    Estimate gap;        // voc - voc_prime, paired per replica
    std::vector<Estimate> drift;  // E[psi'(a)] - psi(a) per root action
};
NestedDynamicEstimate nested_dynamic_mc(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate,
                                        const MonteCarloOptions& options, Rng& rng);

/// VOC with f = psi_n by nested sampling.
VocResult voc_dynamic_mc(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate,
                         const MonteCarloOptions& options, Rng& rng);

/// VOC' = E[max_a f(.|w W) - f(alpha|w W)], alpha = argmax_a f(.|w) (lowest index on ties).
/// Static: envelope algorithm on deterministic trees, Gauss-Hermite otherwise (se = 0).
/// Dynamic: nested MC.
Estimate voc_prime(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate, ValueKind kind,
                   const MonteCarloOptions& options, Rng& rng);
double voc_prime_static(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate);

/// R_f = E[max_a Upsilon(root, a)] - max_a f(root, a).
Estimate bayesian_simple_regret(const PartialSearchTree& pst, const Belief& belief, ValueKind kind, int samples,
                                Rng& rng);

/// Index of the largest value; lowest index on ties.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace vocmcts
