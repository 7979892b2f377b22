#include "vocmcts/voc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "vocmcts/normal.hpp"

namespace vocmcts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_candidate(const PartialSearchTree& pst, std::size_t candidate) {
    if (candidate >= pst.num_leaves()) throw std::invalid_argument("candidate is not a leaf of the partial search tree");
}

// Intercepts of the collapsed flat view and, per leaf, its entry position.
struct FlatLines {
    std::vector<double> intercepts;
    std::vector<int> entry_of_leaf;
};

FlatLines flat_lines(const PartialSearchTree& pst, const Belief& belief) {
    FlatLines lines;
    const auto entries = pst.flat_root();
    lines.intercepts.reserve(entries.size());
    lines.entry_of_leaf.assign(pst.num_leaves(), -1);
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& entry = entries[e];
        if (entry.leaf < 0) {
            lines.intercepts.push_back(entry.offset);
        } else {
            lines.intercepts.push_back(entry.offset + entry.scale * belief.mean(static_cast<std::size_t>(entry.leaf)));
            lines.entry_of_leaf[static_cast<std::size_t>(entry.leaf)] = static_cast<int>(e);
        }
    }
    return lines;
}

double isotropic_closed_form(const PartialSearchTree& pst, const Belief& belief, const FlatLines& lines,
                             std::size_t candidate) {
    const int e = lines.entry_of_leaf[candidate];
    if (e < 0) return 0.0;
    const auto& entry = pst.flat_root()[static_cast<std::size_t>(e)];
    const double var = belief.variance(candidate);
    const double spread = entry.scale * var / std::sqrt(var + belief.noise_variance());
    if (spread <= 0.0 || lines.intercepts.size() < 2) return 0.0;
    double competitor = kNegInf;
    for (std::size_t j = 0; j < lines.intercepts.size(); ++j)
        if (static_cast<int>(j) != e) competitor = std::max(competitor, lines.intercepts[j]);
    const double gap = lines.intercepts[static_cast<std::size_t>(e)] - competitor;
    return spread * expected_positive_part(-std::abs(gap) / spread);
}

double correlated_kg(const PartialSearchTree& pst, const Belief& belief, const FlatLines& lines,
                     std::size_t candidate) {
    const Eigen::VectorXd shift = belief.mean_shift(candidate);
    const auto entries = pst.flat_root();
    std::vector<double> slopes(entries.size(), 0.0);
    for (std::size_t e = 0; e < entries.size(); ++e)
        if (entries[e].leaf >= 0) slopes[e] = entries[e].scale * shift[entries[e].leaf];
    return expected_max_gain(lines.intercepts, slopes);
}

double quadrature_static(const PartialSearchTree&, const Belief& belief, std::size_t candidate,
                         const TreeEvaluator& eval) {
    const Eigen::VectorXd shift = belief.mean_shift(candidate);
    if (shift.squaredNorm() == 0.0) return 0.0;
    const auto& rule = gauss_hermite(32);
    std::vector<double> scratch;
    const double base = eval.root_max(belief.means(), scratch);
    Eigen::VectorXd moved(belief.means().size());
    double expected = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        moved = belief.means() + rule.nodes[k] * shift;
        expected += rule.weights[k] * eval.root_max(moved, scratch);
    }
    return expected - base;
}

Estimate mean_and_se(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

std::string_view to_string(VocMethod method) {
    switch (method) {
        case VocMethod::isotropic_exact: return "isotropic-exact";
        case VocMethod::kg_exact: return "kg-exact";
        case VocMethod::quadrature: return "quadrature";
        case VocMethod::lambda_sensitivity: return "lambda-sensitivity";
        case VocMethod::monte_carlo: return "monte-carlo";
    }
    return "unknown";
}

std::size_t argmax_lowest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double expected_max_gain(std::span<const double> intercepts, std::span<const double> slopes) {
    if (intercepts.size() != slopes.size()) throw std::invalid_argument("intercept/slope size mismatch");
    const std::size_t n = intercepts.size();
    if (n < 2) return 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (slopes[i] != slopes[j]) return slopes[i] < slopes[j];
        return intercepts[i] < intercepts[j];
    });
    // Keep only the largest intercept among equal slopes.
    std::vector<std::size_t> lines;
    for (std::size_t k = 0; k < n; ++k) {
        if (k + 1 < n && slopes[order[k + 1]] == slopes[order[k]]) continue;
        lines.push_back(order[k]);
    }
    // Upper envelope; breakpoints[k] is where envelope[k+1] overtakes envelope[k].
    std::vector<std::size_t> envelope;
    std::vector<double> breakpoints;
    for (std::size_t j : lines) {
        while (!envelope.empty()) {
            const std::size_t i = envelope.back();
            const double z = (intercepts[i] - intercepts[j]) / (slopes[j] - slopes[i]);
            if (!breakpoints.empty() && z <= breakpoints.back()) {
                envelope.pop_back();
                breakpoints.pop_back();
                continue;
            }
            breakpoints.push_back(z);
            break;
        }
        envelope.push_back(j);
    }
    double gain = 0.0;
    for (std::size_t k = 0; k + 1 < envelope.size(); ++k)
        gain += (slopes[envelope[k + 1]] - slopes[envelope[k]]) * expected_positive_part(-std::abs(breakpoints[k]));
    return gain;
}

VocResult voc_static(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate) {
    check_candidate(pst, candidate);
    if (!pst.deterministic()) {
        const TreeEvaluator eval(pst);
        return {candidate, quadrature_static(pst, belief, candidate, eval), 0.0, VocMethod::quadrature};
    }
    const FlatLines lines = flat_lines(pst, belief);
    if (!belief.correlated())
        return {candidate, isotropic_closed_form(pst, belief, lines, candidate), 0.0, VocMethod::isotropic_exact};
    return {candidate, correlated_kg(pst, belief, lines, candidate), 0.0, VocMethod::kg_exact};
}

std::vector<VocResult> voc_static_all(const PartialSearchTree& pst, const Belief& belief) {
    const std::size_t m = pst.num_leaves();
    std::vector<VocResult> out(m);
    if (!pst.deterministic()) {
        const TreeEvaluator eval(pst);
        for (std::size_t l = 0; l < m; ++l) out[l] = {l, quadrature_static(pst, belief, l, eval), 0.0, VocMethod::quadrature};
        return out;
    }
    const FlatLines lines = flat_lines(pst, belief);
    for (std::size_t l = 0; l < m; ++l) {
        if (belief.correlated())
            out[l] = {l, correlated_kg(pst, belief, lines, l), 0.0, VocMethod::kg_exact};
        else
            out[l] = {l, isotropic_closed_form(pst, belief, lines, l), 0.0, VocMethod::isotropic_exact};
    }
    return out;
}

double CountSensitivity::sd(double n) const {
    return std::sqrt(noise_variance * prior_variance / (n * prior_variance + noise_variance));
}

double CountSensitivity::mean(double n) const {
    return (n * outcome_mean * prior_variance + prior_mean * noise_variance) / (n * prior_variance + noise_variance);
}

double CountSensitivity::d_sd(double n) const {
    const double sigma = std::sqrt(noise_variance);
    const double sigma0 = std::sqrt(prior_variance);
    return -sigma * sigma0 * prior_variance / (2.0 * std::pow(n * prior_variance + noise_variance, 1.5));
}

double CountSensitivity::d_mean(double n) const {
    const double denom = n * prior_variance + noise_variance;
    return noise_variance * prior_variance * (outcome_mean - prior_mean) / (denom * denom);
}

std::vector<VocResult> voc_dynamic_proxy_all(const PartialSearchTree& pst, const Belief& belief) {
    if (!pst.deterministic()) throw std::invalid_argument("the lambda-sensitivity proxy requires deterministic transitions");
    if (belief.correlated()) throw std::invalid_argument("the lambda-sensitivity proxy requires an isotropic belief");
    const auto gaussians = root_leaf_gaussians(pst, belief);
    const CBound bound = optimal_c(gaussians);
    const auto entries = pst.flat_root();
    std::vector<VocResult> out(pst.num_leaves());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = {l, 0.0, 0.0, VocMethod::lambda_sensitivity};
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (entries[e].leaf < 0) continue;
        const auto l = static_cast<std::size_t>(entries[e].leaf);
        const auto li = static_cast<Eigen::Index>(l);
        const double prior_var = belief.prior().variances()[li];
        if (prior_var <= 0.0) continue;
        const CountSensitivity sens{belief.prior().mean()[li], prior_var, belief.noise_variance(), belief.outcome_mean(l)};
        const LambdaPartials partials = lambda_partials(gaussians[e], bound.c);
        const double n = belief.count(l);
        const double d_lambda = entries[e].scale * (partials.d_sd * sens.d_sd(n) + partials.d_mean * sens.d_mean(n));
        out[l].value = std::abs(d_lambda);
    }
    return out;
}

VocResult voc_dynamic_proxy(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate) {
    check_candidate(pst, candidate);
    return voc_dynamic_proxy_all(pst, belief)[candidate];
}

NestedDynamicEstimate nested_dynamic_mc(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate,
                                        const MonteCarloOptions& options, Rng& rng) {
    check_candidate(pst, candidate);
    if (options.outer < 1 || options.inner < 1 || options.replicas < 1)
        throw std::invalid_argument("Monte Carlo sizes must be >= 1");
    const TreeEvaluator eval(pst);
    const std::size_t actions = pst.num_root_actions();
    const auto m = static_cast<Eigen::Index>(pst.num_leaves());

    const JointSampler current = JointSampler::from_belief(belief);
    Eigen::MatrixXd next_factor;
    if (belief.correlated()) {
        next_factor = psd_factor(belief.covariance_after(candidate));
    } else {
        next_factor = belief.covariance_after(candidate).diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }
    JointSampler next(belief.means(), next_factor);
    const Eigen::VectorXd shift = belief.mean_shift(candidate);

    const int inner_pairs = (options.inner + 1) / 2;
    const int outer_pairs = (options.outer + 1) / 2;
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> voc_r, prime_r, gap_r;
    std::vector<std::vector<double>> drift_r(actions);
    std::vector<Eigen::VectorXd> eps(static_cast<std::size_t>(2 * inner_pairs), Eigen::VectorXd(m));
    Eigen::VectorXd draw(m);
    std::vector<double> scratch, values(actions), psi(actions), psi_next(actions);

    auto average_root_values = [&](const JointSampler& sampler, std::vector<double>& out) {
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& e : eps) {
            sampler.transform(e, draw);
            eval.root_values(draw, scratch, values);
            for (std::size_t a = 0; a < actions; ++a) out[a] += values[a];
        }
        for (auto& v : out) v /= static_cast<double>(eps.size());
    };

    for (int r = 0; r < options.replicas; ++r) {
        for (int p = 0; p < inner_pairs; ++p) {
            fill_standard_normal(eps[2 * p], rng);
            eps[2 * p + 1] = -eps[2 * p];
        }
        average_root_values(current, psi);
        const std::size_t alpha = argmax_lowest(psi);
        const double psi_max = psi[alpha];

        double sum_max = 0.0, sum_prime = 0.0;
        std::vector<double> sum_action(actions, 0.0);
        for (int k = 0; k < outer_pairs; ++k) {
            const double z = normal(rng);
            for (double sign : {1.0, -1.0}) {
                next.set_mean(belief.means() + (sign * z) * shift);
                average_root_values(next, psi_next);
                const double best = *std::max_element(psi_next.begin(), psi_next.end());
                sum_max += best;
                sum_prime += best - psi_next[alpha];
                for (std::size_t a = 0; a < actions; ++a) sum_action[a] += psi_next[a];
            }
        }
        const double outer_n = 2.0 * outer_pairs;
        voc_r.push_back(sum_max / outer_n - psi_max);
        prime_r.push_back(sum_prime / outer_n);
        gap_r.push_back(sum_action[alpha] / outer_n - psi_max);
        for (std::size_t a = 0; a < actions; ++a) drift_r[a].push_back(sum_action[a] / outer_n - psi[a]);
    }

    NestedDynamicEstimate out;
    out.voc = mean_and_se(voc_r);
    out.voc_prime = mean_and_se(prime_r);
    out.gap = mean_and_se(gap_r);
    for (std::size_t a = 0; a < actions; ++a) out.drift.push_back(mean_and_se(drift_r[a]));
    return out;
}

VocResult voc_dynamic_mc(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate,
                         const MonteCarloOptions& options, Rng& rng) {
    const auto est = nested_dynamic_mc(pst, belief, candidate, options, rng);
    return {candidate, est.voc.value, est.voc.se, VocMethod::monte_carlo};
}

double voc_prime_static(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate) {
    check_candidate(pst, candidate);
    const TreeEvaluator eval(pst);
    const auto current = eval.root_values(belief.means());
    const std::size_t alpha = argmax_lowest(current);
    const Eigen::VectorXd shift = belief.mean_shift(candidate);
    if (shift.squaredNorm() == 0.0) return 0.0;
    if (pst.deterministic()) {
        auto gain = [&](std::span<const FlatEntry> entries) {
            std::vector<double> intercepts, slopes;
            for (const auto& e : entries) {
                const bool leaf = e.leaf >= 0;
                intercepts.push_back(e.offset + (leaf ? e.scale * belief.mean(static_cast<std::size_t>(e.leaf)) : 0.0));
                slopes.push_back(leaf ? e.scale * shift[e.leaf] : 0.0);
            }
            return expected_max_gain(intercepts, slopes);
        };
        return std::max(0.0, gain(pst.flat_root()) - gain(pst.flat_action(alpha)));
    }
    const auto& rule = gauss_hermite(32);
    std::vector<double> scratch, values(current.size());
    Eigen::VectorXd moved(belief.means().size());
    double expected = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        moved = belief.means() + rule.nodes[k] * shift;
        eval.root_values(moved, scratch, values);
        expected += rule.weights[k] * (*std::max_element(values.begin(), values.end()) - values[alpha]);
    }
    return expected;
}

Estimate voc_prime(const PartialSearchTree& pst, const Belief& belief, std::size_t candidate, ValueKind kind,
                   const MonteCarloOptions& options, Rng& rng) {
    if (kind == ValueKind::static_value) return {voc_prime_static(pst, belief, candidate), 0.0};
    return nested_dynamic_mc(pst, belief, candidate, options, rng).voc_prime;
}

Estimate bayesian_simple_regret(const PartialSearchTree& pst, const Belief& belief, ValueKind kind, int samples,
                                Rng& rng) {
    if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
    const TreeEvaluator eval(pst);
    const JointSampler sampler = JointSampler::from_belief(belief);
    const std::size_t actions = pst.num_root_actions();
    const auto m = static_cast<Eigen::Index>(pst.num_leaves());
    const int pairs = (samples + 1) / 2;

    // Per pair: average of max_a Upsilon and of each Upsilon(a).
    std::vector<double> pair_max(static_cast<std::size_t>(pairs));
    std::vector<std::vector<double>> pair_action(actions, std::vector<double>(static_cast<std::size_t>(pairs)));
    Eigen::VectorXd z(m), draw(m);
    std::vector<double> scratch, values(actions);
    for (int p = 0; p < pairs; ++p) {
        fill_standard_normal(z, rng);
        double best_sum = 0.0;
        std::vector<double> sums(actions, 0.0);
        for (double sign : {1.0, -1.0}) {
            sampler.transform(sign * z, draw);
            eval.root_values(draw, scratch, values);
            best_sum += *std::max_element(values.begin(), values.end());
            for (std::size_t a = 0; a < actions; ++a) sums[a] += values[a];
        }
        pair_max[static_cast<std::size_t>(p)] = 0.5 * best_sum;
        for (std::size_t a = 0; a < actions; ++a) pair_action[a][static_cast<std::size_t>(p)] = 0.5 * sums[a];
    }

    if (kind == ValueKind::static_value) {
        const auto phi = eval.root_values(belief.means());
        Estimate est = mean_and_se(pair_max);
        est.value -= *std::max_element(phi.begin(), phi.end());
        return est;
    }
    std::vector<double> psi(actions);
    for (std::size_t a = 0; a < actions; ++a)
        psi[a] = std::accumulate(pair_action[a].begin(), pair_action[a].end(), 0.0) / pairs;
    const std::size_t best = argmax_lowest(psi);
    std::vector<double> diff(static_cast<std::size_t>(pairs));
    for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = pair_max[p] - pair_action[best][p];
    return mean_and_se(diff);
}

}  // namespace vocmcts
