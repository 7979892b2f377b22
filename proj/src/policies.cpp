#include "vocmcts/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

#include "vocmcts/bayes_search.hpp"
#include "vocmcts/values.hpp"

namespace vocmcts {

namespace {

double parse_double(std::string_view name, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw std::invalid_argument("parameter " + std::string(name) + ": cannot parse '" + std::string(text) + "'");
    return value;
}

int parse_int(std::string_view name, std::string_view text) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw std::invalid_argument("parameter " + std::string(name) + ": cannot parse '" + std::string(text) + "'");
    return value;
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

int computation_budget(const PolicyConfig& config) {
    if (config.budget < 0) throw std::invalid_argument("budget must be >= 0");
    if (config.rollouts_per_computation < 1) throw std::invalid_argument("rollouts per computation must be >= 1");
    return config.budget / config.rollouts_per_computation;
}

std::size_t exact_lookahead_action(const Mdp& mdp, StateId root, int horizon) {
    const QTable table = exact_qstar(mdp, root, horizon);
    std::vector<double> q(table.num_actions(root));
    for (std::size_t a = 0; a < q.size(); ++a) q[a] = table.q(root, a);
    return argmax_lowest(q);
}

bool proxy_applicable(const PartialSearchTree& pst, const Belief& belief) {
    return pst.deterministic() && !belief.correlated();
}

std::vector<VocResult> score_candidates(const PartialSearchTree& pst, const Belief& belief, const PolicyConfig& config,
                                        Rng& rng) {
    if (config.kind == PolicyKind::voc_phi) return voc_static_all(pst, belief);
    if (config.dynamic_mode == DynamicMode::proxy && proxy_applicable(pst, belief))
        return voc_dynamic_proxy_all(pst, belief);
    std::vector<VocResult> out;
    for (std::size_t l = 0; l < pst.num_leaves(); ++l) out.push_back(voc_dynamic_mc(pst, belief, l, config.mc, rng));
    return out;
}

std::size_t final_action(const PartialSearchTree& pst, const Belief& belief, const PolicyConfig& config, Rng& rng) {
    if (config.kind != PolicyKind::voc_psi) return argmax_lowest(static_root_values(pst, belief));
    const auto psi = dynamic_root_values_mc(pst, belief, config.psi_samples, rng);
    std::vector<double> means;
    for (const auto& e : psi) means.push_back(e.value);
    return argmax_lowest(means);
}

void check_root(const Mdp& mdp, StateId root) {
    if (mdp.is_terminal(root) || mdp.num_actions(root) == 0)
        throw std::invalid_argument("cannot choose an action: the root has no actions");
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::voc_phi: return "voc-phi";
        case PolicyKind::voc_psi: return "voc-psi";
        case PolicyKind::uct: return "uct";
        case PolicyKind::bayes_uct: return "bayes-uct";
        case PolicyKind::thompson: return "thompson";
        case PolicyKind::voi: return "voi";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
    for (auto kind : {PolicyKind::voc_phi, PolicyKind::voc_psi, PolicyKind::uct, PolicyKind::bayes_uct,
                      PolicyKind::thompson, PolicyKind::voi})
        if (to_string(kind) == name) return kind;
    throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::isotropic: return "isotropic";
        case CovarianceKind::rbf: return "rbf";
        case CovarianceKind::lineage: return "lineage";
    }
    return "unknown";
}

CovarianceKind parse_covariance_kind(std::string_view name) {
    for (auto kind : {CovarianceKind::isotropic, CovarianceKind::rbf, CovarianceKind::lineage})
        if (to_string(kind) == name) return kind;
    throw std::invalid_argument("unknown covariance '" + std::string(name) + "'");
}

void set_parameter(PolicyConfig& c, std::string_view name, std::string_view value) {
    if (name == "kind") c.kind = parse_policy_kind(value);
    else if (name == "budget") c.budget = parse_int(name, value);
    else if (name == "height") c.pst_height = parse_int(name, value);
    else if (name == "prior_mean") c.prior_mean = parse_double(name, value);
    else if (name == "prior_variance") c.prior_variance = parse_double(name, value);
    else if (name == "noise_variance") c.noise_variance = parse_double(name, value);
    else if (name == "covariance") c.covariance = parse_covariance_kind(value);
    else if (name == "scale") c.covariance_scale = parse_double(name, value);
    else if (name == "exploration") c.uct_exploration = parse_double(name, value);
    else if (name == "bayes_exploration") c.bayes_exploration = parse_double(name, value);
    else if (name == "dynamic_mode") {
        if (value == "proxy") c.dynamic_mode = DynamicMode::proxy;
        else if (value == "monte-carlo") c.dynamic_mode = DynamicMode::monte_carlo;
        else throw std::invalid_argument("dynamic_mode must be proxy or monte-carlo");
    }
    else if (name == "psi_samples") c.psi_samples = parse_int(name, value);
    else if (name == "mc_outer") c.mc.outer = parse_int(name, value);
    else if (name == "mc_inner") c.mc.inner = parse_int(name, value);
    else if (name == "mc_replicas") c.mc.replicas = parse_int(name, value);
    else if (name == "epsilon") c.epsilon = parse_double(name, value);
    else if (name == "rollouts") c.rollouts_per_computation = parse_int(name, value);
    else throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

std::string describe(const PolicyConfig& c) {
    std::string out = "kind=" + std::string(to_string(c.kind));
    switch (c.kind) {
        case PolicyKind::uct:
            out += ";exploration=" + format_number(c.uct_exploration);
            break;
        case PolicyKind::bayes_uct:
            out += ";prior_mean=" + format_number(c.prior_mean) + ";prior_variance=" + format_number(c.prior_variance) +
                   ";noise_variance=" + format_number(c.noise_variance) +
                   ";bayes_exploration=" + format_number(c.bayes_exploration);
            break;
        case PolicyKind::thompson:
            out += ";prior_mean=" + format_number(c.prior_mean) + ";prior_variance=" + format_number(c.prior_variance) +
                   ";noise_variance=" + format_number(c.noise_variance);
            break;
        default:
            out += ";height=" + std::to_string(c.kind == PolicyKind::voi ? 1 : c.pst_height) +
                   ";prior_mean=" + format_number(c.prior_mean) + ";prior_variance=" + format_number(c.prior_variance) +
                   ";noise_variance=" + format_number(c.noise_variance) +
                   ";covariance=" + std::string(to_string(c.covariance)) + ";scale=" + format_number(c.covariance_scale) +
                   ";exploration=" + format_number(c.uct_exploration);
            break;
    }
    return out;
}

Prior make_prior(const PolicyConfig& config, const PartialSearchTree& pst) {
    const std::size_t m = pst.num_leaves();
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), config.prior_mean);
    switch (config.covariance) {
        case CovarianceKind::isotropic:
            return Prior::isotropic(m, config.prior_mean, config.prior_variance, config.noise_variance);
        case CovarianceKind::rbf:
            return Prior::correlated(mean, rbf_covariance(m, config.covariance_scale, config.prior_variance),
                                     config.noise_variance);
        case CovarianceKind::lineage:
            return Prior::correlated(mean, lineage_covariance(pst, config.prior_variance, config.covariance_scale),
                                     config.noise_variance);
    }
    throw std::logic_error("unhandled covariance kind");
}

double SuccessorSampler::sample_leaf(StateId s, std::size_t a, int rollouts, Rng& rng) {
    const double gamma = mdp_->discount();
    double total = 0.0;
    for (int k = 0; k < rollouts; ++k) {
        const Transition t = sample_transition(*mdp_, s, a, rng);
        auto& tree = trees_[t.next];
        if (!tree) tree = std::make_unique<UctTree>(*mdp_, t.next, exploration_);
        total += t.reward + gamma * tree->sample(rng);
    }
    return total / rollouts;
}

PolicyRun voc_greedy_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    check_root(mdp, root);
    if (config.kind != PolicyKind::voc_phi && config.kind != PolicyKind::voc_psi)
        throw std::invalid_argument("voc_greedy_run needs kind voc-phi or voc-psi");
    if (config.pst_height < 1) throw std::invalid_argument("PST height must be >= 1");
    const int computations = computation_budget(config);

    std::optional<PartialSearchTree> pst;
    try {
        pst = build_pst(mdp, root, config.pst_height);
    } catch (const NoLeavesError&) {
        return {exact_lookahead_action(mdp, root, config.pst_height), 0, 0, true};
    }
    Belief belief = init_belief(make_prior(config, *pst), *pst);
    SuccessorSampler sampler(mdp, config.uct_exploration);

    PolicyRun run;
    for (int t = 0; t < computations; ++t) {
        const auto scores = score_candidates(*pst, belief, config, rng);
        std::vector<double> values;
        for (const auto& r : scores) values.push_back(r.value);
        const std::size_t best = argmax_lowest(values);
        if (scores[best].value < std::max(config.epsilon, scores[best].se)) {
            run.stopped_early = true;
            break;
        }
        const Leaf& leaf = pst->leaves()[best];
        belief.update(best, sampler.sample_leaf(leaf.state, leaf.action, config.rollouts_per_computation, rng));
        ++run.computations;
    }
    run.action = final_action(*pst, belief, config, rng);
    return run;
}

PolicyRun uct_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    check_root(mdp, root);
    const int computations = computation_budget(config);
    UctTree tree(mdp, root, config.uct_exploration);
    for (int t = 0; t < computations; ++t)
        for (int k = 0; k < config.rollouts_per_computation; ++k) tree.sample(rng);
    return {tree.best_action(), 0, computations, false};
}

PolicyRun bayes_uct_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    check_root(mdp, root);
    const int computations = computation_budget(config);
    BayesUctTree tree(mdp, root, {config.prior_mean, config.prior_variance, config.noise_variance},
                      config.bayes_exploration);
    for (int t = 0; t < computations; ++t)
        for (int k = 0; k < config.rollouts_per_computation; ++k) tree.sample(rng);
    return {tree.best_action(), 0, computations, false};
}

PolicyRun thompson_dng_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    check_root(mdp, root);
    const int computations = computation_budget(config);
    ThompsonTree tree(mdp, root, {config.prior_mean, config.prior_variance, config.noise_variance});
    for (int t = 0; t < computations; ++t)
        for (int k = 0; k < config.rollouts_per_computation; ++k) tree.sample(rng);
    return {tree.best_action(), 0, computations, false};
}

std::vector<double> voi_scores(const PartialSearchTree& pst, const Belief& belief) {
    if (pst.depth() != 1) throw std::invalid_argument("VOI scores need a PST of height 1");
    std::vector<double> values(pst.num_leaves());
    for (std::size_t l = 0; l < values.size(); ++l) values[l] = voc_prime_static(pst, belief, l);
    return values;
}

PolicyRun voi_based_run(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    check_root(mdp, root);
    const int computations = computation_budget(config);
    std::optional<PartialSearchTree> pst;
    try {
        pst = build_pst(mdp, root, 1);
    } catch (const NoLeavesError&) {
        return {exact_lookahead_action(mdp, root, 1), 0, 0, true};
    }
    Belief belief = init_belief(
        Prior::isotropic(pst->num_leaves(), config.prior_mean, config.prior_variance, config.noise_variance), *pst);
    SuccessorSampler sampler(mdp, config.uct_exploration);

    PolicyRun run;
    for (int t = 0; t < computations; ++t) {
        const std::vector<double> values = voi_scores(*pst, belief);
        const std::size_t best = argmax_lowest(values);
        if (values[best] < config.epsilon) {
            run.stopped_early = true;
            break;
        }
        const Leaf& leaf = pst->leaves()[best];
        belief.update(best, sampler.sample_leaf(leaf.state, leaf.action, config.rollouts_per_computation, rng));
        ++run.computations;
    }
    run.action = argmax_lowest(static_root_values(*pst, belief));
    return run;
}

PolicyRun run_policy(const Mdp& mdp, StateId root, const PolicyConfig& config, Rng& rng) {
    CountingMdp counted(mdp);
    PolicyRun run;
    switch (config.kind) {
        case PolicyKind::voc_phi:
        case PolicyKind::voc_psi: run = voc_greedy_run(counted, root, config, rng); break;
        case PolicyKind::uct: run = uct_run(counted, root, config, rng); break;
        case PolicyKind::bayes_uct: run = bayes_uct_run(counted, root, config, rng); break;
        case PolicyKind::thompson: run = thompson_dng_run(counted, root, config, rng); break;
        case PolicyKind::voi: run = voi_based_run(counted, root, config, rng); break;
    }
    run.simulations = counted.simulations();
    if (run.simulations > static_cast<std::size_t>(config.budget))
        throw std::logic_error("policy used more simulations than its budget");
    return run;
}

}  // namespace vocmcts
