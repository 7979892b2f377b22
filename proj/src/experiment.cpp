#include "vocmcts/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vocmcts/peg_solitaire.hpp"
#include "vocmcts/rng.hpp"

namespace vocmcts {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_metric(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double run_bandit(const BanditTree& tree, const PolicyConfig& config, Rng& rng, std::size_t& simulations) {
    const PolicyRun run = run_policy(tree, BanditTree::kRoot, config, rng);
    simulations += run.simulations;
    return objective_regret(tree, run.action);
}

double run_pegs(PegBoard board, const PolicyConfig& config, Rng& rng, std::size_t& simulations) {
    const PegSolitaire game;
    while (!game.is_terminal(board.bits())) {
        const PolicyRun run = run_policy(game, board.bits(), config, rng);
        simulations += run.simulations;
        board = peg_apply(board, peg_legal_moves(board).at(run.action));
    }
    return peg_outcome(board);
}

struct GridPoint {
    PolicyConfig config;
    std::map<std::string, std::string> assignment;
};

// Cartesian product of one policy's grid, in lexicographic parameter order.
std::vector<GridPoint> expand_grid(const PolicyConfig& base,
                                   const std::map<std::string, std::vector<std::string>>& params) {
    std::vector<GridPoint> out{{base, {}}};
    for (const auto& [name, values] : params) {
        if (values.empty()) throw std::invalid_argument("empty grid for parameter " + name);
        std::vector<GridPoint> next;
        for (const auto& point : out)
            for (const auto& v : values) {
                GridPoint g = point;
                set_parameter(g.config, name, v);
                g.assignment[name] = v;
                next.push_back(std::move(g));
            }
        out = std::move(next);
    }
    return out;
}

}  // namespace

std::string_view to_string(EnvKind env) {
    switch (env) {
        case EnvKind::bandit_correlated: return "bandit-corr";
        case EnvKind::bandit_uncorrelated: return "bandit-uncorr";
        case EnvKind::pegs: return "pegs";
    }
    return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
    for (auto env : {EnvKind::bandit_correlated, EnvKind::bandit_uncorrelated, EnvKind::pegs})
        if (to_string(env) == name) return env;
    throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

PolicyConfig default_policy_config(PolicyKind kind, EnvKind env) {
    PolicyConfig c;
    c.kind = kind;
    if (env == EnvKind::pegs) {
        c.pst_height = 2;
        c.prior_mean = -3.0;
        c.prior_variance = 4.0;
        c.noise_variance = 1.0;
        c.uct_exploration = 2.0;
        return c;
    }
    const bool correlated = env == EnvKind::bandit_correlated;
    c.pst_height = 4;
    c.prior_mean = 0.5;
    c.prior_variance = correlated ? 1.0 : 0.01;
    c.noise_variance = correlated ? 0.1 : 0.01;
    c.uct_exploration = correlated ? 0.5 : 0.1;
    if (correlated && kind == PolicyKind::voc_phi) c.covariance = CovarianceKind::rbf;
    return c;
}

void validate(const ExperimentConfig& config) {
    if (config.policies.empty()) throw std::invalid_argument("no policies given");
    if (config.budgets.empty()) throw std::invalid_argument("no budgets given");
    for (std::size_t i = 0; i < config.budgets.size(); ++i) {
        if (config.budgets[i] < 0) throw std::invalid_argument("budgets must be >= 0");
        if (i > 0 && config.budgets[i] <= config.budgets[i - 1])
            throw std::invalid_argument("budgets must be strictly increasing");
    }
    if (config.seeds < 1) throw std::invalid_argument("seed count must be >= 1");
    if (config.workers < 1) throw std::invalid_argument("worker count must be >= 1");
    for (std::size_t i = 0; i < config.policies.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (config.policies[i].name == config.policies[j].name)
                throw std::invalid_argument("duplicate policy name " + config.policies[i].name);
}

ResultRow run_single(const ExperimentConfig& config, const NamedPolicy& policy, int budget, std::uint64_t seed) {
    const std::uint64_t env_seed = derive_seed(config.master_seed, {label_of("env"), seed});
    Rng rng = make_rng(config.master_seed,
                       {label_of("policy"), seed, label_of(policy.name.c_str()), static_cast<std::uint64_t>(budget)});
    PolicyConfig pc = policy.config;
    pc.budget = budget;

    ResultRow row{policy.name, budget, seed, 0.0, 0};
    switch (config.env) {
        case EnvKind::bandit_correlated:
        case EnvKind::bandit_uncorrelated: {
            const ArmKind kind = config.env == EnvKind::bandit_correlated ? ArmKind::correlated : ArmKind::uncorrelated;
            const BanditTree tree = gen_bandit_tree(kind, env_seed, config.bandit);
            row.metric = run_bandit(tree, pc, rng, row.simulations);
            break;
        }
        case EnvKind::pegs: {
            Rng env_rng(env_seed);
            row.metric = run_pegs(random_peg_board(config.initial_pegs, env_rng), pc, rng, row.simulations);
            break;
        }
    }
    return row;
}

std::vector<CurvePoint> summarize(const std::vector<ResultRow>& rows, const std::vector<NamedPolicy>& policies,
                                  const std::vector<int>& budgets) {
    std::vector<CurvePoint> curve;
    for (const auto& p : policies)
        for (int b : budgets) {
            std::vector<double> xs;
            for (const auto& r : rows)
                if (r.policy == p.name && r.budget == b) xs.push_back(r.metric);
            CurvePoint point{p.name, b, 0.0, 0.0, static_cast<int>(xs.size())};
            if (!xs.empty()) {
                double sum = 0.0;
                for (double x : xs) sum += x;
                point.mean = sum / xs.size();
                if (xs.size() > 1) {
                    double ss = 0.0;
                    for (double x : xs) ss += (x - point.mean) * (x - point.mean);
                    point.se = std::sqrt(ss / (xs.size() - 1.0)) / std::sqrt(static_cast<double>(xs.size()));
                }
            }
            curve.push_back(point);
        }
    return curve;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    const std::size_t n_policies = config.policies.size();
    const std::size_t n_budgets = config.budgets.size();
    const std::size_t tasks = static_cast<std::size_t>(config.seeds) * n_policies;
    std::vector<ResultRow> rows(tasks * n_budgets);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t task = next++; task < tasks; task = next++) {
            const std::size_t seed_index = task / n_policies, p = task % n_policies;
            try {
                for (std::size_t b = 0; b < n_budgets; ++b)
                    rows[task * n_budgets + b] =
                        run_single(config, config.policies[p], config.budgets[b], config.first_seed + seed_index);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks;
            }
        }
    };
    const int workers = std::min<int>(config.workers, static_cast<int>(tasks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (const auto& row : rows)
        if (row.simulations > static_cast<std::size_t>(row.budget) && config.env != EnvKind::pegs)
            throw std::logic_error("simulation audit failed for policy " + row.policy);

    ExperimentResult result{config.env, std::move(rows), {}};
    result.curve = summarize(result.rows, config.policies, config.budgets);
    return result;
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
    out << "env,policy,budget,seed,metric\n";
    const std::string env(to_string(result.env));
    for (const auto& r : result.rows)
        out << env << ',' << r.policy << ',' << r.budget << ',' << r.seed << ',' << format_metric(r.metric) << '\n';
}

void write_summary(std::ostream& out, const ExperimentResult& result) {
    out << "env,policy,budget,seeds,mean,se\n";
    const std::string env(to_string(result.env));
    for (const auto& c : result.curve)
        out << env << ',' << c.policy << ',' << c.budget << ',' << c.seeds << ',' << format_metric(c.mean) << ','
            << format_metric(c.se) << '\n';
}

std::string to_csv(const ExperimentResult& result) {
    std::ostringstream out;
    write_csv(out, result);
    return out.str();
}

ParamGrid parse_grid(std::string_view text) {
    ParamGrid grid;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        const auto dot = body.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw std::invalid_argument("grid line " + std::to_string(line_no) + ": expected <policy>.<param> = values");
        const std::string policy = trim(std::string_view(body).substr(0, dot));
        const std::string param = trim(std::string_view(body).substr(dot + 1, eq - dot - 1));
        std::vector<std::string> values;
        std::istringstream list(body.substr(eq + 1));
        std::string item;
        while (std::getline(list, item, ',')) {
            item = trim(item);
            if (!item.empty()) values.push_back(item);
        }
        if (policy.empty() || param.empty() || values.empty())
            throw std::invalid_argument("grid line " + std::to_string(line_no) + " is incomplete");
        grid[policy][param] = values;
    }
    return grid;
}

std::vector<TuneResult> grid_search(const ExperimentConfig& config, const ParamGrid& grid) {
    validate(config);
    if (grid.empty()) throw std::invalid_argument("empty parameter grid");
    for (const auto& [name, params] : grid) {
        const bool known = std::any_of(config.policies.begin(), config.policies.end(),
                                       [&](const NamedPolicy& p) { return p.name == name; });
        if (!known) throw std::invalid_argument("grid names unknown policy " + name);
    }

    std::vector<std::vector<GridPoint>> points;
    for (const auto& p : config.policies) {
        const auto it = grid.find(p.name);
        points.push_back(it == grid.end() ? std::vector<GridPoint>{{p.config, {}}} : expand_grid(p.config, it->second));
    }
    const std::size_t size = points.front().size();
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i].size() != size)
            throw std::invalid_argument("grid sizes differ (" + config.policies[i].name + " has " +
                                        std::to_string(points[i].size()) + " points, expected " + std::to_string(size) +
                                        "); every policy must get the same number of evaluations");

    // Every grid point becomes its own policy with a distinct name.
    ExperimentConfig flat = config;
    flat.policies.clear();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t k = 0; k < points[i].size(); ++k)
            flat.policies.push_back({config.policies[i].name + "#" + std::to_string(k), points[i][k].config});
    const ExperimentResult result = run_experiment(flat);

    std::vector<TuneResult> out;
    std::size_t flat_index = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        TuneResult tr;
        tr.best.name = config.policies[i].name;
        double best_mean = 0.0;
        for (std::size_t k = 0; k < points[i].size(); ++k, ++flat_index) {
            std::vector<double> per_seed(static_cast<std::size_t>(config.seeds), 0.0);
            for (const auto& row : result.rows)
                if (row.policy == flat.policies[flat_index].name) {
                    per_seed[row.seed - config.first_seed] += row.metric / config.budgets.size();
                    ++tr.evaluations;
                }
            double mean = 0.0, ss = 0.0;
            for (double x : per_seed) mean += x;
            mean /= per_seed.size();
            for (double x : per_seed) ss += (x - mean) * (x - mean);
            const double se = per_seed.size() > 1 ? std::sqrt(ss / (per_seed.size() - 1.0) / per_seed.size()) : 0.0;
            tr.candidates.push_back({points[i][k].config, points[i][k].assignment, mean, se});
            if (k == 0 || mean < best_mean) {
                best_mean = mean;
                tr.best.config = points[i][k].config;
                tr.best_assignment = points[i][k].assignment;
            }
        }
        out.push_back(std::move(tr));
    }
    return out;
}

std::vector<NamedPolicy> apply_tuning(std::vector<NamedPolicy> policies, const std::vector<TuneResult>& tuned) {
    for (auto& p : policies)
        for (const auto& t : tuned)
            if (t.best.name == p.name) p.config = t.best.config;
    return policies;
}

}  // namespace vocmcts
