#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vocmcts/bandit_tree.hpp"
#include "vocmcts/policies.hpp"

namespace vocmcts {

enum class EnvKind { bandit_correlated, bandit_uncorrelated, pegs };

std::string_view to_string(EnvKind env);
/// Accepts bandit-corr, bandit-uncorr, pegs.
EnvKind parse_env_kind(std::string_view name);

struct NamedPolicy {
    std::string name;  // CSV label; also selects the policy's RNG stream
    PolicyConfig config;
};

/// Environment-specific starting configuration of a policy.
PolicyConfig default_policy_config(PolicyKind kind, EnvKind env);

struct ExperimentConfig {
    EnvKind env = EnvKind::bandit_correlated;
    std::vector<NamedPolicy> policies;
    std::vector<int> budgets;  // strictly increasing
    int seeds = 1;
    /// Seed indices are first_seed, ..., first_seed + seeds - 1.
    std::uint64_t first_seed = 0;
    std::uint64_t master_seed = 0;
    int workers = 1;
    BanditTreeOptions bandit;
    int initial_pegs = 9;
};

/// One (seed, policy, budget) run. For bandit trees the metric is the
/// objective simple regret of the chosen root action; for peg solitaire it
/// is the number of pegs left after playing a full game with the budget
/// spent anew before every move.
struct ResultRow {
    std::string policy;
    int budget = 0;
    std::uint64_t seed = 0;
    double metric = 0.0;
    std::size_t simulations = 0;  // total over the run (all moves for pegs)
};

struct CurvePoint {
    std::string policy;
    int budget = 0;
    double mean = 0.0;
    double se = 0.0;  // sample sd / sqrt(seeds)
    int seeds = 0;
};

struct ExperimentResult {
    EnvKind env;
    std::vector<ResultRow> rows;    // ordered by seed, policy, budget
    std::vector<CurvePoint> curve;  // ordered by policy, budget
};

/// Throws on an empty policy list, non-increasing budgets or seeds < 1.
void validate(const ExperimentConfig& config);

/// Runs every (seed, policy, budget) combination. Each seed index draws its
/// environment from derive_seed(master, {"env", seed}) and each run draws
/// its policy stream from derive_seed(master, {"policy", seed, name, budget}),
/// so the rows do not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Metric of one run, exposed for tests and the tuner.
ResultRow run_single(const ExperimentConfig& config, const NamedPolicy& policy, int budget, std::uint64_t seed);

std::vector<CurvePoint> summarize(const std::vector<ResultRow>& rows, const std::vector<NamedPolicy>& policies,
                                  const std::vector<int>& budgets);

/// CSV with header env,policy,budget,seed,metric (LF line endings).
void write_csv(std::ostream& out, const ExperimentResult& result);
/// CSV with header env,policy,budget,seeds,mean,se.
void write_summary(std::ostream& out, const ExperimentResult& result);
std::string to_csv(const ExperimentResult& result);

/// Per-policy parameter grid: policy name -> parameter -> candidate values.
using ParamGrid = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

/// Parses lines of the form "<policy>.<param> = v1, v2, ...". Blank lines
/// and lines starting with '#' are ignored.
ParamGrid parse_grid(std::string_view text);

struct TuneCandidate {
    PolicyConfig config;
    std::map<std::string, std::string> assignment;  // grid parameter -> chosen text
    double mean = 0.0;
    double se = 0.0;
};

struct TuneResult {
    NamedPolicy best;
    std::map<std::string, std::string> best_assignment;
    std::vector<TuneCandidate> candidates;
    int evaluations = 0;  // runs spent on this policy
};

/// Grid search over each policy's cartesian grid. Every grid point is
/// scored by its mean metric over `config.budgets` on the tuning seeds
/// [config.first_seed, config.first_seed + config.seeds); ties go to the
/// earlier point. Every policy must get the same number of evaluations
/// (grid size * seeds * budgets), otherwise this throws. An empty grid throws.
std::vector<TuneResult> grid_search(const ExperimentConfig& config, const ParamGrid& grid);

/// Applies the winners of grid_search to a policy list (matched by name).
std::vector<NamedPolicy> apply_tuning(std::vector<NamedPolicy> policies, const std::vector<TuneResult>& tuned);

}  // namespace vocmcts
