#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "vocmcts/experiment.hpp"
#include "vocmcts/rng.hpp"

using namespace vocmcts;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.env = EnvKind::bandit_correlated;
    c.bandit.depth = 4;
    PolicyConfig uct;
    uct.kind = PolicyKind::uct;
    PolicyConfig voc;
    voc.kind = PolicyKind::voc_phi;
    voc.pst_height = 2;
    c.policies = {{"uct", uct}, {"voc-phi", voc}};
    c.budgets = {4, 8, 16};
    c.seeds = 10;
    c.master_seed = 2024;
    return c;
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("one row per seed, policy and budget") {
    const ExperimentResult result = run_experiment(small_config());
    CHECK(result.rows.size() == 60);
    const std::string csv = to_csv(result);
    CHECK(csv.rfind("env,policy,budget,seed,metric\n", 0) == 0);
    CHECK(count_lines(csv) == 61);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(result.curve.size() == 6);
    for (const auto& point : result.curve) CHECK(point.seeds == 10);
    for (const auto& row : result.rows) {
        CHECK(row.metric >= 0.0);
        CHECK(row.simulations <= static_cast<std::size_t>(row.budget));
    }
}

TEST_CASE("re-runs with the same master seed are byte-identical") {
    const ExperimentConfig c = small_config();
    CHECK(to_csv(run_experiment(c)) == to_csv(run_experiment(c)));
    ExperimentConfig other = c;
    other.master_seed = 2025;
    CHECK(to_csv(run_experiment(other)) != to_csv(run_experiment(c)));
}

TEST_CASE("worker count does not change the results") {
    ExperimentConfig serial = small_config(), parallel = small_config();
    parallel.workers = 3;
    const ExperimentResult a = run_experiment(serial), b = run_experiment(parallel);
    CHECK(to_csv(a) == to_csv(b));
    std::ostringstream sa, sb;
    write_summary(sa, a);
    write_summary(sb, b);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("summary mean and standard error") {
    const ExperimentResult result = run_experiment(small_config());
    for (const auto& point : result.curve) {
        std::vector<double> xs;
        for (const auto& r : result.rows)
            if (r.policy == point.policy && r.budget == point.budget) xs.push_back(r.metric);
        const auto s = oracle::mean_se(xs);
        CHECK(std::abs(point.mean - s.mean) < 1e-12);
        CHECK(std::abs(point.se - s.se) < 1e-12);
    }
    std::ostringstream out;
    write_summary(out, result);
    CHECK(out.str().rfind("env,policy,budget,seeds,mean,se\n", 0) == 0);
}

TEST_CASE("zero-budget UCT matches the random-choice baseline") {
    ExperimentConfig c;
    c.env = EnvKind::bandit_correlated;
    PolicyConfig uct;
    uct.kind = PolicyKind::uct;
    c.policies = {{"uct", uct}};
    c.budgets = {0};
    c.seeds = 400;
    c.master_seed = 77;
    const ExperimentResult result = run_experiment(c);
    std::vector<double> diff;
    double random_total = 0.0;
    for (const auto& row : result.rows) {
        const BanditTree tree = gen_bandit_tree(ArmKind::correlated, derive_seed(77, {label_of("env"), row.seed}));
        const double random_choice = 0.5 * (objective_regret(tree, 0) + objective_regret(tree, 1));
        random_total += random_choice;
        diff.push_back(row.metric - random_choice);
    }
    const auto s = oracle::mean_se(diff);
    CHECK(std::abs(s.mean) < 3 * s.se);
    CHECK(std::abs(result.curve.front().mean - random_total / 400) < 3 * s.se);
}

TEST_CASE("peg solitaire runs report pegs remaining") {
    ExperimentConfig c;
    c.env = EnvKind::pegs;
    PolicyConfig uct;
    uct.kind = PolicyKind::uct;
    c.policies = {{"uct", uct}};
    c.budgets = {0, 8};
    c.seeds = 5;
    const ExperimentResult result = run_experiment(c);
    for (const auto& row : result.rows) {
        CHECK(row.metric >= 1.0);
        CHECK(row.metric <= 9.0);
        CHECK(row.metric == std::floor(row.metric));
        CHECK(row.simulations <= static_cast<std::size_t>(row.budget) * 8);
    }
}

TEST_CASE("invalid experiments are rejected") {
    ExperimentConfig c = small_config();
    c.budgets = {8, 8};
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    c = small_config();
    c.seeds = 0;
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    c = small_config();
    c.policies.clear();
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    c = small_config();
    c.policies[1].name = "uct";
    CHECK_THROWS_AS(run_experiment(c), std::invalid_argument);
    CHECK_THROWS_AS(parse_env_kind("maze"), std::invalid_argument);
    CHECK(parse_env_kind("bandit-uncorr") == EnvKind::bandit_uncorrelated);
}

TEST_CASE("grid file parsing") {
    const ParamGrid grid = parse_grid(
        "# tuning grid\n"
        "\n"
        "uct.exploration = 0.25, 0.5,1 , 2\n"
        "  voc-phi.prior_variance=0.5\n");
    REQUIRE(grid.size() == 2);
    CHECK(grid.at("uct").at("exploration") == std::vector<std::string>{"0.25", "0.5", "1", "2"});
    CHECK(grid.at("voc-phi").at("prior_variance") == std::vector<std::string>{"0.5"});
    CHECK_THROWS_AS(parse_grid("uct exploration = 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("uct.exploration"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("uct.exploration = "), std::invalid_argument);
}

TEST_CASE("single-point grid returns that point") {
    ExperimentConfig c = small_config();
    c.policies.pop_back();
    c.seeds = 3;
    const auto tuned = grid_search(c, parse_grid("uct.exploration = 0.7"));
    REQUIRE(tuned.size() == 1);
    CHECK(tuned[0].best.config.uct_exploration == 0.7);
    CHECK(tuned[0].best_assignment.at("exploration") == "0.7");
    CHECK(tuned[0].evaluations == 9);
    CHECK_THROWS_AS(grid_search(c, ParamGrid{}), std::invalid_argument);
    CHECK_THROWS_AS(grid_search(c, parse_grid("thompson.prior_mean = 0")), std::invalid_argument);
    CHECK_THROWS_AS(grid_search(c, parse_grid("uct.exploration = fast")), std::invalid_argument);
}

TEST_CASE("UCT exploration pick agrees with a brute-force scan") {
    ExperimentConfig c = small_config();
    c.policies.pop_back();
    c.seeds = 30;
    c.first_seed = 1000000;
    const std::vector<double> values{0.25, 0.5, 1.0, 2.0};
    const auto tuned = grid_search(c, parse_grid("uct.exploration = 0.25, 0.5, 1, 2"));

    double best_mean = 0.0, best_c = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        ExperimentConfig scan = c;
        scan.policies[0].name = "uct#" + std::to_string(k);
        scan.policies[0].config.uct_exploration = values[k];
        const ExperimentResult r = run_experiment(scan);
        double mean = 0.0;
        for (const auto& row : r.rows) mean += row.metric;
        mean /= static_cast<double>(r.rows.size());
        CHECK(std::abs(tuned[0].candidates[k].mean - mean) < 1e-12);
        if (k == 0 || mean < best_mean) {
            best_mean = mean;
            best_c = values[k];
        }
    }
    CHECK(tuned[0].best.config.uct_exploration == best_c);
    CHECK(tuned[0].evaluations == 4 * 30 * 3);
}

TEST_CASE("tuning and evaluation seeds are disjoint") {
    ExperimentConfig tune = small_config();
    tune.policies.pop_back();
    tune.first_seed = 1000000;
    tune.seeds = 4;
    const ExperimentResult tuning_rows = run_experiment(tune);
    const ExperimentResult eval_rows = run_experiment(small_config());
    std::set<std::uint64_t> a, b;
    for (const auto& r : tuning_rows.rows) a.insert(r.seed);
    for (const auto& r : eval_rows.rows) b.insert(r.seed);
    for (auto s : a) CHECK(b.count(s) == 0);
}

TEST_CASE("unequal grids are rejected") {
    ExperimentConfig c = small_config();
    c.seeds = 2;
    CHECK_THROWS_AS(grid_search(c, parse_grid("uct.exploration = 0.5, 1\nvoc-phi.prior_variance = 1\n")),
                    std::invalid_argument);
    const auto tuned =
        grid_search(c, parse_grid("uct.exploration = 0.5, 1\nvoc-phi.prior_variance = 0.5, 1\n"));
    REQUIRE(tuned.size() == 2);
    CHECK(tuned[0].evaluations == tuned[1].evaluations);
    const auto applied = apply_tuning(c.policies, tuned);
    CHECK(applied[0].config.uct_exploration == tuned[0].best.config.uct_exploration);
    CHECK(applied[1].config.prior_variance == tuned[1].best.config.prior_variance);
}
