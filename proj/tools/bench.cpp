// bench: runs policy x budget x seed grids on the benchmark environments
// and writes per-run CSV rows plus a mean/SE summary.
//
//   bench run  --env bandit-corr --policies voc-phi,uct --budgets 16,32,64,128 --seeds 500 --out runs.csv
//   bench tune --env pegs --policies uct --grid grid.txt --budgets 16 --seeds 20
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vocmcts/experiment.hpp"

using namespace vocmcts;

namespace {

struct Options {
    std::string env = "bandit-corr";
    std::vector<std::string> policies{"voc-phi", "uct"};
    std::vector<int> budgets{16, 32, 64, 128};
    int seeds = 500;
    std::uint64_t first_seed = 0;
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::string out = "runs.csv";
    std::string summary;
    std::string config_file;
    std::string grid_file;
    int pegs = 9;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig build_config(const Options& o) {
    ExperimentConfig config;
    config.env = parse_env_kind(o.env);
    config.budgets = o.budgets;
    config.seeds = o.seeds;
    config.first_seed = o.first_seed;
    config.master_seed = o.master_seed;
    config.workers = o.workers;
    config.initial_pegs = o.pegs;
    for (const auto& name : o.policies)
        config.policies.push_back({name, default_policy_config(parse_policy_kind(name), config.env)});
    if (!o.config_file.empty()) {
        // A single-valued grid is a plain "<policy>.<param> = value" config file.
        for (const auto& [policy, params] : parse_grid(read_file(o.config_file)))
            for (auto& p : config.policies)
                if (p.name == policy)
                    for (const auto& [param, values] : params) {
                        if (values.size() != 1) throw std::invalid_argument("config values must be single: " + param);
                        set_parameter(p.config, param, values.front());
                    }
    }
    return config;
}

void write_outputs(const Options& o, const ExperimentResult& result) {
    std::ofstream csv(o.out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + o.out);
    write_csv(csv, result);
    const std::string summary_path = o.summary.empty() ? o.out + ".summary.csv" : o.summary;
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) throw std::runtime_error("cannot write " + summary_path);
    write_summary(summary, result);
    write_summary(std::cout, result);
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--env", o.env, "bandit-corr | bandit-uncorr | pegs");
    cmd->add_option("--policies", o.policies, "voc-phi, voc-psi, uct, bayes-uct, thompson, voi")->delimiter(',');
    cmd->add_option("--budgets", o.budgets, "strictly increasing simulation budgets")->delimiter(',');
    cmd->add_option("--seeds", o.seeds, "number of environment seeds");
    cmd->add_option("--first-seed", o.first_seed, "index of the first seed");
    cmd->add_option("--master-seed", o.master_seed, "master RNG seed");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--config", o.config_file, "file of '<policy>.<param> = value' lines");
    cmd->add_option("--pegs", o.pegs, "initial pegs for solitaire");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Value-of-computation MCTS benchmark"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "run an experiment grid");
    add_common(run, o);
    run->add_option("--out", o.out, "CSV output path");
    run->add_option("--summary", o.summary, "summary CSV path (default <out>.summary.csv)");

    auto* tune = app.add_subcommand("tune", "grid-search policy parameters on tuning seeds");
    add_common(tune, o);
    tune->add_option("--grid", o.grid_file, "file of '<policy>.<param> = v1, v2' lines")->required();
    tune->add_option("--out", o.out, "write the chosen parameters here as a config file");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig config = build_config(o);
        if (run->parsed()) {
            write_outputs(o, run_experiment(config));
            return 0;
        }
        const auto tuned = grid_search(config, parse_grid(read_file(o.grid_file)));
        std::ostringstream chosen;
        for (const auto& t : tuned) {
            std::cout << t.best.name << " (" << t.evaluations << " runs)\n";
            for (const auto& c : t.candidates)
                std::cout << "  " << describe(c.config) << "  mean=" << c.mean << " se=" << c.se << '\n';
            std::cout << "  best: " << describe(t.best.config) << '\n';
            for (const auto& [param, value] : t.best_assignment)
                chosen << t.best.name << '.' << param << " = " << value << '\n';
        }
        if (tune->count("--out") > 0) {
            std::ofstream out(o.out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + o.out);
            out << chosen.str();
        }
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
