#include "vocmcts/bandit_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "vocmcts/belief.hpp"

namespace vocmcts {

BanditTree::BanditTree(int depth, double desired_probability, std::vector<double> arm_means, double noise_variance)
    : depth_(depth), p_(desired_probability), arm_means_(std::move(arm_means)), noise_variance_(noise_variance) {
    if (depth < 1 || depth > 30) throw std::invalid_argument("bandit-tree depth must lie in [1, 30]");
    if (!(p_ > 0.5 && p_ <= 1.0)) throw std::invalid_argument("desired-transition probability must lie in (0.5, 1]");
    if (arm_means_.size() != (std::size_t{1} << depth)) throw std::invalid_argument("bandit-tree needs 2^depth arms");
    if (noise_variance_ < 0.0) throw std::invalid_argument("negative noise variance");
    const QTable q = exact_qstar(*this, kRoot, depth_);
    root_q_ = {q.q(kRoot, 0), q.q(kRoot, 1)};
}

std::size_t BanditTree::num_actions(StateId s) const { return is_terminal(s) ? 0 : 2; }

std::vector<Transition> BanditTree::transitions(StateId s, std::size_t a) const {
    if (is_terminal(s) || a > 1) throw std::out_of_range("invalid bandit-tree state-action");
    const double left = a == 0 ? p_ : 1.0 - p_;
    std::vector<Transition> out;
    if (left > 0.0) out.push_back({2 * s, left, 0.0});
    if (left < 1.0) out.push_back({2 * s + 1, 1.0 - left, 0.0});
    return out;
}

bool BanditTree::is_terminal(StateId s) const { return s >= (StateId{1} << depth_); }

double BanditTree::terminal_value(StateId s) const {
    if (!is_terminal(s)) throw std::invalid_argument("not an arm");
    return arm_means_.at(s - (StateId{1} << depth_));
}

double BanditTree::sample_terminal_value(StateId s, Rng& rng) const {
    const double mean = terminal_value(s);
    if (noise_variance_ == 0.0) return mean;
    return mean + std::sqrt(noise_variance_) * std::normal_distribution<double>(0.0, 1.0)(rng);
}

std::size_t BanditTree::optimal_root_action() const { return root_q_[1] > root_q_[0] ? 1 : 0; }

std::string BanditTree::serialize() const {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", p_);
    out << "bandit-tree depth=" << depth_ << " p=" << buf;
    std::snprintf(buf, sizeof buf, "%.17g", noise_variance_);
    out << " noise=" << buf << " means=";
    for (std::size_t i = 0; i < arm_means_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", arm_means_[i]);
        out << (i ? "," : "") << buf;
    }
    return out.str();
}

BanditTree BanditTree::deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    in >> tag;
    if (tag != "bandit-tree") throw std::invalid_argument("not a serialized bandit tree");
    int depth = -1;
    double p = 0.0, noise = 0.0;
    std::vector<double> means;
    std::string field;
    while (in >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("malformed field: " + field);
        const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "depth") {
            depth = std::stoi(value);
        } else if (key == "p") {
            p = std::stod(value);
        } else if (key == "noise") {
            noise = std::stod(value);
        } else if (key == "means") {
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) means.push_back(std::stod(item));
        } else {
            throw std::invalid_argument("unknown field: " + key);
        }
    }
    return BanditTree(depth, p, std::move(means), noise);
}

BanditTree gen_bandit_tree(ArmKind kind, std::uint64_t seed, const BanditTreeOptions& options) {
    if (options.depth < 1) throw std::invalid_argument("bandit-tree depth must be >= 1");
    Rng rng(seed);
    const std::size_t arms = std::size_t{1} << options.depth;
    std::vector<double> means(arms);
    double noise = options.noise_variance;
    if (kind == ArmKind::correlated) {
        if (noise < 0.0) noise = 0.1;
        const Eigen::MatrixXd factor =
            psd_factor(rbf_covariance(arms, options.rbf_scale, options.rbf_variance), 1e-9);
        Eigen::VectorXd z(static_cast<Eigen::Index>(arms));
        fill_standard_normal(z, rng);
        const Eigen::VectorXd draw = factor * z;
        for (std::size_t i = 0; i < arms; ++i) means[i] = 0.5 + draw[static_cast<Eigen::Index>(i)];
    } else {
        if (noise < 0.0) noise = 0.01;
        std::uniform_real_distribution<double> uniform(0.45, 0.55);
        for (auto& m : means) m = uniform(rng);
    }
    return BanditTree(options.depth, options.desired_probability, std::move(means), noise);
}

double objective_regret(const BanditTree& tree, std::size_t chosen_root_action) {
    const double best = std::max(tree.root_q(0), tree.root_q(1));
    return best - tree.root_q(chosen_root_action);
}

}  // namespace vocmcts
