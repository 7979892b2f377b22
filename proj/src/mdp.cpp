#include "vocmcts/mdp.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace vocmcts {

Transition sample_transition(const Mdp& mdp, StateId s, std::size_t a, Rng& rng) {
    const auto successors = mdp.transitions(s, a);
    if (successors.empty()) throw std::logic_error("action without successors");
    if (successors.size() == 1) return successors.front();
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (const auto& t : successors) {
        if (u < t.probability) return t;
        u -= t.probability;
    }
    return successors.back();
}

TabularMdp::TabularMdp(double discount) : discount_(discount) {
    if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in [0, 1]");
}

void TabularMdp::add_state(StateId s) { states_[s]; }

void TabularMdp::add_terminal(StateId s, double value, double noise_variance) {
    auto& r = states_[s];
    if (!r.actions.empty()) throw std::invalid_argument("terminal state cannot have actions");
    r.terminal = true;
    r.value = value;
    r.noise_variance = noise_variance;
}

void TabularMdp::add_action(StateId s, std::vector<Transition> successors) {
    auto& r = states_[s];
    if (r.terminal) throw std::invalid_argument("cannot add an action to a terminal state");
    double total = 0.0;
    std::vector<Transition> kept;
    for (const auto& t : successors) {
        if (t.probability < 0.0) throw std::invalid_argument("negative transition probability");
        total += t.probability;
        if (t.probability > 0.0) kept.push_back(t);
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("transition probabilities sum to " + std::to_string(total));
    r.actions.push_back(std::move(kept));
}

const TabularMdp::StateRecord& TabularMdp::record(StateId s) const {
    auto it = states_.find(s);
    if (it == states_.end()) throw std::out_of_range("unknown state " + std::to_string(s));
    return it->second;
}

std::size_t TabularMdp::num_actions(StateId s) const { return record(s).actions.size(); }

std::vector<Transition> TabularMdp::transitions(StateId s, std::size_t a) const {
    return record(s).actions.at(a);
}

bool TabularMdp::is_terminal(StateId s) const { return record(s).terminal; }

double TabularMdp::terminal_value(StateId s) const { return record(s).value; }

double TabularMdp::sample_terminal_value(StateId s, Rng& rng) const {
    const auto& r = record(s);
    if (r.noise_variance <= 0.0) return r.value;
    return r.value + std::sqrt(r.noise_variance) * std::normal_distribution<double>(0.0, 1.0)(rng);
}

double QTable::q(StateId s, std::size_t a) const { return values_.at(s).q.at(a); }

double QTable::v(StateId s) const { return values_.at(s).value; }

std::size_t QTable::num_actions(StateId s) const { return values_.at(s).q.size(); }

QTable exact_qstar(const Mdp& mdp, StateId root, int horizon) {
    QTable table;
    std::set<StateId> on_path;
    const double gamma = mdp.discount();

    // Recursive lambda with explicit depth budget; memoized on the state.
    auto solve = [&](auto&& self, StateId s, int remaining) -> double {
        if (auto it = table.values_.find(s); it != table.values_.end()) return it->second.value;
        if (mdp.is_terminal(s)) {
            auto& e = table.values_[s];
            e.value = mdp.terminal_value(s);
            return e.value;
        }
        if (remaining <= 0) throw std::invalid_argument("horizon does not cover the MDP depth");
        if (!on_path.insert(s).second) throw std::invalid_argument("cyclic MDP: only tree/DAG MDPs are supported");
        const std::size_t actions = mdp.num_actions(s);
        if (actions == 0) throw std::invalid_argument("non-terminal state without actions");
        QTable::Entry entry;
        entry.value = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < actions; ++a) {
            double q = 0.0;
            for (const auto& t : mdp.transitions(s, a)) q += t.probability * (t.reward + gamma * self(self, t.next, remaining - 1));
            entry.q.push_back(q);
            entry.value = std::max(entry.value, q);
        }
        on_path.erase(s);
        table.values_[s] = std::move(entry);
        return table.values_[s].value;
    };
    solve(solve, root, horizon);
    return table;
}

}  // namespace vocmcts
