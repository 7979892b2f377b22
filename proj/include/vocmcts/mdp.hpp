#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace vocmcts {

using StateId = std::uint64_t;
using Rng = std::mt19937_64;

struct Transition {
    StateId next;
    double probability;
    double reward;  // expected immediate reward R^a_{ss'}
};

/// Finite MDP with known dynamics.
///
/// Terminal states carry a value which is paid out when the state is
/// reached; `sample_terminal_value` is the simulator's noisy view of it.
/// Every rollout ends in exactly one terminal sample, so counting those
/// calls counts environment simulations.
class Mdp {
public:
    virtual ~Mdp() = default;

    virtual std::size_t num_actions(StateId s) const = 0;
    /// Successor distribution of (s, a). Zero-probability branches are omitted.
    virtual std::vector<Transition> transitions(StateId s, std::size_t a) const = 0;
    virtual bool is_terminal(StateId s) const = 0;
    virtual double terminal_value(StateId s) const = 0;
    virtual double sample_terminal_value(StateId s, Rng& rng) const { (void)rng; return terminal_value(s); }
    virtual double discount() const { return 1.0; }
};

/// Draws s' ~ P(.|s, a). Returns the chosen transition.
Transition sample_transition(const Mdp& mdp, StateId s, std::size_t a, Rng& rng);

/// Explicit table-backed MDP. Handy for tests and small hand-built instances.
class TabularMdp final : public Mdp {
public:
    explicit TabularMdp(double discount = 1.0);

    /// Adds a non-terminal state. Actions are appended with add_action.
    void add_state(StateId s);
    void add_terminal(StateId s, double value, double noise_variance = 0.0);
    /// Throws if probabilities do not sum to 1 within 1e-12.
    void add_action(StateId s, std::vector<Transition> successors);

    std::size_t num_actions(StateId s) const override;
    std::vector<Transition> transitions(StateId s, std::size_t a) const override;
    bool is_terminal(StateId s) const override;
    double terminal_value(StateId s) const override;
    double sample_terminal_value(StateId s, Rng& rng) const override;
    double discount() const override { return discount_; }

private:
    struct StateRecord {
        bool terminal = false;
        double value = 0.0;
        double noise_variance = 0.0;
        std::vector<std::vector<Transition>> actions;
    };
    const StateRecord& record(StateId s) const;

    double discount_;
    std::map<StateId, StateRecord> states_;
};

/// Wraps an MDP and counts terminal samples (i.e. simulations).
class CountingMdp final : public Mdp {
public:
    explicit CountingMdp(const Mdp& inner) : inner_(inner) {}

    std::size_t num_actions(StateId s) const override { return inner_.num_actions(s); }
    std::vector<Transition> transitions(StateId s, std::size_t a) const override { return inner_.transitions(s, a); }
    bool is_terminal(StateId s) const override { return inner_.is_terminal(s); }
    double terminal_value(StateId s) const override { return inner_.terminal_value(s); }
    double sample_terminal_value(StateId s, Rng& rng) const override {
        ++simulations_;
        return inner_.sample_terminal_value(s, rng);
    }
    double discount() const override { return inner_.discount(); }

    std::size_t simulations() const { return simulations_; }

private:
    const Mdp& inner_;
    mutable std::size_t simulations_ = 0;
};

/// Optimal action values over a finite-horizon (tree/DAG) MDP.
class QTable {
public:
    double q(StateId s, std::size_t a) const;
    /// V*(s): terminal value or max_a Q*(s, a).
    double v(StateId s) const;
    bool contains(StateId s) const { return values_.count(s) != 0; }
    std::size_t num_actions(StateId s) const;

private:
    friend QTable exact_qstar(const Mdp&, StateId, int);
    struct Entry {
        double value = 0.0;
        std::vector<double> q;
    };
    std::map<StateId, Entry> values_;
};

/// Backward induction from `root`. Every path must terminate within
/// `horizon` steps and the reachable graph must be acyclic.
QTable exact_qstar(const Mdp& mdp, StateId root, int horizon);

}  // namespace vocmcts
