#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "autrl/rng.hpp"

namespace autrl {

using EnvStateId = int;
using ActionId = int;

// Flat id of one (state, action) pair: state * num_actions + action. Symbols
// are the alphabet the reward automata are learned over.
using Symbol = int;

// One sampled episode: its symbol sequence plus the binary reward label.
struct Trace {
    std::vector<Symbol> symbols;
    int label = 0;  // 0 or 1
};

struct StepOutcome {
    EnvStateId next_state = 0;
    int reward = 0;  // 0 or 1; reward 1 ends the episode
    bool done = false;
};

// A finite-horizon environment whose binary reward may depend on the whole
// state-action history, not just the current state. Instances are stateful
// (they track the running episode) and single-threaded; independent instances
// are safe to run in parallel.
class NmrdpEnv {
public:
    virtual ~NmrdpEnv() = default;

    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int horizon() const = 0;
    virtual double gamma() const { return 0.99; }

    // Starts a new episode, clearing all internal history, and returns the
    // spawn state.
    virtual EnvStateId reset(Rng& rng) = 0;

    // Advances the episode one step. Throws std::logic_error if the episode
    // is already finished.
    virtual StepOutcome step(ActionId action, Rng& rng) = 0;

    virtual EnvStateId current_state() const = 0;
    virtual bool episode_done() const = 0;

    // Labels a symbol sequence without touching episode state. Only possible
    // for deterministic dynamics; stochastic environments return nullopt.
    virtual std::optional<int> replay_label(std::span<const Symbol>) const {
        return std::nullopt;
    }

    int alphabet_size() const { return num_states() * num_actions(); }
};

Symbol encode_symbol(EnvStateId state, ActionId action, const NmrdpEnv& env);
std::pair<EnvStateId, ActionId> decode_symbol(Symbol sym, const NmrdpEnv& env);

using PolicyFn = std::function<ActionId(EnvStateId state, Rng& rng)>;

PolicyFn uniform_random_policy(int num_actions);

// Runs one full episode under `policy` and returns its labeled trace.
Trace collect_trace(NmrdpEnv& env, const PolicyFn& policy, Rng& rng);

}  // namespace autrl
