#pragma once

#include <iosfwd>
#include <vector>

#include "autrl/core.hpp"
#include "autrl/dfa.hpp"

namespace autrl {

struct QConfig {
    double alpha = 0.1;
    double epsilon = 0.01;
    double epsilon_decay = 1.0;  // per-epoch factor, applied by the outer loop
    double gamma = 0.99;
    int episodes_per_epoch = 100;
    bool offline_replay = false;  // learn from the epoch's episodes after sampling them
};

// Dense action-value table over the product of environment and automaton
// states.
struct QTable {
    int num_env_states = 0;
    int num_dfa_states = 0;
    int num_actions = 0;
    std::vector<double> values;

    size_t index(ProductState s, ActionId a) const {
        return static_cast<size_t>(product_index(s, num_dfa_states)) * num_actions + a;
    }
    double value(ProductState s, ActionId a) const { return values[index(s, a)]; }
};

// Zero-initialized table shaped for the environment/automaton pair.
QTable q_reset(const NmrdpEnv& env, const Dfa& dfa);

// One-step rule: Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') * [not done] - Q(s,a)).
void q_update(QTable& q, ProductState s, ActionId a, int reward, ProductState next,
              bool done, const QConfig& cfg);

// With probability epsilon a uniform action, otherwise the argmax with ties
// broken uniformly at random.
ActionId epsilon_greedy(const QTable& q, ProductState s, double epsilon, Rng& rng);

struct EpochStats {
    double mean_reward = 0.0;
    int episodes = 0;
    long long env_steps = 0;
    std::vector<Trace> traces;
};

// Runs cfg.episodes_per_epoch episodes, advancing the automaton alongside the
// environment and updating Q on the product transitions. The same episodes
// double as the sampled traces for consistency checking.
EpochStats markov_learn(NmrdpEnv& env, const Dfa& dfa, QTable& q, const QConfig& cfg,
                        Rng& rng);

// Debug dump: one "q <env_state> <dfa_state> <action> <value>" line per entry.
void save_qtable(const QTable& q, std::ostream& out);

}  // namespace autrl
