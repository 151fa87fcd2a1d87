#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "autrl/core.hpp"
#include "autrl/dfa.hpp"
#include "autrl/dfa_learner.hpp"
#include "autrl/qlearn.hpp"

namespace autrl {

// Sampled-trace store for automaton retraining. Positive traces carry all of
// the goal signal and are never evicted; negatives live in a bounded FIFO.
class TraceStore {
public:
    explicit TraceStore(size_t negative_capacity = 2000)
        : negative_capacity_(negative_capacity) {}

    void add(Trace trace);
    void add_all(std::vector<Trace>&& traces);

    const std::vector<Trace>& positives() const { return positives_; }
    const std::deque<Trace>& negatives() const { return negatives_; }
    size_t size() const { return positives_.size() + negatives_.size(); }

    std::vector<Trace> all() const;

private:
    size_t negative_capacity_;
    std::vector<Trace> positives_;
    std::deque<Trace> negatives_;
};

enum class ReplacementMode { strict_consistency, weak_performance };

struct AutRlConfig {
    LearnerConfig learner;
    QConfig q;
    int epochs = 1000;
    long long max_env_steps = 0;  // stop once cumulative training steps reach this; 0 = off
    ReplacementMode mode = ReplacementMode::strict_consistency;
    double weak_threshold = 0.5;  // rho: retrain when epoch reward < rho * best window
    int weak_window = 5;          // window length (epochs) for the weak-performance test
    double weak_floor = 0.1;      // windows below this mean are noise, not a baseline
    size_t negative_capacity = 2000;
    bool decay_epsilon = false;  // per-epoch epsilon decay (stochastic environments)
    double epsilon_floor = 0.001;
    int eval_episodes = 100;  // greedy evaluation after each epoch; 0 disables
};

struct EpochRecord {
    int epoch = 0;
    long long env_steps = 0;  // cumulative training steps, evaluation excluded
    double mean_train_reward = 0.0;
    double greedy_reward = 0.0;
    int dfa_num_states = 1;  // automaton in effect at the end of the epoch
    bool retrained = false;
    double epsilon = 0.0;  // exploration rate used during the epoch
};

struct AutRlResult {
    Dfa dfa;
    QTable qtable;
    std::vector<EpochRecord> records;
    long long eval_env_steps = 0;  // evaluation steps, tracked separately
};

// True iff any of the traces is misclassified by the automaton.
bool is_inconsistent(const Dfa& dfa, const std::vector<Trace>& traces);

// Greedy rollout (epsilon = 0, ties broken by the rng) without learning;
// returns the mean episode reward.
double greedy_eval(NmrdpEnv& env, const Dfa& dfa, const QTable& q, int episodes,
                   Rng& rng, long long* steps_out = nullptr);

// The full outer loop: interleaves sampling/Q-learning epochs with automaton
// replacement, in strict-consistency or weak-performance mode.
AutRlResult run_autrl(NmrdpEnv& env, const AutRlConfig& cfg, uint64_t seed);

// Run-history CSV: epoch,env_steps,mean_train_reward,greedy_reward,dfa_states,
// retrained,epsilon.
void save_records_csv(const std::vector<EpochRecord>& records, std::ostream& out);

}  // namespace autrl
