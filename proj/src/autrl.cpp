#include "autrl/autrl.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace autrl {

void TraceStore::add(Trace trace) {
    if (trace.label == 1) {
        positives_.push_back(std::move(trace));
        return;
    }
    negatives_.push_back(std::move(trace));
    while (negatives_.size() > negative_capacity_) negatives_.pop_front();
}

void TraceStore::add_all(std::vector<Trace>&& traces) {
    for (Trace& trace : traces) add(std::move(trace));
    traces.clear();
}

std::vector<Trace> TraceStore::all() const {
    std::vector<Trace> out;
    out.reserve(size());
    out.insert(out.end(), positives_.begin(), positives_.end());
    out.insert(out.end(), negatives_.begin(), negatives_.end());
    return out;
}

bool is_inconsistent(const Dfa& dfa, const std::vector<Trace>& traces) {
    for (const Trace& trace : traces) {
        const bool accept = dfa_run(dfa, trace.symbols).accept;
        if (accept != (trace.label == 1)) return true;
    }
    return false;
}

double greedy_eval(NmrdpEnv& env, const Dfa& dfa, const QTable& q, int episodes,
                   Rng& rng, long long* steps_out) {
    if (q.num_env_states != env.num_states() || q.num_actions != env.num_actions() ||
        q.num_dfa_states != dfa.num_states || dfa.alphabet_size != env.alphabet_size())
        throw std::invalid_argument("greedy_eval: dimensions do not match");
    if (episodes < 1) throw std::invalid_argument("greedy_eval: need at least one episode");
    double reward_sum = 0.0;
    long long steps = 0;
    for (int episode = 0; episode < episodes; ++episode) {
        EnvStateId state = env.reset(rng);
        int dfa_state = Dfa::kInitialState;
        while (!env.episode_done()) {
            const ActionId action = epsilon_greedy(q, {state, dfa_state}, 0.0, rng);
            const StepOutcome out = env.step(action, rng);
            dfa_state = dfa.step_unchecked(dfa_state, encode_symbol(state, action, env));
            state = out.next_state;
            reward_sum += out.reward;
            ++steps;
        }
    }
    if (steps_out) *steps_out += steps;
    return reward_sum / episodes;
}

namespace {

void check_config(const AutRlConfig& cfg) {
    if (cfg.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
    if (cfg.weak_threshold < 0.0 || cfg.weak_threshold > 1.0)
        throw std::invalid_argument("weak_threshold must be in [0, 1]");
    if (cfg.weak_floor < 0.0 || cfg.weak_floor > 1.0)
        throw std::invalid_argument("weak_floor must be in [0, 1]");
    if (cfg.weak_window < 1) throw std::invalid_argument("weak_window must be >= 1");
    if (cfg.max_env_steps < 0) throw std::invalid_argument("max_env_steps must be >= 0");
}

// Best mean reward over any complete window of `window` consecutive epochs
// since the last automaton replacement. Maintained incrementally: appending
// one epoch adds exactly one new window.
class WindowTracker {
public:
    explicit WindowTracker(int window) : window_(window) {}

    void push(double reward) {
        recent_.push_back(reward);
        if (recent_.size() > static_cast<size_t>(window_)) recent_.pop_front();
        if (recent_.size() == static_cast<size_t>(window_)) {
            double sum = 0.0;
            for (const double r : recent_) sum += r;
            best_ = std::max(best_, sum / window_);
            has_window_ = true;
        }
    }

    void reset() {
        recent_.clear();
        best_ = 0.0;
        has_window_ = false;
    }

    bool has_window() const { return has_window_; }
    double best() const { return best_; }

private:
    int window_;
    std::deque<double> recent_;
    double best_ = 0.0;
    bool has_window_ = false;
};

}  // namespace

AutRlResult run_autrl(NmrdpEnv& env, const AutRlConfig& cfg, uint64_t seed) {
    check_config(cfg);
    Rng train_rng(Rng::derive(seed, 0));
    Rng eval_rng(Rng::derive(seed, 1));
    Rng learn_rng(Rng::derive(seed, 2));

    AutRlResult result;
    result.dfa = dfa_empty(env.alphabet_size());
    result.qtable = q_reset(env, result.dfa);
    TraceStore store(cfg.negative_capacity);
    WindowTracker window(cfg.weak_window);
    double epsilon = cfg.q.epsilon;
    long long steps = 0;
    bool learned_once = false;
    size_t positives_at_retrain = 1;
    int epochs_since_retrain = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.max_env_steps > 0 && steps >= cfg.max_env_steps) break;
        QConfig qc = cfg.q;
        qc.epsilon = epsilon;
        EpochStats stats = markov_learn(env, result.dfa, result.qtable, qc, train_rng);
        steps += stats.env_steps;

        const double greedy =
            cfg.eval_episodes > 0
                ? greedy_eval(env, result.dfa, result.qtable, cfg.eval_episodes, eval_rng,
                              &result.eval_env_steps)
                : 0.0;

        bool retrain = false;
        if (cfg.mode == ReplacementMode::strict_consistency) {
            retrain = is_inconsistent(result.dfa, stats.traces);
        } else {
            // Weak-performance replacement. Three triggers, all requiring
            // positive evidence: the very first automaton once a positive
            // trace exists; a collapse below rho times the best window since
            // the last replacement (windows under weak_floor are treated as
            // noise, not a baseline); and, while performance stays below the
            // floor, a refresh whenever the positive evidence has doubled.
            // The refresh backs off geometrically so Q-learning gets
            // progressively longer uninterrupted stretches.
            const bool has_positive =
                !store.positives().empty() ||
                std::any_of(stats.traces.begin(), stats.traces.end(),
                            [](const Trace& t) { return t.label == 1; });
            if (has_positive) {
                const bool good_baseline =
                    window.has_window() && window.best() >= cfg.weak_floor;
                if (!learned_once) {
                    retrain = true;
                } else if (good_baseline &&
                           stats.mean_reward < cfg.weak_threshold * window.best()) {
                    retrain = true;
                } else if (!good_baseline && epochs_since_retrain >= cfg.weak_window) {
                    const size_t positives_now =
                        store.positives().size() +
                        static_cast<size_t>(
                            std::count_if(stats.traces.begin(), stats.traces.end(),
                                          [](const Trace& t) { return t.label == 1; }));
                    if (positives_now >= 2 * positives_at_retrain) retrain = true;
                }
            }
        }

        const double epoch_mean = stats.mean_reward;
        store.add_all(std::move(stats.traces));

        if (retrain) {
            LearnerConfig learner_cfg = cfg.learner;
            learner_cfg.state_group_size = env.num_actions();
            result.dfa = aut_learn(store.all(), env.alphabet_size(), learner_cfg, learn_rng);
            result.qtable = q_reset(env, result.dfa);
            window.reset();
            learned_once = true;
            positives_at_retrain = std::max<size_t>(1, store.positives().size());
            epochs_since_retrain = 0;
        } else {
            window.push(epoch_mean);
            ++epochs_since_retrain;
        }

        result.records.push_back({epoch, steps, epoch_mean, greedy, result.dfa.num_states,
                                  retrain, epsilon});

        if (cfg.decay_epsilon)
            epsilon = std::max(cfg.epsilon_floor, epsilon * cfg.q.epsilon_decay);
    }
    return result;
}

void save_records_csv(const std::vector<EpochRecord>& records, std::ostream& out) {
    out << "epoch,env_steps,mean_train_reward,greedy_reward,dfa_states,retrained,epsilon\n";
    char buffer[160];
    for (const EpochRecord& r : records) {
        std::snprintf(buffer, sizeof(buffer), "%d,%lld,%.6f,%.6f,%d,%d,%.6f\n", r.epoch,
                      r.env_steps, r.mean_train_reward, r.greedy_reward, r.dfa_num_states,
                      r.retrained ? 1 : 0, r.epsilon);
        out << buffer;
    }
}

}  // namespace autrl
