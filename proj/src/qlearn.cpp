#include "autrl/qlearn.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace autrl {

namespace {

void check_product_state(const QTable& q, ProductState s) {
    if (s.env_state < 0 || s.env_state >= q.num_env_states || s.dfa_state < 0 ||
        s.dfa_state >= q.num_dfa_states)
        throw std::out_of_range("product state out of range");
}

void check_dims(const NmrdpEnv& env, const Dfa& dfa, const QTable& q) {
    if (q.num_env_states != env.num_states() || q.num_actions != env.num_actions() ||
        q.num_dfa_states != dfa.num_states)
        throw std::invalid_argument("q-table dimensions do not match environment and dfa");
    if (dfa.alphabet_size != env.alphabet_size())
        throw std::invalid_argument("dfa alphabet does not match environment");
}

double row_max(const QTable& q, ProductState s) {
    const size_t base = q.index(s, 0);
    double best = q.values[base];
    for (int a = 1; a < q.num_actions; ++a) best = std::max(best, q.values[base + a]);
    return best;
}

}  // namespace

QTable q_reset(const NmrdpEnv& env, const Dfa& dfa) {
    if (dfa.alphabet_size != env.alphabet_size())
        throw std::invalid_argument("dfa alphabet does not match environment");
    QTable q;
    q.num_env_states = env.num_states();
    q.num_dfa_states = dfa.num_states;
    q.num_actions = env.num_actions();
    q.values.assign(static_cast<size_t>(q.num_env_states) * q.num_dfa_states *
                        q.num_actions,
                    0.0);
    return q;
}

void q_update(QTable& q, ProductState s, ActionId a, int reward, ProductState next,
              bool done, const QConfig& cfg) {
    check_product_state(q, s);
    check_product_state(q, next);
    if (a < 0 || a >= q.num_actions) throw std::out_of_range("action out of range");
    const double bootstrap = done ? 0.0 : cfg.gamma * row_max(q, next);
    double& cell = q.values[q.index(s, a)];
    cell += cfg.alpha * (reward + bootstrap - cell);
}

ActionId epsilon_greedy(const QTable& q, ProductState s, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw std::invalid_argument("epsilon must be in [0, 1]");
    check_product_state(q, s);
    if (epsilon > 0.0 && rng.bernoulli(epsilon))
        return static_cast<ActionId>(rng.uniform_int(q.num_actions));
    const size_t base = q.index(s, 0);
    double best = q.values[base];
    int ties = 1;
    ActionId pick = 0;
    for (int a = 1; a < q.num_actions; ++a) {
        const double v = q.values[base + a];
        if (v > best) {
            best = v;
            ties = 1;
            pick = a;
        } else if (v == best) {
            ++ties;
        }
    }
    if (ties == 1) return pick;
    // Uniform choice among the tied maxima.
    int nth = static_cast<int>(rng.uniform_int(ties));
    for (int a = 0; a < q.num_actions; ++a) {
        if (q.values[base + a] == best && nth-- == 0) return a;
    }
    return pick;  // unreachable
}

namespace {

struct Transition {
    ProductState s;
    ActionId a;
    int reward;
    ProductState next;
    bool done;
};

}  // namespace

EpochStats markov_learn(NmrdpEnv& env, const Dfa& dfa, QTable& q, const QConfig& cfg,
                        Rng& rng) {
    check_dims(env, dfa, q);
    if (cfg.episodes_per_epoch < 0)
        throw std::invalid_argument("episodes_per_epoch must be non-negative");
    EpochStats stats;
    std::vector<Transition> replay;
    double reward_sum = 0.0;
    for (int episode = 0; episode < cfg.episodes_per_epoch; ++episode) {
        EnvStateId state = env.reset(rng);
        int dfa_state = Dfa::kInitialState;
        Trace trace;
        trace.symbols.reserve(env.horizon());
        int episode_reward = 0;
        while (!env.episode_done()) {
            const ProductState ps{state, dfa_state};
            const ActionId action = epsilon_greedy(q, ps, cfg.epsilon, rng);
            const StepOutcome out = env.step(action, rng);
            const Symbol sym = encode_symbol(state, action, env);
            trace.symbols.push_back(sym);
            const int next_dfa_state = dfa.step_unchecked(dfa_state, sym);
            const ProductState next{out.next_state, next_dfa_state};
            if (cfg.offline_replay)
                replay.push_back({ps, action, out.reward, next, out.done});
            else
                q_update(q, ps, action, out.reward, next, out.done, cfg);
            state = out.next_state;
            dfa_state = next_dfa_state;
            episode_reward += out.reward;
            ++stats.env_steps;
        }
        trace.label = episode_reward > 0 ? 1 : 0;
        reward_sum += episode_reward;
        stats.traces.push_back(std::move(trace));
        ++stats.episodes;
    }
    if (cfg.offline_replay)
        for (const Transition& t : replay) q_update(q, t.s, t.a, t.reward, t.next, t.done, cfg);
    stats.mean_reward = stats.episodes > 0 ? reward_sum / stats.episodes : 0.0;
    return stats;
}

void save_qtable(const QTable& q, std::ostream& out) {
    for (int env_state = 0; env_state < q.num_env_states; ++env_state)
        for (int dfa_state = 0; dfa_state < q.num_dfa_states; ++dfa_state)
            for (int a = 0; a < q.num_actions; ++a)
                out << "q " << env_state << " " << dfa_state << " " << a << " "
                    << q.value({env_state, dfa_state}, a) << "\n";
}

}  // namespace autrl
