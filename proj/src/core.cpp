#include "autrl/core.hpp"

#include <stdexcept>
#include <string>

namespace autrl {

Symbol encode_symbol(EnvStateId state, ActionId action, const NmrdpEnv& env) {
    if (state < 0 || state >= env.num_states())
        throw std::out_of_range("encode_symbol: state id " + std::to_string(state) +
                                " out of range");
    if (action < 0 || action >= env.num_actions())
        throw std::out_of_range("encode_symbol: action id " + std::to_string(action) +
                                " out of range");
    return state * env.num_actions() + action;
}

std::pair<EnvStateId, ActionId> decode_symbol(Symbol sym, const NmrdpEnv& env) {
    if (sym < 0 || sym >= env.alphabet_size())
        throw std::out_of_range("decode_symbol: symbol " + std::to_string(sym) +
                                " out of range");
    return {sym / env.num_actions(), sym % env.num_actions()};
}

PolicyFn uniform_random_policy(int num_actions) {
    if (num_actions < 1)
        throw std::invalid_argument("uniform_random_policy: need at least one action");
    return [num_actions](EnvStateId, Rng& rng) -> ActionId {
        return static_cast<ActionId>(rng.uniform_int(num_actions));
    };
}

Trace collect_trace(NmrdpEnv& env, const PolicyFn& policy, Rng& rng) {
    Trace trace;
    trace.symbols.reserve(env.horizon());
    EnvStateId state = env.reset(rng);
    int reward_seen = 0;
    while (!env.episode_done()) {
        const ActionId action = policy(state, rng);
        const StepOutcome out = env.step(action, rng);
        trace.symbols.push_back(encode_symbol(state, action, env));
        reward_seen |= out.reward;
        state = out.next_state;
    }
    trace.label = reward_seen;
    return trace;
}

}  // namespace autrl
