#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "autrl/core.hpp"

namespace autrl {

// Complete deterministic finite automaton over the symbol alphabet. State 0
// is always initial and delta is total; values are immutable once built and
// safe to share across threads for evaluation.
struct Dfa {
    int num_states = 1;
    int alphabet_size = 1;
    std::vector<int> delta;       // delta[q * alphabet_size + sym]
    std::vector<char> accepting;  // one flag per state

    static constexpr int kInitialState = 0;

    int step_unchecked(int q, Symbol sym) const {
        return delta[q * alphabet_size + sym];
    }
};

// The one-state rejecting automaton; augmenting with it is the identity.
Dfa dfa_empty(int alphabet_size);

// Throws std::invalid_argument if the transition table is not total or any
// target is out of range.
void dfa_validate(const Dfa& dfa);

int dfa_step(const Dfa& dfa, int q, Symbol sym);

struct DfaRunResult {
    int final_state = 0;
    bool accept = false;
};
DfaRunResult dfa_run(const Dfa& dfa, std::span<const Symbol> symbols);

// Drops states unreachable from the initial state, preserving the language.
// Surviving states keep their relative order.
Dfa dfa_prune_unreachable(const Dfa& dfa);

// Fraction of traces whose acceptance disagrees with their label; zero
// exactly when the automaton is consistent with the set. Rejects empty sets.
double dfa_classification_error(const Dfa& dfa, const std::vector<Trace>& traces);

using SymbolNamer = std::function<std::string(Symbol)>;

SymbolNamer plain_symbol_namer();
SymbolNamer state_action_namer(int num_actions);

// Graphviz text. Per source state the most common target is drawn once as a
// default edge labeled "o/w"; remaining targets list their symbol guards.
std::string dfa_to_dot(const Dfa& dfa, const SymbolNamer& namer);

// Line format: "dfa <num_states> <alphabet_size>", then "state <id> <0|1>"
// per state, then "t <q> <sym> <q'>" per transition.
void save_dfa(const Dfa& dfa, std::ostream& out);
Dfa load_dfa(std::istream& in);
void save_dfa_file(const Dfa& dfa, const std::string& path);
Dfa load_dfa_file(const std::string& path);

// Environment state paired with the automaton state it is augmented by.
struct ProductState {
    EnvStateId env_state = 0;
    int dfa_state = 0;
};

inline int product_index(ProductState s, int num_dfa_states) {
    return s.env_state * num_dfa_states + s.dfa_state;
}

}  // namespace autrl
