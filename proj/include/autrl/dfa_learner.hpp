#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "autrl/dfa.hpp"

namespace autrl {

struct LearnerConfig {
    int max_states = 5;                // state budget for learned automata
    double loop_penalty = 0.01;        // per state with at least one self-loop symbol
    double transition_penalty = 0.01;  // per ordered cross pair (q, q'), q' != q
    int timeout = 250;     // consecutive non-improving proposals that end a restart
    int restarts = 10;
    // Episodes reward only on their final step, so every strict prefix of a
    // sampled trace is itself a history that observably earned 0. When set,
    // each mid-trace visit to an accepting state counts as a misclassified
    // history; this pins down the prefix structure that makes the augmented
    // problem Markovian. Disable for trace sets that are not episode samples.
    bool prefix_closure = true;
    // Symbols per environment state (|A| under the flat state-action
    // encoding). Learned guards are widened to state granularity after the
    // search: actions the data cannot distinguish join their state's guard,
    // so guards read as state predicates instead of memorizing incidental
    // action choices.
    int state_group_size = 1;
    uint64_t rng_seed = 0;  // used by the offline entry point
};

// Tie-break pressure toward small guard sets: charged per transition-table
// entry that leaves its source state. Far below any single-trace error or
// structural penalty, so it only orders otherwise-equal automata. After the
// search, guards are widened back to whole state groups wherever the data
// cannot tell the difference (see LearnerConfig::state_group_size).
inline constexpr double kGuardTieBreak = 1e-4;

// Decomposed search objective. The error term is a weighted count of
// misclassified traces: the rarer label class is upweighted to carry half of
// the total mass (so a handful of positives can outweigh thousands of
// negatives), while no trace ever counts for less than one, keeping the
// structural penalties priced against whole traces.
struct LearnerObjective {
    double error_rate = 0.0;    // class-balanced misclassified fraction
    double error_weight = 0.0;  // weighted misclassified count (term in total)
    double premature_weight = 0.0;  // mid-trace accepting visits (prefix_closure)
    int loop_count = 0;         // states with a self-loop symbol (L)
    int cross_count = 0;        // ordered cross pairs with a symbol (T)
    int cross_groups = 0;       // distinct (source, state group, target) crossings
    int cross_symbols = 0;      // table entries leaving their source state
    double total = 0.0;         // error_weight + premature_weight + penalties
};

LearnerObjective objective(const Dfa& dfa, const std::vector<Trace>& traces,
                           const LearnerConfig& cfg);

// Fits a complete DFA of at most cfg.max_states states to the labeled traces
// by seeded random-restart hill climbing over transition tables and accepting
// flags. Deterministic given (traces, alphabet_size, cfg, rng state).
Dfa aut_learn(const std::vector<Trace>& traces, int alphabet_size,
              const LearnerConfig& cfg, Rng& rng);

// Offline entry point; seeds the search from cfg.rng_seed.
Dfa aut_learn(const std::vector<Trace>& traces, int alphabet_size,
              const LearnerConfig& cfg);

// Returns the candidate minimizing objective().total; ties broken by fewer
// states, then lower cross_count, then first occurrence.
Dfa best_of(const std::vector<Dfa>& dfas, const std::vector<Trace>& traces,
            const LearnerConfig& cfg);

// Trace-set files: header "traces <alphabet_size>", then one
// "<label> <sym_0> <sym_1> ..." line per trace.
void save_traces(const std::vector<Trace>& traces, int alphabet_size, std::ostream& out);
std::pair<std::vector<Trace>, int> load_traces(std::istream& in);
void save_traces_file(const std::vector<Trace>& traces, int alphabet_size,
                      const std::string& path);
std::pair<std::vector<Trace>, int> load_traces_file(const std::string& path);

}  // namespace autrl
