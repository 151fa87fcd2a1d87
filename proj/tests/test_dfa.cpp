#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "autrl/dfa.hpp"
#include "autrl/envs.hpp"
#include "oracles.hpp"

using namespace autrl;

namespace {

Dfa random_dfa(int num_states, int alphabet_size, Rng& rng) {
    Dfa dfa;
    dfa.num_states = num_states;
    dfa.alphabet_size = alphabet_size;
    dfa.delta.resize(static_cast<size_t>(num_states) * alphabet_size);
    for (auto& cell : dfa.delta) cell = static_cast<int>(rng.uniform_int(num_states));
    dfa.accepting.resize(num_states);
    for (auto& flag : dfa.accepting) flag = rng.bernoulli(0.5) ? 1 : 0;
    return dfa;
}

}  // namespace

TEST_CASE("the empty automaton rejects everything from its single state") {
    const Dfa dfa = dfa_empty(20);
    CHECK(dfa.num_states == 1);
    const std::vector<Symbol> word{3, 7, 19, 0};
    const DfaRunResult run = dfa_run(dfa, word);
    CHECK(run.final_state == 0);
    CHECK_FALSE(run.accept);
    const DfaRunResult empty_run = dfa_run(dfa, std::vector<Symbol>{});
    CHECK(empty_run.final_state == 0);
    CHECK_FALSE(empty_run.accept);
}

TEST_CASE("two-phase hallway automaton steps as drawn") {
    const Dfa dfa = oracles::hallway_visit_then_return_dfa();
    // Any symbol at the rightmost square advances phase one.
    CHECK(dfa_step(dfa, 0, 18) == 1);
    CHECK(dfa_step(dfa, 0, 19) == 1);
    CHECK(dfa_step(dfa, 0, 5) == 0);
    // The accepting state absorbs every symbol.
    for (Symbol sym = 0; sym < 20; ++sym) CHECK(dfa_step(dfa, 2, sym) == 2);
}

TEST_CASE("two-phase hallway automaton accepts a rightmost-then-leftmost trace") {
    HallwayEnv env;
    Rng rng(13);
    const auto episode = oracles::run_hallway_script(env, 0.0, rng);
    REQUIRE(episode.trace.label == 1);
    const Dfa dfa = oracles::hallway_visit_then_return_dfa();
    CHECK(dfa_run(dfa, episode.trace.symbols).accept);
}

TEST_CASE("two-phase hallway automaton is consistent with sampled traces") {
    const Dfa dfa = oracles::hallway_visit_then_return_dfa();
    HallwayEnv env;
    Rng rng(29);
    std::vector<Trace> traces;
    const PolicyFn policy = uniform_random_policy(2);
    for (int i = 0; i < 4000; ++i) traces.push_back(collect_trace(env, policy, rng));
    for (int i = 0; i < 200; ++i)
        traces.push_back(oracles::run_hallway_script(env, 0.25, rng).trace);
    CHECK(dfa_classification_error(dfa, traces) == 0.0);
}

TEST_CASE("bandit chain automaton agrees with all 64 enumerated sequences") {
    const Dfa dfa = oracles::bandit_chain_dfa();
    const std::vector<Trace> traces = oracles::enumerate_bandit_traces();
    int agreements = 0;
    for (const Trace& trace : traces)
        if (dfa_run(dfa, trace.symbols).accept == (trace.label == 1)) ++agreements;
    CHECK(agreements == 64);
    CHECK(dfa_classification_error(dfa, traces) == 0.0);
}

TEST_CASE("classification error counts disagreements") {
    const Dfa empty = dfa_empty(20);
    CHECK_THROWS_AS(dfa_classification_error(empty, {}), std::invalid_argument);

    std::vector<Trace> negatives(50, Trace{{1, 2, 3}, 0});
    CHECK(dfa_classification_error(empty, negatives) == 0.0);

    std::vector<Trace> mixed(88, Trace{{1, 2, 3}, 0});
    for (int i = 0; i < 12; ++i) mixed.push_back(Trace{{4, 5}, 1});
    CHECK(dfa_classification_error(empty, mixed) == doctest::Approx(0.12));
}

TEST_CASE("interleaved stepping matches a full run") {
    Rng rng(71);
    for (int round = 0; round < 50; ++round) {
        const int n = 1 + static_cast<int>(rng.uniform_int(6));
        const int alphabet = 2 + static_cast<int>(rng.uniform_int(30));
        const Dfa dfa = random_dfa(n, alphabet, rng);
        std::vector<Symbol> word(rng.uniform_int(40));
        for (auto& sym : word) sym = static_cast<Symbol>(rng.uniform_int(alphabet));
        int q = Dfa::kInitialState;
        for (const Symbol sym : word) q = dfa_step(dfa, q, sym);
        const DfaRunResult run = dfa_run(dfa, word);
        CHECK(run.final_state == q);
        CHECK(run.accept == (dfa.accepting[q] != 0));
    }
}

TEST_CASE("validation rejects malformed automata") {
    Dfa broken = dfa_empty(4);
    broken.delta.pop_back();
    CHECK_THROWS_AS(dfa_validate(broken), std::invalid_argument);

    Dfa bad_target = dfa_empty(4);
    bad_target.delta[2] = 5;
    CHECK_THROWS_AS(dfa_validate(bad_target), std::invalid_argument);

    const Dfa ok = dfa_empty(4);
    CHECK_THROWS_AS(dfa_step(ok, 1, 0), std::out_of_range);
    CHECK_THROWS_AS(dfa_step(ok, 0, 4), std::out_of_range);
}

TEST_CASE("dot export of the empty automaton is a single o/w self-loop") {
    const std::string dot = dfa_to_dot(dfa_empty(20), plain_symbol_namer());
    CHECK(dot.find("q0 [shape=circle];") != std::string::npos);
    CHECK(dot.find("q0 -> q0 [label=\"o/w\"];") != std::string::npos);
    CHECK(dot.find("doublecircle") == std::string::npos);
    CHECK(dot.find("q1") == std::string::npos);
}

TEST_CASE("dot export groups guards and marks accepting states") {
    const Dfa dfa = oracles::hallway_visit_then_return_dfa();
    const std::string dot = dfa_to_dot(dfa, state_action_namer(2));
    CHECK(dot.find("q2 [shape=doublecircle];") != std::string::npos);
    CHECK(dot.find("q0 -> q1 [label=\"s9a0, s9a1\"];") != std::string::npos);
    CHECK(dot.find("q1 -> q2 [label=\"s1a0\"];") != std::string::npos);
    CHECK(dot.find("q0 -> q0 [label=\"o/w\"];") != std::string::npos);
    CHECK(dot.find("q1 -> q1 [label=\"o/w\"];") != std::string::npos);
    CHECK(dot.find("q2 -> q2 [label=\"o/w\"];") != std::string::npos);
}

TEST_CASE("dot export parses back to the same automaton") {
    Rng rng(1234);
    for (int round = 0; round < 30; ++round) {
        const int n = 1 + static_cast<int>(rng.uniform_int(5));
        const int alphabet = 2 + static_cast<int>(rng.uniform_int(12));
        const Dfa dfa = random_dfa(n, alphabet, rng);
        const std::string dot = dfa_to_dot(dfa, plain_symbol_namer());
        std::map<std::string, Symbol> symbol_of;
        for (Symbol sym = 0; sym < alphabet; ++sym) symbol_of[std::to_string(sym)] = sym;
        const Dfa parsed = oracles::parse_dot_dfa(dot, alphabet, symbol_of);
        CHECK(parsed.num_states == dfa.num_states);
        CHECK(parsed.delta == dfa.delta);
        CHECK(parsed.accepting == dfa.accepting);
    }
}

TEST_CASE("text serialization round-trips") {
    Rng rng(555);
    for (int round = 0; round < 30; ++round) {
        const int n = 1 + static_cast<int>(rng.uniform_int(8));
        const int alphabet = 1 + static_cast<int>(rng.uniform_int(25));
        const Dfa dfa = random_dfa(n, alphabet, rng);
        std::stringstream buffer;
        save_dfa(dfa, buffer);
        const Dfa loaded = load_dfa(buffer);
        CHECK(loaded.num_states == dfa.num_states);
        CHECK(loaded.alphabet_size == dfa.alphabet_size);
        CHECK(loaded.delta == dfa.delta);
        CHECK(loaded.accepting == dfa.accepting);
    }
}

TEST_CASE("loading malformed dfa files fails with a message") {
    std::stringstream missing_header("state 0 1\n");
    CHECK_THROWS_AS(load_dfa(missing_header), std::runtime_error);
    std::stringstream truncated("dfa 2 2\nstate 0 0\nstate 1 1\nt 0 0 1\n");
    CHECK_THROWS_AS(load_dfa(truncated), std::runtime_error);
    std::stringstream duplicate("dfa 1 2\nstate 0 0\nt 0 0 0\nt 0 0 0\n");
    CHECK_THROWS_AS(load_dfa(duplicate), std::runtime_error);
}

TEST_CASE("product state indexing is the flat pair index") {
    CHECK(product_index({0, 0}, 3) == 0);
    CHECK(product_index({2, 1}, 3) == 7);
    CHECK(product_index({9, 2}, 3) == 29);
}
