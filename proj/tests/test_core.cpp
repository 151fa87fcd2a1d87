#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "autrl/core.hpp"
#include "autrl/envs.hpp"
#include "oracles.hpp"

using namespace autrl;

namespace {

// Plays back a fixed action sequence, one action per step.
PolicyFn scripted_policy(std::vector<ActionId> actions) {
    auto next = std::make_shared<size_t>(0);
    return [actions = std::move(actions), next](EnvStateId, Rng&) {
        return actions[(*next)++ % actions.size()];
    };
}

}  // namespace

TEST_CASE("symbol encoding is the flat state-action index") {
    const auto hallway = make_env(EnvName::hallway);
    CHECK(encode_symbol(0, 1, *hallway) == 1);
    CHECK(encode_symbol(3, 0, *hallway) == 6);
    CHECK(hallway->alphabet_size() == 20);
}

TEST_CASE("symbol encoding round-trips over the whole grid alphabet") {
    const auto grid = make_env(EnvName::grid);
    CHECK(grid->alphabet_size() == 100);
    for (EnvStateId s = 0; s < grid->num_states(); ++s)
        for (ActionId a = 0; a < grid->num_actions(); ++a) {
            const Symbol sym = encode_symbol(s, a, *grid);
            const auto [s2, a2] = decode_symbol(sym, *grid);
            CHECK(s2 == s);
            CHECK(a2 == a);
        }
}

TEST_CASE("symbol encoding rejects out-of-range ids") {
    const auto bandit = make_env(EnvName::bandit);
    CHECK_THROWS_AS(encode_symbol(1, 0, *bandit), std::out_of_range);
    CHECK_THROWS_AS(encode_symbol(0, 2, *bandit), std::out_of_range);
    CHECK_THROWS_AS(encode_symbol(0, -1, *bandit), std::out_of_range);
    CHECK_THROWS_AS(decode_symbol(2, *bandit), std::out_of_range);
}

TEST_CASE("bandit rewards exactly the goal action sequence") {
    auto env = make_env(EnvName::bandit);
    Rng rng(7);

    const Trace hit = collect_trace(*env, scripted_policy({0, 1, 1, 0, 1, 0}), rng);
    CHECK(hit.label == 1);
    CHECK(hit.symbols.size() == 6);

    const Trace miss = collect_trace(*env, scripted_policy({0, 0, 0, 0, 0, 0}), rng);
    CHECK(miss.label == 0);
    CHECK(miss.symbols.size() == 6);
}

TEST_CASE("stepping a finished episode is rejected") {
    BanditEnv env;
    Rng rng(1);
    env.reset(rng);
    for (int t = 0; t < 6; ++t) env.step(0, rng);
    CHECK(env.episode_done());
    CHECK_THROWS_AS(env.step(0, rng), std::logic_error);
}

TEST_CASE("hallway rewards rightmost-then-leftmost and nothing else") {
    HallwayEnv env;
    Rng rng(3);
    env.set_fixed_spawn(4);
    CHECK(env.reset(rng) == 4);
    for (int i = 0; i < 5; ++i) {
        const StepOutcome out = env.step(1, rng);
        CHECK(out.reward == 0);
        CHECK_FALSE(out.done);
    }
    CHECK(env.current_state() == 9);
    for (int i = 0; i < 8; ++i) {
        const StepOutcome out = env.step(0, rng);
        CHECK(out.reward == 0);
        CHECK_FALSE(out.done);
    }
    const StepOutcome last = env.step(0, rng);
    CHECK(last.next_state == 0);
    CHECK(last.reward == 1);
    CHECK(last.done);

    // Spawning at 0 without having seen square 9 earns nothing.
    env.set_fixed_spawn(0);
    env.reset(rng);
    for (int i = 0; i < 30; ++i) {
        const StepOutcome out = env.step(0, rng);
        CHECK(out.reward == 0);
    }
    CHECK(env.episode_done());
}

TEST_CASE("episode mechanics: horizon bound, single terminal reward") {
    Rng rng(11);
    for (const EnvName name : {EnvName::bandit, EnvName::hallway, EnvName::grid,
                               EnvName::grid_stochastic}) {
        auto env = make_env(name);
        for (int episode = 0; episode < 300; ++episode) {
            EnvStateId state = env->reset(rng);
            int steps = 0;
            int rewards = 0;
            while (!env->episode_done()) {
                const ActionId a = static_cast<ActionId>(rng.uniform_int(env->num_actions()));
                const StepOutcome out = env->step(a, rng);
                ++steps;
                if (out.reward == 1) {
                    ++rewards;
                    CHECK(out.done);  // goal achievement terminates the episode
                }
                state = out.next_state;
                CHECK(state >= 0);
                CHECK(state < env->num_states());
            }
            CHECK(steps <= env->horizon());
            CHECK(rewards <= 1);
        }
    }
}

TEST_CASE("deterministic replay reproduces sampled labels") {
    Rng rng(23);
    for (const EnvName name : {EnvName::bandit, EnvName::hallway, EnvName::grid}) {
        auto env = make_env(name);
        const PolicyFn policy = uniform_random_policy(env->num_actions());
        for (int episode = 0; episode < 500; ++episode) {
            const Trace trace = collect_trace(*env, policy, rng);
            const auto replayed = env->replay_label(trace.symbols);
            REQUIRE(replayed.has_value());
            CHECK(*replayed == trace.label);
        }
    }
    CHECK_FALSE(make_env(EnvName::grid_stochastic)
                    ->replay_label(std::vector<Symbol>{})
                    .has_value());
}

TEST_CASE("collect_trace is deterministic in the seed") {
    for (const EnvName name : {EnvName::bandit, EnvName::hallway, EnvName::grid_stochastic}) {
        auto env_a = make_env(name);
        auto env_b = make_env(name);
        Rng rng_a(99), rng_b(99);
        const PolicyFn policy_a = uniform_random_policy(env_a->num_actions());
        const PolicyFn policy_b = uniform_random_policy(env_b->num_actions());
        for (int episode = 0; episode < 50; ++episode) {
            const Trace a = collect_trace(*env_a, policy_a, rng_a);
            const Trace b = collect_trace(*env_b, policy_b, rng_b);
            CHECK(a.label == b.label);
            CHECK(a.symbols == b.symbols);
        }
    }
}

TEST_CASE("hallway random-policy success rate matches the exact chain value") {
    const double expected = oracles::uniform_policy_success_prob(EnvName::hallway);
    auto env = make_env(EnvName::hallway);
    Rng rng(2024);
    const PolicyFn policy = uniform_random_policy(2);
    const int episodes = 10000;
    int positives = 0;
    for (int i = 0; i < episodes; ++i)
        positives += collect_trace(*env, policy, rng).label;
    const double empirical = positives / static_cast<double>(episodes);
    const double tolerance = 5.0 * std::sqrt(expected * (1.0 - expected) / episodes);
    CHECK(std::fabs(empirical - expected) <= tolerance);
}
