#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "autrl/core.hpp"

namespace autrl {

enum class EnvName { bandit, hallway, grid, grid_stochastic };

// CLI-facing names: "bandit", "hallway", "grid", "grid-stochastic".
EnvName parse_env_name(const std::string& name);
std::string to_string(EnvName name);

std::unique_ptr<NmrdpEnv> make_env(EnvName name);
std::unique_ptr<NmrdpEnv> make_env(const std::string& name);

// Maximum achievable expected undiscounted episode reward, computed by
// exhaustive dynamic programming over (state, phase, step).
double optimal_return(EnvName name);

// Single-state, two-action environment rewarded only for one exact
// length-6 action sequence: left, right, right, left, right, left.
class BanditEnv : public NmrdpEnv {
public:
    static constexpr int kHorizon = 6;
    static constexpr std::array<ActionId, 6> kGoalActions = {0, 1, 1, 0, 1, 0};

    int num_states() const override { return 1; }
    int num_actions() const override { return 2; }
    int horizon() const override { return kHorizon; }

    EnvStateId reset(Rng& rng) override;
    StepOutcome step(ActionId action, Rng& rng) override;
    EnvStateId current_state() const override { return 0; }
    bool episode_done() const override { return done_; }
    std::optional<int> replay_label(std::span<const Symbol> symbols) const override;

private:
    int steps_ = 0;
    bool prefix_ok_ = true;
    bool done_ = true;
};

// 1x10 corridor; the agent spawns on the left half and is rewarded for
// reaching the right-most square and then the left-most square.
class HallwayEnv : public NmrdpEnv {
public:
    static constexpr int kLength = 10;
    static constexpr int kHorizon = 30;

    int num_states() const override { return kLength; }
    int num_actions() const override { return 2; }  // 0 = left, 1 = right
    int horizon() const override { return kHorizon; }

    EnvStateId reset(Rng& rng) override;
    StepOutcome step(ActionId action, Rng& rng) override;
    EnvStateId current_state() const override { return pos_; }
    bool episode_done() const override { return done_; }
    std::optional<int> replay_label(std::span<const Symbol> symbols) const override;

    // Evaluation hook: pins the spawn square instead of sampling it.
    void set_fixed_spawn(std::optional<int> square);

private:
    int pos_ = 0;
    bool seen_rightmost_ = false;
    int steps_ = 0;
    bool done_ = true;
    std::optional<int> fixed_spawn_;
};

// 5x5 grid; the agent starts at (0,0) and is rewarded for visiting (4,0)
// and then reaching the opposite corner (0,4). The stochastic variant
// replaces the chosen action with a uniformly random one 10% of the time and
// withholds the reward on 10% of successful episodes.
class GridworldEnv : public NmrdpEnv {
public:
    static constexpr int kSide = 5;
    static constexpr int kHorizon = 20;
    static constexpr double kActionNoise = 0.1;
    static constexpr double kRewardRetention = 0.9;

    explicit GridworldEnv(bool stochastic) : stochastic_(stochastic) {}

    int num_states() const override { return kSide * kSide; }
    int num_actions() const override { return 4; }  // up, down, left, right
    int horizon() const override { return kHorizon; }

    EnvStateId reset(Rng& rng) override;
    StepOutcome step(ActionId action, Rng& rng) override;
    EnvStateId current_state() const override { return cell_id(x_, y_); }
    bool episode_done() const override { return done_; }
    std::optional<int> replay_label(std::span<const Symbol> symbols) const override;

    bool stochastic() const { return stochastic_; }

    static int cell_id(int x, int y) { return y * kSide + x; }

private:
    bool stochastic_;
    int x_ = 0, y_ = 0;
    bool seen_first_corner_ = false;
    int steps_ = 0;
    bool done_ = true;
};

}  // namespace autrl
