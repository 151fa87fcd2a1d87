#include "autrl/envs.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace autrl {

EnvName parse_env_name(const std::string& name) {
    if (name == "bandit") return EnvName::bandit;
    if (name == "hallway") return EnvName::hallway;
    if (name == "grid") return EnvName::grid;
    if (name == "grid-stochastic") return EnvName::grid_stochastic;
    throw std::invalid_argument("unknown environment '" + name +
                                "' (expected bandit, hallway, grid or grid-stochastic)");
}

std::string to_string(EnvName name) {
    switch (name) {
        case EnvName::bandit: return "bandit";
        case EnvName::hallway: return "hallway";
        case EnvName::grid: return "grid";
        case EnvName::grid_stochastic: return "grid-stochastic";
    }
    throw std::invalid_argument("invalid environment enum value");
}

std::unique_ptr<NmrdpEnv> make_env(EnvName name) {
    switch (name) {
        case EnvName::bandit: return std::make_unique<BanditEnv>();
        case EnvName::hallway: return std::make_unique<HallwayEnv>();
        case EnvName::grid: return std::make_unique<GridworldEnv>(false);
        case EnvName::grid_stochastic: return std::make_unique<GridworldEnv>(true);
    }
    throw std::invalid_argument("invalid environment enum value");
}

std::unique_ptr<NmrdpEnv> make_env(const std::string& name) {
    return make_env(parse_env_name(name));
}

namespace {

void check_not_done(bool done) {
    if (done) throw std::logic_error("step called on a finished episode; reset first");
}

void check_action(ActionId action, int num_actions) {
    if (action < 0 || action >= num_actions)
        throw std::out_of_range("action id " + std::to_string(action) + " out of range");
}

}  // namespace

// ---------------------------------------------------------------- BanditEnv

EnvStateId BanditEnv::reset(Rng&) {
    steps_ = 0;
    prefix_ok_ = true;
    done_ = false;
    return 0;
}

StepOutcome BanditEnv::step(ActionId action, Rng&) {
    check_not_done(done_);
    check_action(action, num_actions());
    prefix_ok_ = prefix_ok_ && action == kGoalActions[steps_];
    ++steps_;
    const int reward = (prefix_ok_ && steps_ == kHorizon) ? 1 : 0;
    done_ = reward == 1 || steps_ == kHorizon;
    return {0, reward, done_};
}

std::optional<int> BanditEnv::replay_label(std::span<const Symbol> symbols) const {
    if (symbols.size() != static_cast<size_t>(kHorizon)) return 0;
    for (int i = 0; i < kHorizon; ++i) {
        const ActionId action = symbols[i] % num_actions();
        if (action != kGoalActions[i]) return 0;
    }
    return 1;
}

// --------------------------------------------------------------- HallwayEnv

void HallwayEnv::set_fixed_spawn(std::optional<int> square) {
    if (square && (*square < 0 || *square >= kLength))
        throw std::out_of_range("fixed spawn square out of range");
    fixed_spawn_ = square;
}

EnvStateId HallwayEnv::reset(Rng& rng) {
    pos_ = fixed_spawn_ ? *fixed_spawn_ : static_cast<int>(rng.uniform_int(kLength / 2));
    seen_rightmost_ = false;
    steps_ = 0;
    done_ = false;
    return pos_;
}

StepOutcome HallwayEnv::step(ActionId action, Rng&) {
    check_not_done(done_);
    check_action(action, num_actions());
    pos_ = std::clamp(pos_ + (action == 1 ? 1 : -1), 0, kLength - 1);
    if (pos_ == kLength - 1) seen_rightmost_ = true;
    ++steps_;
    const int reward = (seen_rightmost_ && pos_ == 0) ? 1 : 0;
    done_ = reward == 1 || steps_ == kHorizon;
    return {pos_, reward, done_};
}

std::optional<int> HallwayEnv::replay_label(std::span<const Symbol> symbols) const {
    if (symbols.empty()) return 0;
    int pos = symbols.front() / num_actions();
    bool seen_rightmost = false;
    for (const Symbol sym : symbols) {
        const ActionId action = sym % num_actions();
        pos = std::clamp(pos + (action == 1 ? 1 : -1), 0, kLength - 1);
        if (pos == kLength - 1) seen_rightmost = true;
        if (seen_rightmost && pos == 0) return 1;
    }
    return 0;
}

// ------------------------------------------------------------- GridworldEnv

EnvStateId GridworldEnv::reset(Rng&) {
    x_ = 0;
    y_ = 0;
    seen_first_corner_ = false;
    steps_ = 0;
    done_ = false;
    return cell_id(x_, y_);
}

namespace {

// Actions: 0 = up (y+1), 1 = down (y-1), 2 = left (x-1), 3 = right (x+1),
// clamped at the walls.
void apply_move(int& x, int& y, ActionId action) {
    switch (action) {
        case 0: y = std::min(y + 1, GridworldEnv::kSide - 1); break;
        case 1: y = std::max(y - 1, 0); break;
        case 2: x = std::max(x - 1, 0); break;
        case 3: x = std::min(x + 1, GridworldEnv::kSide - 1); break;
        default: break;
    }
}

}  // namespace

StepOutcome GridworldEnv::step(ActionId action, Rng& rng) {
    check_not_done(done_);
    check_action(action, num_actions());
    ActionId executed = action;
    if (stochastic_ && rng.bernoulli(kActionNoise))
        executed = static_cast<ActionId>(rng.uniform_int(4));
    apply_move(x_, y_, executed);
    if (x_ == kSide - 1 && y_ == 0) seen_first_corner_ = true;
    ++steps_;
    const bool goal_complete = seen_first_corner_ && x_ == 0 && y_ == kSide - 1;
    int reward = 0;
    if (goal_complete) reward = (!stochastic_ || rng.bernoulli(kRewardRetention)) ? 1 : 0;
    // A withheld reward still ends the episode: the goal history occurred.
    done_ = goal_complete || steps_ == kHorizon;
    return {cell_id(x_, y_), reward, done_};
}

std::optional<int> GridworldEnv::replay_label(std::span<const Symbol> symbols) const {
    if (stochastic_) return std::nullopt;
    if (symbols.empty()) return 0;
    int x = (symbols.front() / num_actions()) % kSide;
    int y = (symbols.front() / num_actions()) / kSide;
    bool seen_first_corner = false;
    for (const Symbol sym : symbols) {
        apply_move(x, y, sym % num_actions());
        if (x == kSide - 1 && y == 0) seen_first_corner = true;
        if (seen_first_corner && x == 0 && y == kSide - 1) return 1;
    }
    return 0;
}

// ------------------------------------------------------------ exact returns

namespace {

double bandit_optimal_return() {
    // Value over (matched prefix length, step); a broken prefix is worth 0.
    std::vector<double> value(BanditEnv::kHorizon + 1, 0.0);
    for (int t = BanditEnv::kHorizon - 1; t >= 0; --t) {
        std::vector<double> next(BanditEnv::kHorizon + 1, 0.0);
        for (int p = 0; p <= t; ++p) {
            if (p != t) { next[p] = 0.0; continue; }  // prefix broken earlier
            next[p] = (p + 1 == BanditEnv::kHorizon) ? 1.0 : value[p + 1];
        }
        value = next;
    }
    return value[0];
}

double hallway_optimal_return() {
    constexpr int n = HallwayEnv::kLength;
    constexpr int horizon = HallwayEnv::kHorizon;
    // value[pos][seen] at step t, swept backwards from the horizon.
    std::vector<std::array<double, 2>> value(n, {0.0, 0.0});
    for (int t = horizon - 1; t >= 0; --t) {
        std::vector<std::array<double, 2>> current(n, {0.0, 0.0});
        for (int pos = 0; pos < n; ++pos) {
            for (int seen = 0; seen < 2; ++seen) {
                double best = 0.0;
                for (ActionId a = 0; a < 2; ++a) {
                    const int next_pos = std::clamp(pos + (a == 1 ? 1 : -1), 0, n - 1);
                    const int next_seen = (seen || next_pos == n - 1) ? 1 : 0;
                    const double v = (next_seen && next_pos == 0)
                                         ? 1.0
                                         : value[next_pos][next_seen];
                    best = std::max(best, v);
                }
                current[pos][seen] = best;
            }
        }
        value = current;
    }
    double total = 0.0;
    for (int spawn = 0; spawn < n / 2; ++spawn) total += value[spawn][0];
    return total / (n / 2);
}

double grid_optimal_return(bool stochastic) {
    constexpr int side = GridworldEnv::kSide;
    constexpr int horizon = GridworldEnv::kHorizon;
    const double retention = stochastic ? GridworldEnv::kRewardRetention : 1.0;
    auto idx = [](int x, int y, int seen) { return (seen * side + y) * side + x; };
    std::vector<double> value(2 * side * side, 0.0);
    for (int t = horizon - 1; t >= 0; --t) {
        std::vector<double> current(2 * side * side, 0.0);
        for (int x = 0; x < side; ++x) {
            for (int y = 0; y < side; ++y) {
                for (int seen = 0; seen < 2; ++seen) {
                    double best = 0.0;
                    for (ActionId a = 0; a < 4; ++a) {
                        double v = 0.0;
                        for (ActionId executed = 0; executed < 4; ++executed) {
                            double p;
                            if (stochastic) {
                                p = (executed == a ? 1.0 - GridworldEnv::kActionNoise : 0.0) +
                                    GridworldEnv::kActionNoise / 4.0;
                            } else {
                                p = executed == a ? 1.0 : 0.0;
                            }
                            if (p == 0.0) continue;
                            int nx = x, ny = y;
                            apply_move(nx, ny, executed);
                            const int next_seen =
                                (seen || (nx == side - 1 && ny == 0)) ? 1 : 0;
                            const bool complete = next_seen && nx == 0 && ny == side - 1;
                            v += p * (complete ? retention : value[idx(nx, ny, next_seen)]);
                        }
                        best = std::max(best, v);
                    }
                    current[idx(x, y, seen)] = best;
                }
            }
        }
        value = current;
    }
    return value[idx(0, 0, 0)];
}

}  // namespace

double optimal_return(EnvName name) {
    switch (name) {
        case EnvName::bandit: return bandit_optimal_return();
        case EnvName::hallway: return hallway_optimal_return();
        case EnvName::grid: return grid_optimal_return(false);
        case EnvName::grid_stochastic: return grid_optimal_return(true);
    }
    throw std::invalid_argument("invalid environment enum value");
}

}  // namespace autrl
