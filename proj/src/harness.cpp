#include "autrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace autrl {

ExperimentConfig default_experiment_config(const std::string& env_name) {
    const EnvName env = parse_env_name(env_name);
    ExperimentConfig cfg;
    cfg.env_name = env_name;
    cfg.num_runs = 30;
    cfg.base_seed = 1;
    cfg.autrl.q.gamma = 0.99;
    cfg.autrl.q.episodes_per_epoch = 100;
    cfg.autrl.learner.loop_penalty = 0.01;
    cfg.autrl.learner.timeout = 250;
    cfg.autrl.epochs = 1000000;
    switch (env) {
        case EnvName::bandit:
            cfg.autrl.learner.max_states = 14;
            cfg.autrl.learner.transition_penalty = 0.01;
            cfg.autrl.learner.restarts = 20;
            cfg.autrl.q.alpha = 0.1;
            cfg.autrl.q.epsilon = 0.01;
            cfg.autrl.max_env_steps = 300000;
            break;
        case EnvName::hallway:
            cfg.autrl.learner.max_states = 5;
            cfg.autrl.learner.transition_penalty = 0.6;
            cfg.autrl.learner.restarts = 10;
            cfg.autrl.q.alpha = 0.1;
            cfg.autrl.q.epsilon = 0.01;
            cfg.autrl.max_env_steps = 500000;
            break;
        case EnvName::grid:
            cfg.autrl.learner.max_states = 5;
            cfg.autrl.learner.transition_penalty = 0.3;
            cfg.autrl.learner.restarts = 10;
            cfg.autrl.q.alpha = 0.1;
            cfg.autrl.q.epsilon = 0.01;
            cfg.autrl.max_env_steps = 1000000;
            break;
        case EnvName::grid_stochastic:
            cfg.autrl.learner.max_states = 5;
            cfg.autrl.learner.transition_penalty = 0.3;
            cfg.autrl.learner.restarts = 10;
            cfg.autrl.q.alpha = 0.001;
            cfg.autrl.q.epsilon = 0.05;
            cfg.autrl.q.epsilon_decay = 0.99;
            cfg.autrl.decay_epsilon = true;
            cfg.autrl.mode = ReplacementMode::weak_performance;
            cfg.autrl.weak_threshold = 0.5;
            cfg.autrl.weak_window = 5;
            cfg.autrl.max_env_steps = 2000000;
            break;
    }
    return cfg;
}

namespace {

struct ConfigEntry {
    std::string section;  // "" for top level
    std::string key;
    std::string value;
    size_t line = 0;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<ConfigEntry> parse_config_lines(const std::string& path, std::istream& in) {
    std::vector<ConfigEntry> entries;
    std::string section;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "learner" && section != "q" && section != "autrl")
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        ConfigEntry entry;
        entry.section = section;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        entry.line = line_no;
        if (entry.key.empty() || entry.value.empty())
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        entries.push_back(std::move(entry));
    }
    return entries;
}

[[noreturn]] void bad_value(const std::string& path, const ConfigEntry& entry,
                            const std::string& expected) {
    throw ConfigError(path + ":" + std::to_string(entry.line) + ": key '" + entry.key +
                      "' expects " + expected + ", got '" + entry.value + "'");
}

long long parse_int(const std::string& path, const ConfigEntry& entry) {
    try {
        size_t used = 0;
        const long long v = std::stoll(entry.value, &used);
        if (used != entry.value.size()) bad_value(path, entry, "an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(path, entry, "an integer");
    }
}

double parse_double(const std::string& path, const ConfigEntry& entry) {
    try {
        size_t used = 0;
        const double v = std::stod(entry.value, &used);
        if (used != entry.value.size()) bad_value(path, entry, "a number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(path, entry, "a number");
    }
}

bool parse_bool(const std::string& path, const ConfigEntry& entry) {
    if (entry.value == "true" || entry.value == "1") return true;
    if (entry.value == "false" || entry.value == "0") return false;
    bad_value(path, entry, "true or false");
}

void apply_entry(ExperimentConfig& cfg, const std::string& path, const ConfigEntry& e) {
    AutRlConfig& a = cfg.autrl;
    if (e.section.empty()) {
        if (e.key == "env") return;  // consumed up front
        if (e.key == "runs") cfg.num_runs = static_cast<int>(parse_int(path, e));
        else if (e.key == "seed") cfg.base_seed = static_cast<uint64_t>(parse_int(path, e));
        else if (e.key == "out") cfg.out_dir = e.value;
        else if (e.key == "eval_episodes") a.eval_episodes = static_cast<int>(parse_int(path, e));
        else if (e.key == "jobs") cfg.jobs = static_cast<int>(parse_int(path, e));
        else
            throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" +
                              e.key + "'");
    } else if (e.section == "learner") {
        if (e.key == "max_states") a.learner.max_states = static_cast<int>(parse_int(path, e));
        else if (e.key == "loop_penalty") a.learner.loop_penalty = parse_double(path, e);
        else if (e.key == "transition_penalty") a.learner.transition_penalty = parse_double(path, e);
        else if (e.key == "timeout") a.learner.timeout = static_cast<int>(parse_int(path, e));
        else if (e.key == "restarts") a.learner.restarts = static_cast<int>(parse_int(path, e));
        else
            throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" +
                              e.key + "' in section [learner]");
    } else if (e.section == "q") {
        if (e.key == "alpha") a.q.alpha = parse_double(path, e);
        else if (e.key == "epsilon") a.q.epsilon = parse_double(path, e);
        else if (e.key == "epsilon_decay") a.q.epsilon_decay = parse_double(path, e);
        else if (e.key == "gamma") a.q.gamma = parse_double(path, e);
        else if (e.key == "episodes_per_epoch") a.q.episodes_per_epoch = static_cast<int>(parse_int(path, e));
        else if (e.key == "offline_replay") a.q.offline_replay = parse_bool(path, e);
        else
            throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" +
                              e.key + "' in section [q]");
    } else if (e.section == "autrl") {
        if (e.key == "epochs") a.epochs = static_cast<int>(parse_int(path, e));
        else if (e.key == "max_env_steps") a.max_env_steps = parse_int(path, e);
        else if (e.key == "mode") {
            if (e.value == "strict") a.mode = ReplacementMode::strict_consistency;
            else if (e.value == "weak") a.mode = ReplacementMode::weak_performance;
            else bad_value(path, e, "strict or weak");
        } else if (e.key == "weak_threshold") a.weak_threshold = parse_double(path, e);
        else if (e.key == "weak_floor") a.weak_floor = parse_double(path, e);
        else if (e.key == "weak_window") a.weak_window = static_cast<int>(parse_int(path, e));
        else if (e.key == "negative_capacity") a.negative_capacity = static_cast<size_t>(parse_int(path, e));
        else if (e.key == "decay_epsilon") a.decay_epsilon = parse_bool(path, e);
        else if (e.key == "epsilon_floor") a.epsilon_floor = parse_double(path, e);
        else
            throw ConfigError(path + ":" + std::to_string(e.line) + ": unknown key '" +
                              e.key + "' in section [autrl]");
    }
}

void validate_config(const ExperimentConfig& cfg, const std::string& path) {
    if (cfg.num_runs < 1) throw ConfigError(path + ": runs must be >= 1");
    if (cfg.autrl.q.alpha <= 0.0) throw ConfigError(path + ": alpha must be positive");
    if (cfg.autrl.q.epsilon < 0.0 || cfg.autrl.q.epsilon > 1.0)
        throw ConfigError(path + ": epsilon must be in [0, 1]");
    if (cfg.autrl.q.epsilon_decay <= 0.0 || cfg.autrl.q.epsilon_decay > 1.0)
        throw ConfigError(path + ": epsilon_decay must be in (0, 1]");
    if (cfg.autrl.q.gamma < 0.0 || cfg.autrl.q.gamma > 1.0)
        throw ConfigError(path + ": gamma must be in [0, 1]");
    if (cfg.autrl.learner.max_states < 1)
        throw ConfigError(path + ": max_states must be >= 1");
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    const std::vector<ConfigEntry> entries = parse_config_lines(path, in);
    std::string env_name;
    for (const ConfigEntry& e : entries)
        if (e.section.empty() && e.key == "env") env_name = e.value;
    if (env_name.empty())
        throw ConfigError(path + ": missing required key 'env'");
    ExperimentConfig cfg;
    try {
        cfg = default_experiment_config(env_name);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(path + ": " + err.what());
    }
    for (const ConfigEntry& e : entries) apply_entry(cfg, path, e);
    validate_config(cfg, path);
    return cfg;
}

namespace {

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", v);
    return buffer;
}

std::vector<AggregatePoint> aggregate_curve(const std::vector<AutRlResult>& runs) {
    size_t common = runs.empty() ? 0 : runs.front().records.size();
    for (const AutRlResult& run : runs) common = std::min(common, run.records.size());
    std::vector<AggregatePoint> curve;
    curve.reserve(common);
    const double n = static_cast<double>(runs.size());
    for (size_t k = 0; k < common; ++k) {
        AggregatePoint point;
        double mean = 0.0, steps = 0.0;
        for (const AutRlResult& run : runs) {
            mean += run.records[k].greedy_reward;
            steps += static_cast<double>(run.records[k].env_steps);
        }
        mean /= n;
        steps /= n;
        double var = 0.0;
        if (runs.size() > 1) {
            for (const AutRlResult& run : runs) {
                const double d = run.records[k].greedy_reward - mean;
                var += d * d;
            }
            var /= (n - 1.0);
        }
        point.env_steps = steps;
        point.mean = mean;
        point.ci95 = runs.size() > 1 ? 1.96 * std::sqrt(var / n) : 0.0;
        curve.push_back(point);
    }
    return curve;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.out_dir = cfg.out_dir;
    if (const char* override_dir = std::getenv("AUTRL_OUT"))
        if (*override_dir) result.out_dir = override_dir;
    std::filesystem::create_directories(result.out_dir);

    const auto env_probe = make_env(cfg.env_name);
    const SymbolNamer namer = state_action_namer(env_probe->num_actions());

    result.runs.resize(cfg.num_runs);
    std::atomic<int> next_run{0};
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = cfg.jobs > 0 ? cfg.jobs
                                     : static_cast<int>(std::min<unsigned>(hw, cfg.num_runs));
    std::atomic<bool> failed{false};
    std::string failure_message;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const int i = next_run.fetch_add(1);
            if (i >= cfg.num_runs || failed.load()) return;
            try {
                const auto env = make_env(cfg.env_name);
                result.runs[i] = run_autrl(*env, cfg.autrl, cfg.base_seed + i);
                const std::string stem =
                    result.out_dir + "/run_" + std::to_string(i);
                {
                    std::ofstream csv(stem + ".csv");
                    if (!csv) throw std::runtime_error("cannot open '" + stem + ".csv'");
                    save_records_csv(result.runs[i].records, csv);
                }
                save_dfa_file(result.runs[i].dfa, stem + ".dfa");
                {
                    std::ofstream dot(stem + ".dot");
                    if (!dot) throw std::runtime_error("cannot open '" + stem + ".dot'");
                    dot << dfa_to_dot(result.runs[i].dfa, namer);
                }
            } catch (const std::exception& err) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure_message.empty()) failure_message = err.what();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("run_experiment: " + failure_message);

    result.curve = aggregate_curve(result.runs);
    const std::string aggregate_path = result.out_dir + "/aggregate.csv";
    std::ofstream out(aggregate_path);
    if (!out) throw std::runtime_error("cannot open '" + aggregate_path + "'");
    out << "env_steps,mean,ci95\n";
    for (const AggregatePoint& p : result.curve)
        out << format_double(p.env_steps) << "," << format_double(p.mean) << ","
            << format_double(p.ci95) << "\n";
    if (!out) throw std::runtime_error("failed writing '" + aggregate_path + "'");
    return result;
}

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            int runs_override, long long seed_override, int jobs_override) {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (runs_override > 0) cfg.num_runs = runs_override;
    if (seed_override >= 0) cfg.base_seed = static_cast<uint64_t>(seed_override);
    if (jobs_override > 0) cfg.jobs = jobs_override;
    const ExperimentResult result = run_experiment(cfg);
    for (int i = 0; i < cfg.num_runs; ++i) {
        const AutRlResult& run = result.runs[i];
        const EpochRecord& last = run.records.back();
        std::printf("run %d: epochs=%zu env_steps=%lld greedy=%.6f dfa_states=%d\n", i,
                    run.records.size(), last.env_steps, last.greedy_reward,
                    run.dfa.num_states);
    }
    if (!result.curve.empty()) {
        const AggregatePoint& final_point = result.curve.back();
        std::printf("aggregate: final mean greedy reward %.6f (ci95 %.6f)\n",
                    final_point.mean, final_point.ci95);
    }
    std::printf("artifacts written to %s\n", result.out_dir.c_str());
    return 0;
}

int cmd_learn_dfa(const std::string& trace_path, LearnerConfig learner,
                  std::string out_path, std::string dot_path) {
    const auto [traces, alphabet_size] = load_traces_file(trace_path);
    if (traces.empty()) throw std::runtime_error("trace file has no traces");
    const Dfa dfa = aut_learn(traces, alphabet_size, learner);
    if (out_path.empty()) out_path = trace_path + ".dfa";
    if (dot_path.empty()) dot_path = trace_path + ".dot";
    save_dfa_file(dfa, out_path);
    {
        std::ofstream dot(dot_path);
        if (!dot) throw std::runtime_error("cannot open '" + dot_path + "'");
        dot << dfa_to_dot(dfa, plain_symbol_namer());
    }
    std::printf("states %d\n", dfa.num_states);
    std::printf("error %.6f\n", dfa_classification_error(dfa, traces));
    std::printf("dfa written to %s, dot to %s\n", out_path.c_str(), dot_path.c_str());
    return 0;
}

int cmd_eval(const std::string& dfa_path, const std::string& trace_path) {
    const Dfa dfa = load_dfa_file(dfa_path);
    const auto [traces, alphabet_size] = load_traces_file(trace_path);
    if (alphabet_size != dfa.alphabet_size)
        throw std::runtime_error("trace alphabet does not match the dfa");
    std::printf("error %.6f\n", dfa_classification_error(dfa, traces));
    return 0;
}

int cmd_export_dot(const std::string& dfa_path, const std::string& out_path,
                   int num_actions) {
    const Dfa dfa = load_dfa_file(dfa_path);
    const SymbolNamer namer =
        num_actions > 0 ? state_action_namer(num_actions) : plain_symbol_namer();
    const std::string dot = dfa_to_dot(dfa, namer);
    if (out_path.empty()) {
        std::fputs(dot.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "'");
        out << dot;
    }
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"DFA-augmented tabular Q-learning for history-dependent rewards"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a multi-seed experiment from a config file");
    std::string run_config, run_out;
    int run_runs = 0, run_jobs = 0;
    long long run_seed = -1;
    run->add_option("config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "output directory (config 'out' by default)");
    run->add_option("--runs", run_runs, "override the number of runs");
    run->add_option("--seed", run_seed, "override the base seed");
    run->add_option("--jobs", run_jobs, "worker pool size");

    auto* learn = app.add_subcommand("learn-dfa", "fit a DFA to a labeled trace file");
    std::string learn_traces, learn_out, learn_dot;
    LearnerConfig learner;
    long long learn_seed = 0;
    learn->add_option("traces", learn_traces, "trace file")->required();
    learn->add_option("--max-states", learner.max_states, "state budget");
    learn->add_option("--loop-penalty", learner.loop_penalty, "per-loop-state penalty");
    learn->add_option("--trans-penalty", learner.transition_penalty,
                      "per-cross-pair penalty");
    learn->add_option("--timeout", learner.timeout,
                      "non-improving proposals before a restart stops");
    learn->add_option("--restarts", learner.restarts, "number of restarts");
    learn->add_option("--state-group", learner.state_group_size,
                      "symbols per environment state, for state-level guards");
    learn->add_flag("--no-prefix-closure",
                    [&learner](int64_t) { learner.prefix_closure = false; },
                    "treat traces as plain labeled strings, not episode samples");
    learn->add_option("--seed", learn_seed, "search seed");
    learn->add_option("--out", learn_out, "output dfa path (<traces>.dfa by default)");
    learn->add_option("--dot", learn_dot, "output dot path (<traces>.dot by default)");

    auto* eval = app.add_subcommand("eval", "classification error of a DFA on traces");
    std::string eval_dfa, eval_traces;
    eval->add_option("dfa", eval_dfa, "dfa file")->required();
    eval->add_option("traces", eval_traces, "trace file")->required();

    auto* export_dot = app.add_subcommand("export-dot", "write a DFA as graphviz text");
    std::string export_dfa, export_out;
    int export_actions = 0;
    export_dot->add_option("dfa", export_dfa, "dfa file")->required();
    export_dot->add_option("--out", export_out, "output path (stdout by default)");
    export_dot->add_option("--actions", export_actions,
                           "actions per state, for s<i>a<j> edge labels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) return cmd_run(run_config, run_out, run_runs, run_seed, run_jobs);
        if (learn->parsed()) {
            learner.rng_seed = static_cast<uint64_t>(learn_seed);
            return cmd_learn_dfa(learn_traces, learner, learn_out, learn_dot);
        }
        if (eval->parsed()) return cmd_eval(eval_dfa, eval_traces);
        if (export_dot->parsed())
            return cmd_export_dot(export_dfa, export_out, export_actions);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 1;
}

}  // namespace autrl
