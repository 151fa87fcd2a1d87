#include "autrl/dfa_learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <cstdio>
#include <cstdlib>

namespace autrl {

namespace {

constexpr int kSidewaysCap = 50;  // equal-objective accepts allowed per restart
constexpr double kFlipProposalRate = 0.1;
constexpr double kGuidedProposalRate = 0.5;

void check_config(const LearnerConfig& cfg) {
    if (cfg.max_states < 1) throw std::invalid_argument("max_states must be >= 1");
    if (cfg.loop_penalty < 0 || cfg.transition_penalty < 0)
        throw std::invalid_argument("penalties must be non-negative");
    if (cfg.timeout < 1) throw std::invalid_argument("timeout must be >= 1");
    if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (cfg.state_group_size < 1)
        throw std::invalid_argument("state_group_size must be >= 1");
}

// Deduplicated trace set: unique symbol sequences with per-label
// multiplicities, kept in first-seen order so results do not depend on hash
// iteration order.
struct CompiledTraces {
    std::vector<std::vector<Symbol>> seqs;
    std::vector<long long> pos_count, neg_count;
    long long total_pos = 0, total_neg = 0;
    double weight_pos = 1.0, weight_neg = 1.0;
    size_t total_symbols = 0;

    long long mult(size_t i) const { return pos_count[i] + neg_count[i]; }
};

struct SeqHash {
    size_t operator()(const std::vector<Symbol>& v) const {
        uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
        for (const Symbol s : v)
            h ^= static_cast<uint64_t>(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<size_t>(h);
    }
};

CompiledTraces compile_traces(const std::vector<Trace>& traces, int alphabet_size) {
    if (traces.empty()) throw std::invalid_argument("trace set is empty");
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    CompiledTraces ct;
    std::unordered_map<std::vector<Symbol>, size_t, SeqHash> index;
    index.reserve(traces.size() * 2);
    for (const Trace& trace : traces) {
        if (trace.label != 0 && trace.label != 1)
            throw std::invalid_argument("trace label must be 0 or 1");
        for (const Symbol sym : trace.symbols)
            if (sym < 0 || sym >= alphabet_size)
                throw std::invalid_argument("trace symbol out of alphabet range");
        auto [it, inserted] = index.try_emplace(trace.symbols, ct.seqs.size());
        if (inserted) {
            ct.seqs.push_back(trace.symbols);
            ct.pos_count.push_back(0);
            ct.neg_count.push_back(0);
            ct.total_symbols += trace.symbols.size();
        }
        if (trace.label == 1) {
            ++ct.pos_count[it->second];
            ++ct.total_pos;
        } else {
            ++ct.neg_count[it->second];
            ++ct.total_neg;
        }
    }
    if (ct.total_pos > 0 && ct.total_neg > 0) {
        // The rare class is upweighted so it carries half the total error
        // mass, but no trace is ever worth less than one: otherwise a large
        // negative store makes single misclassifications cheaper than a
        // transition-penalty edge and the search trades correctness for
        // structure.
        const double total = static_cast<double>(ct.total_pos + ct.total_neg);
        ct.weight_pos = std::max(1.0, total / (2.0 * static_cast<double>(ct.total_pos)));
        ct.weight_neg = std::max(1.0, total / (2.0 * static_cast<double>(ct.total_neg)));
    }
    return ct;
}

struct StructureCounts {
    int loops = 0;    // L
    int crosses = 0;  // T
    int cross_groups = 0;
    int cross_symbols = 0;
};

StructureCounts structure_counts(const Dfa& dfa, int group_size) {
    StructureCounts sc;
    const int num_groups = (dfa.alphabet_size + group_size - 1) / group_size;
    std::vector<char> pair_seen(dfa.num_states, 0);
    std::vector<char> group_seen(static_cast<size_t>(num_groups) * dfa.num_states, 0);
    for (int q = 0; q < dfa.num_states; ++q) {
        std::fill(pair_seen.begin(), pair_seen.end(), 0);
        std::fill(group_seen.begin(), group_seen.end(), 0);
        bool has_loop = false;
        for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym) {
            const int target = dfa.step_unchecked(q, sym);
            if (target == q) {
                has_loop = true;
            } else {
                ++sc.cross_symbols;
                if (!pair_seen[target]) {
                    pair_seen[target] = 1;
                    ++sc.crosses;
                }
                auto& seen = group_seen[(sym / group_size) * dfa.num_states + target];
                if (!seen) {
                    seen = 1;
                    ++sc.cross_groups;
                }
            }
        }
        if (has_loop) ++sc.loops;
    }
    return sc;
}

LearnerObjective assemble_objective(long long fn, long long fp, long long premature,
                                    const CompiledTraces& ct, const StructureCounts& sc,
                                    const LearnerConfig& cfg) {
    LearnerObjective o;
    o.error_weight = static_cast<double>(fn) * ct.weight_pos +
                     static_cast<double>(fp) * ct.weight_neg;
    o.premature_weight = static_cast<double>(premature);
    if (ct.total_pos > 0 && ct.total_neg > 0) {
        o.error_rate = 0.5 * static_cast<double>(fn) / static_cast<double>(ct.total_pos) +
                       0.5 * static_cast<double>(fp) / static_cast<double>(ct.total_neg);
    } else {
        o.error_rate = static_cast<double>(fn + fp) /
                       static_cast<double>(ct.total_pos + ct.total_neg);
    }
    o.loop_count = sc.loops;
    o.cross_count = sc.crosses;
    o.cross_groups = sc.cross_groups;
    o.cross_symbols = sc.cross_symbols;
    o.total = o.error_weight + o.premature_weight + cfg.loop_penalty * sc.loops +
              cfg.transition_penalty * sc.crosses + kGuardTieBreak * sc.cross_symbols;
    return o;
}

LearnerObjective evaluate(const Dfa& dfa, const CompiledTraces& ct,
                          const LearnerConfig& cfg) {
    long long fn = 0, fp = 0;
    long long premature = 0;
    for (size_t i = 0; i < ct.seqs.size(); ++i) {
        const auto& symbols = ct.seqs[i];
        int q = Dfa::kInitialState;
        long long acc_inter = 0;
        for (size_t t = 0; t < symbols.size(); ++t) {
            q = dfa.step_unchecked(q, symbols[t]);
            if (t + 1 < symbols.size() && dfa.accepting[q]) ++acc_inter;
        }
        if (dfa.accepting[q])
            fp += ct.neg_count[i];
        else
            fn += ct.pos_count[i];
        if (cfg.prefix_closure) premature += acc_inter * ct.mult(i);
    }
    return assemble_objective(fn, fp, premature, ct, structure_counts(dfa, cfg.state_group_size), cfg);
}

// Local-search state with incremental proposal evaluation. Transition edits
// only re-run the sequences indexed at the edited table cell (the index is a
// superset of the true traversers and is compacted periodically); flips are
// O(1) via per-state end and mid-trace visit counts.
class Search {
public:
    Search(const CompiledTraces& ct, const LearnerConfig& cfg, Dfa dfa)
        : ct_(ct), cfg_(cfg), dfa_(std::move(dfa)) {
        rebuild();
    }

    const Dfa& dfa() const { return dfa_; }
    double total() const { return total_; }

    // Random currently-misclassified sequence, or -1 when everything fits.
    // The cache is refreshed lazily; mild staleness only blurs the guidance.
    int sample_wrong_seq(Rng& rng) {
        if (++proposals_since_wrong_refresh_ > kWrongRefreshInterval ||
            wrong_cache_.empty()) {
            proposals_since_wrong_refresh_ = 0;
            wrong_cache_.clear();
            for (size_t i = 0; i < ct_.seqs.size(); ++i) {
                const bool accepted = dfa_.accepting[finals_[i]] != 0;
                if ((accepted && ct_.neg_count[i] > 0) ||
                    (!accepted && ct_.pos_count[i] > 0))
                    wrong_cache_.push_back(static_cast<int>(i));
            }
        }
        if (wrong_cache_.empty()) return -1;
        return wrong_cache_[rng.uniform_int(static_cast<uint32_t>(wrong_cache_.size()))];
    }

    // The table cell the sequence reads at `position` under the current table.
    std::pair<int, Symbol> cell_at(int seq, int position) const {
        int q = Dfa::kInitialState;
        const auto& symbols = ct_.seqs[seq];
        for (int t = 0; t < position; ++t) q = dfa_.step_unchecked(q, symbols[t]);
        return {q, symbols[position]};
    }

    int final_state(int seq) const { return finals_[seq]; }
    int seq_length(int seq) const { return static_cast<int>(ct_.seqs[seq].size()); }

    double peek_flip(int q) const {
        long long fn = fn_, fp = fp_;
        if (dfa_.accepting[q]) {
            fn += end_pos_[q];
            fp -= end_neg_[q];
        } else {
            fn -= end_pos_[q];
            fp += end_neg_[q];
        }
        long long premature = premature_;
        if (cfg_.prefix_closure)
            premature += dfa_.accepting[q] ? -visit_count_[q] : visit_count_[q];
        return assemble_objective(fn, fp, premature, ct_, structure_, cfg_).total;
    }

    void accept_flip(int q) {
        if (dfa_.accepting[q]) {
            fn_ += end_pos_[q];
            fp_ -= end_neg_[q];
            if (cfg_.prefix_closure) premature_ -= visit_count_[q];
        } else {
            fn_ -= end_pos_[q];
            fp_ += end_neg_[q];
            if (cfg_.prefix_closure) premature_ += visit_count_[q];
        }
        dfa_.accepting[q] = dfa_.accepting[q] ? 0 : 1;
        total_ = assemble_objective(fn_, fp_, premature_, ct_, structure_, cfg_).total;
    }

    double peek_edit(int q, Symbol sym, int new_target) {
        const int cell = q * dfa_.alphabet_size + sym;
        const int old_target = dfa_.delta[cell];
        const StructureCounts sc = edited_structure(q, sym, old_target, new_target);
        long long fn = fn_, fp = fp_;
        long long premature = premature_;
        dfa_.delta[cell] = new_target;
        const int stamp = ++stamp_counter_;
        for (const int i : cell_index_[cell]) {
            if (seq_stamp_[i] == stamp) continue;  // stale duplicate entry
            seq_stamp_[i] = stamp;
            const auto& symbols = ct_.seqs[i];
            int state = Dfa::kInitialState;
            long long acc_inter = 0;
            for (size_t t = 0; t < symbols.size(); ++t) {
                state = dfa_.step_unchecked(state, symbols[t]);
                if (t + 1 < symbols.size() && dfa_.accepting[state]) ++acc_inter;
            }
            if (cfg_.prefix_closure)
                premature += (acc_inter - accepting_mid_visits(i)) * ct_.mult(i);
            const bool was_accepted = dfa_.accepting[finals_[i]] != 0;
            const bool now_accepted = dfa_.accepting[state] != 0;
            if (was_accepted != now_accepted) {
                if (now_accepted) {
                    fn -= ct_.pos_count[i];
                    fp += ct_.neg_count[i];
                } else {
                    fn += ct_.pos_count[i];
                    fp -= ct_.neg_count[i];
                }
            }
        }
        dfa_.delta[cell] = old_target;
        const double peeked = assemble_objective(fn, fp, premature, ct_, sc, cfg_).total;
#ifdef AUTRL_SEARCH_SELFCHECK
        Dfa probe = dfa_;
        probe.delta[cell] = new_target;
        const double reference = evaluate(probe, ct_, cfg_).total;
        if (std::fabs(peeked - reference) > 1e-9) {
            std::fprintf(stderr,
                         "peek_edit selfcheck: peeked %.12f vs reference %.12f (q=%d sym=%d old=%d new=%d)\n",
                         peeked, reference, q, sym, old_target, new_target);
            std::abort();
        }
#endif
        return peeked;
    }

    void accept_edit(int q, Symbol sym, int new_target) {
        const int cell = q * dfa_.alphabet_size + sym;
        const int old_target = dfa_.delta[cell];
        structure_ = edited_structure(q, sym, old_target, new_target);
        const size_t group_row =
            (static_cast<size_t>(q) * num_groups_ + sym / cfg_.state_group_size) *
            dfa_.num_states;
        if (old_target == q) {
            --loop_cnt_[q];
        } else {
            --target_cnt_[q * dfa_.num_states + old_target];
            --group_cnt_[group_row + old_target];
        }
        if (new_target == q) {
            ++loop_cnt_[q];
        } else {
            ++target_cnt_[q * dfa_.num_states + new_target];
            ++group_cnt_[group_row + new_target];
        }
        dfa_.delta[cell] = new_target;

        const int stamp = ++stamp_counter_;
        touched_.clear();
        for (const int i : cell_index_[cell]) {
            if (seq_stamp_[i] == stamp) continue;
            seq_stamp_[i] = stamp;
            touched_.push_back(i);
        }
        const int n = dfa_.num_states;
        for (const int i : touched_) {
            // Mark the cells already indexed for this sequence, then re-walk
            // it: newly visited cells get fresh index entries; entries for
            // cells the new path no longer visits stay behind as harmless
            // stale superset entries until the next compaction.
            const int mark = ++stamp_counter_;
            for (const int c : seq_cells_[i]) cell_stamp_[c] = mark;
            auto& cells_of_seq = seq_cells_[i];
            cells_of_seq.clear();
            const int walk = ++stamp_counter_;
            std::fill(visit_scratch_.begin(), visit_scratch_.end(), 0);
            int state = Dfa::kInitialState;
            const auto& symbols = ct_.seqs[i];
            for (size_t t = 0; t < symbols.size(); ++t) {
                const int c = state * dfa_.alphabet_size + symbols[t];
                if (cell_walk_stamp_[c] != walk) {
                    cell_walk_stamp_[c] = walk;
                    cells_of_seq.push_back(c);
                    if (cell_stamp_[c] != mark) cell_index_[c].push_back(i);
                }
                state = dfa_.delta[c];
                if (t + 1 < symbols.size()) ++visit_scratch_[state];
            }
            const long long mult = ct_.mult(i);
            uint16_t* old_visits = &seq_visits_[static_cast<size_t>(i) * n];
            for (int x = 0; x < n; ++x) {
                const int delta_visits = visit_scratch_[x] - old_visits[x];
                if (delta_visits != 0) {
                    visit_count_[x] += static_cast<long long>(delta_visits) * mult;
                    if (cfg_.prefix_closure && dfa_.accepting[x])
                        premature_ += static_cast<long long>(delta_visits) * mult;
                    old_visits[x] = static_cast<uint16_t>(visit_scratch_[x]);
                }
            }
            const int old_final = finals_[i];
            if (state != old_final) {
                end_pos_[old_final] -= ct_.pos_count[i];
                end_neg_[old_final] -= ct_.neg_count[i];
                end_pos_[state] += ct_.pos_count[i];
                end_neg_[state] += ct_.neg_count[i];
                if (dfa_.accepting[old_final])
                    fp_ -= ct_.neg_count[i];
                else
                    fn_ -= ct_.pos_count[i];
                if (dfa_.accepting[state])
                    fp_ += ct_.neg_count[i];
                else
                    fn_ += ct_.pos_count[i];
                finals_[i] = state;
            }
        }
        total_ = assemble_objective(fn_, fp_, premature_, ct_, structure_, cfg_).total;
#ifdef AUTRL_SEARCH_SELFCHECK
        const double reference = evaluate(dfa_, ct_, cfg_).total;
        if (std::fabs(total_ - reference) > 1e-9) {
            std::fprintf(stderr, "selfcheck: incremental %.12f vs reference %.12f\n",
                         total_, reference);
            std::abort();
        }
#endif
        if (++accepts_since_rebuild_ >= kRebuildInterval) rebuild();
    }

private:
    static constexpr int kRebuildInterval = 48;
    static constexpr int kWrongRefreshInterval = 200;

    long long accepting_mid_visits(int i) const {
        const int n = dfa_.num_states;
        const uint16_t* visits = &seq_visits_[static_cast<size_t>(i) * n];
        long long acc = 0;
        for (int x = 0; x < n; ++x)
            if (dfa_.accepting[x]) acc += visits[x];
        return acc;
    }

    StructureCounts edited_structure(int q, Symbol sym, int old_target,
                                     int new_target) const {
        StructureCounts sc = structure_;
        const int row = q * dfa_.num_states;
        const size_t group_row =
            (static_cast<size_t>(q) * num_groups_ + sym / cfg_.state_group_size) *
            dfa_.num_states;
        if (old_target == q) {
            if (loop_cnt_[q] == 1) --sc.loops;
        } else {
            --sc.cross_symbols;
            if (target_cnt_[row + old_target] == 1) --sc.crosses;
            if (group_cnt_[group_row + old_target] == 1) --sc.cross_groups;
        }
        if (new_target == q) {
            if (loop_cnt_[q] == 0) ++sc.loops;
        } else {
            ++sc.cross_symbols;
            if (target_cnt_[row + new_target] == 0) ++sc.crosses;
            if (group_cnt_[group_row + new_target] == 0) ++sc.cross_groups;
        }
        return sc;
    }

    void rebuild() {
        const int n = dfa_.num_states;
        const int cells = n * dfa_.alphabet_size;
        const size_t num_seqs = ct_.seqs.size();
        finals_.assign(num_seqs, 0);
        seq_cells_.resize(num_seqs);
        seq_stamp_.assign(num_seqs, 0);
        seq_visits_.assign(num_seqs * n, 0);
        visit_scratch_.assign(n, 0);
        end_pos_.assign(n, 0);
        end_neg_.assign(n, 0);
        visit_count_.assign(n, 0);
        cell_index_.assign(cells, {});
        cell_stamp_.assign(cells, 0);
        cell_walk_stamp_.assign(cells, 0);
        stamp_counter_ = 0;
        accepts_since_rebuild_ = 0;
        fn_ = fp_ = 0;
        premature_ = 0;
        for (size_t i = 0; i < num_seqs; ++i) {
            auto& cells_of_seq = seq_cells_[i];
            cells_of_seq.clear();
            const int walk = ++stamp_counter_;
            int q = Dfa::kInitialState;
            const auto& symbols = ct_.seqs[i];
            uint16_t* visits = &seq_visits_[i * n];
            for (size_t t = 0; t < symbols.size(); ++t) {
                const int cell = q * dfa_.alphabet_size + symbols[t];
                if (cell_walk_stamp_[cell] != walk) {
                    cell_walk_stamp_[cell] = walk;
                    cells_of_seq.push_back(cell);
                    cell_index_[cell].push_back(static_cast<int>(i));
                }
                q = dfa_.delta[cell];
                if (t + 1 < symbols.size()) ++visits[q];
            }
            finals_[i] = q;
            end_pos_[q] += ct_.pos_count[i];
            end_neg_[q] += ct_.neg_count[i];
            if (dfa_.accepting[q])
                fp_ += ct_.neg_count[i];
            else
                fn_ += ct_.pos_count[i];
            const long long mult = ct_.mult(i);
            for (int x = 0; x < n; ++x)
                visit_count_[x] += static_cast<long long>(visits[x]) * mult;
        }
        if (cfg_.prefix_closure)
            for (int x = 0; x < n; ++x)
                if (dfa_.accepting[x]) premature_ += visit_count_[x];
        num_groups_ = (dfa_.alphabet_size + cfg_.state_group_size - 1) /
                      cfg_.state_group_size;
        target_cnt_.assign(static_cast<size_t>(n) * n, 0);
        group_cnt_.assign(static_cast<size_t>(n) * num_groups_ * n, 0);
        loop_cnt_.assign(n, 0);
        for (int q = 0; q < n; ++q)
            for (Symbol sym = 0; sym < dfa_.alphabet_size; ++sym) {
                const int target = dfa_.step_unchecked(q, sym);
                if (target == q) {
                    ++loop_cnt_[q];
                } else {
                    ++target_cnt_[q * n + target];
                    ++group_cnt_[(static_cast<size_t>(q) * num_groups_ +
                                  sym / cfg_.state_group_size) *
                                     n +
                                 target];
                }
            }
        structure_ = structure_counts(dfa_, cfg_.state_group_size);
        total_ = assemble_objective(fn_, fp_, premature_, ct_, structure_, cfg_).total;
    }

    const CompiledTraces& ct_;
    const LearnerConfig& cfg_;
    Dfa dfa_;
    std::vector<int> finals_;
    std::vector<std::vector<int>> seq_cells_;  // distinct cells on each path
    std::vector<int> seq_stamp_;
    std::vector<uint16_t> seq_visits_;  // mid-trace visits, seq x state
    std::vector<int> visit_scratch_;
    std::vector<long long> end_pos_, end_neg_, visit_count_;
    long long fn_ = 0, fp_ = 0;
    long long premature_ = 0;  // weighted mid-trace accepting visits
    std::vector<std::vector<int>> cell_index_;  // superset of traversing seqs
    std::vector<int> cell_stamp_, cell_walk_stamp_;
    std::vector<int> touched_;
    std::vector<int> wrong_cache_;
    int proposals_since_wrong_refresh_ = 0;
    int stamp_counter_ = 0;
    int accepts_since_rebuild_ = 0;
    std::vector<int> target_cnt_, loop_cnt_, group_cnt_;
    int num_groups_ = 1;
    StructureCounts structure_;
    double total_ = 0.0;
};

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

// Restart schedule: an annealed warm phase (pure hill climbing cannot cross
// the ridges between basins of this landscape often enough for a 20-restart
// budget), a greedy descent, then basin-hopping kicks around the incumbent.
constexpr int kWarmSweeps = 4;  // warm proposals per possible single edit
constexpr int kWarmFloorProposals = 1500;
constexpr double kTemperatureScale = 0.1;  // initial T as a fraction of the start total
constexpr double kTemperatureFloor = 1e-3;
constexpr int kKickCycles = 8;
constexpr int kKickMovesMin = 2;
constexpr int kKickMovesSpan = 4;  // kick length drawn from [min, min+span)

struct Proposal {
    bool flip = false;
    int q = 0;
    Symbol sym = 0;
    int new_target = 0;
    double total = 0.0;
};

// Guided proposals steer moves toward the decision points of currently
// misclassified traces; uniform ones keep structural cleanup flowing.
Proposal propose(Search& search, int num_states, int alphabet_size, Rng& rng) {
    Proposal p;
    if (rng.bernoulli(kGuidedProposalRate)) {
        const int wrong = search.sample_wrong_seq(rng);
        if (wrong >= 0 && search.seq_length(wrong) > 0) {
            if (num_states > 1 && !rng.bernoulli(kFlipProposalRate)) {
                const int position = static_cast<int>(
                    rng.uniform_int(static_cast<uint32_t>(search.seq_length(wrong))));
                const auto [q, sym] = search.cell_at(wrong, position);
                p.q = q;
                p.sym = sym;
                const int current = search.dfa().step_unchecked(q, sym);
                p.new_target = static_cast<int>(rng.uniform_int(num_states - 1));
                if (p.new_target >= current) ++p.new_target;
                p.total = search.peek_edit(p.q, p.sym, p.new_target);
                return p;
            }
            p.flip = true;
            p.q = search.final_state(wrong);
            p.total = search.peek_flip(p.q);
            return p;
        }
    }
    p.flip = num_states == 1 || rng.bernoulli(kFlipProposalRate);
    p.q = static_cast<int>(rng.uniform_int(num_states));
    if (p.flip) {
        p.total = search.peek_flip(p.q);
    } else {
        p.sym = static_cast<Symbol>(rng.uniform_int(alphabet_size));
        const int current = search.dfa().step_unchecked(p.q, p.sym);
        p.new_target = static_cast<int>(rng.uniform_int(num_states - 1));
        if (p.new_target >= current) ++p.new_target;
        p.total = search.peek_edit(p.q, p.sym, p.new_target);
    }
    return p;
}

void apply_proposal(Search& search, const Proposal& p) {
    if (p.flip)
        search.accept_flip(p.q);
    else
        search.accept_edit(p.q, p.sym, p.new_target);
}

Dfa run_restart(const CompiledTraces& ct, int alphabet_size, const LearnerConfig& cfg,
                Rng& rng) {
    // Every restart gets the full state budget; surplus states settle into
    // self-loop islands and are pruned away afterwards.
    const int num_states = cfg.max_states;
    Dfa best = random_dfa(num_states, alphabet_size, rng);
    double best_total = 0.0;
    int sideways_used = 0;

    auto descend = [&](Search& search) {
        int stale = 0;
        while (stale < cfg.timeout) {
            const Proposal p = propose(search, num_states, alphabet_size, rng);
            const double current_total = search.total();
            bool accept = false;
            if (p.total < current_total) {
                accept = true;
                stale = 0;
            } else {
                ++stale;
                if (p.total == current_total && sideways_used < kSidewaysCap) {
                    accept = true;
                    ++sideways_used;
                }
            }
            if (accept) {
                apply_proposal(search, p);
                if (search.total() < best_total) {
                    best_total = search.total();
                    best = search.dfa();
                }
            }
        }
    };

    {
        Search search(ct, cfg, best);
        best_total = search.total();
        const int move_space =
            num_states * alphabet_size * std::max(1, num_states - 1) + num_states;
        const int warm_proposals = std::max(kWarmFloorProposals, kWarmSweeps * move_space);
        const double cooling = std::pow(kTemperatureFloor, 1.0 / warm_proposals);
        double temperature = std::max(0.5, kTemperatureScale * search.total());
        for (int k = 0; k < warm_proposals; ++k, temperature *= cooling) {
            const Proposal p = propose(search, num_states, alphabet_size, rng);
            const double delta = p.total - search.total();
            if (delta < 0.0 || rng.uniform01() < std::exp(-delta / temperature)) {
                apply_proposal(search, p);
                if (search.total() < best_total) {
                    best_total = search.total();
                    best = search.dfa();
                }
            }
        }
        descend(search);
    }

    // Basin hopping: perturb the incumbent with a short burst of forced
    // moves, re-descend, and keep whatever improves on it.
    for (int cycle = 0; cycle < kKickCycles; ++cycle) {
        Search search(ct, cfg, best);
        const int kick_moves =
            kKickMovesMin + static_cast<int>(rng.uniform_int(kKickMovesSpan));
        for (int j = 0; j < kick_moves; ++j)
            apply_proposal(search, propose(search, num_states, alphabet_size, rng));
        if (search.total() < best_total) {
            best_total = search.total();
            best = search.dfa();
        }
        descend(search);
    }
    return best;
}

// Widens guards to whole state groups where the data cannot tell the
// difference: a self-looping symbol whose group siblings already cross to
// some target joins them whenever that leaves the misclassification and
// premature-accept terms untouched. Guards then read as state predicates
// and cover action variants the sampling policy never favored.
Dfa complete_state_guards(Dfa dfa, const CompiledTraces& ct, const LearnerConfig& cfg) {
    if (cfg.state_group_size < 2) return dfa;
    const int group_size = cfg.state_group_size;
    LearnerObjective current = evaluate(dfa, ct, cfg);
    for (int q = 0; q < dfa.num_states; ++q) {
        for (Symbol base = 0; base < dfa.alphabet_size; base += group_size) {
            const Symbol end = std::min(base + group_size, dfa.alphabet_size);
            for (int target = 0; target < dfa.num_states; ++target) {
                if (target == q) continue;
                bool group_crosses = false;
                for (Symbol sym = base; sym < end && !group_crosses; ++sym)
                    group_crosses = dfa.step_unchecked(q, sym) == target;
                if (!group_crosses) continue;
                for (Symbol sym = base; sym < end; ++sym) {
                    auto& cell = dfa.delta[static_cast<size_t>(q) * dfa.alphabet_size + sym];
                    if (cell != q) continue;  // only widen over the default self-loop
                    cell = target;
                    const LearnerObjective widened = evaluate(dfa, ct, cfg);
                    const double fit = widened.error_weight + widened.premature_weight;
                    const double fit_before =
                        current.error_weight + current.premature_weight;
                    if (fit <= fit_before)
                        current = widened;
                    else
                        cell = q;
                }
            }
        }
    }
    return dfa;
}

}  // namespace

LearnerObjective objective(const Dfa& dfa, const std::vector<Trace>& traces,
                           const LearnerConfig& cfg) {
    dfa_validate(dfa);
    if (dfa.num_states > cfg.max_states)
        throw std::invalid_argument("dfa exceeds the learner state budget");
    const CompiledTraces ct = compile_traces(traces, dfa.alphabet_size);
    return evaluate(dfa, ct, cfg);
}

Dfa aut_learn(const std::vector<Trace>& traces, int alphabet_size,
              const LearnerConfig& cfg, Rng& rng) {
    check_config(cfg);
    const CompiledTraces ct = compile_traces(traces, alphabet_size);
    std::vector<Dfa> candidates;
    candidates.reserve(cfg.restarts + 1);
    candidates.push_back(dfa_empty(alphabet_size));
    const uint64_t base_seed = rng.next_u64();
    for (int r = 0; r < cfg.restarts; ++r) {
        Rng restart_rng(Rng::derive(base_seed, static_cast<uint64_t>(r)));
        candidates.push_back(
            dfa_prune_unreachable(run_restart(ct, alphabet_size, cfg, restart_rng)));
    }
    return complete_state_guards(best_of(candidates, traces, cfg), ct, cfg);
}

Dfa aut_learn(const std::vector<Trace>& traces, int alphabet_size,
              const LearnerConfig& cfg) {
    Rng rng(cfg.rng_seed);
    return aut_learn(traces, alphabet_size, cfg, rng);
}

Dfa best_of(const std::vector<Dfa>& dfas, const std::vector<Trace>& traces,
            const LearnerConfig& cfg) {
    if (dfas.empty()) throw std::invalid_argument("best_of over an empty candidate list");
    size_t best = 0;
    LearnerObjective best_obj = objective(dfas[0], traces, cfg);
    for (size_t i = 1; i < dfas.size(); ++i) {
        const LearnerObjective obj = objective(dfas[i], traces, cfg);
        const bool better =
            obj.total < best_obj.total ||
            (obj.total == best_obj.total &&
             (dfas[i].num_states < dfas[best].num_states ||
              (dfas[i].num_states == dfas[best].num_states &&
               obj.cross_count < best_obj.cross_count)));
        if (better) {
            best = i;
            best_obj = obj;
        }
    }
    return dfas[best];
}

void save_traces(const std::vector<Trace>& traces, int alphabet_size, std::ostream& out) {
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    out << "traces " << alphabet_size << "\n";
    for (const Trace& trace : traces) {
        out << trace.label;
        for (const Symbol sym : trace.symbols) out << " " << sym;
        out << "\n";
    }
}

std::pair<std::vector<Trace>, int> load_traces(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace file: empty input");
    std::istringstream header(line);
    std::string tag;
    int alphabet_size = 0;
    if (!(header >> tag >> alphabet_size) || tag != "traces" || alphabet_size < 1)
        throw std::runtime_error("trace file: expected 'traces <alphabet_size>' header");
    std::vector<Trace> traces;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        Trace trace;
        if (!(fields >> trace.label)) continue;  // blank line
        if (trace.label != 0 && trace.label != 1)
            throw std::runtime_error("trace file line " + std::to_string(line_no) +
                                     ": label must be 0 or 1");
        Symbol sym = 0;
        while (fields >> sym) {
            if (sym < 0 || sym >= alphabet_size)
                throw std::runtime_error("trace file line " + std::to_string(line_no) +
                                         ": symbol out of range");
            trace.symbols.push_back(sym);
        }
        if (!fields.eof())
            throw std::runtime_error("trace file line " + std::to_string(line_no) +
                                     ": malformed symbol");
        traces.push_back(std::move(trace));
    }
    return {std::move(traces), alphabet_size};
}

void save_traces_file(const std::vector<Trace>& traces, int alphabet_size,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_traces(traces, alphabet_size, out);
    if (!out) throw std::runtime_error("failed writing traces to '" + path + "'");
}

std::pair<std::vector<Trace>, int> load_traces_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
    return load_traces(in);
}

}  // namespace autrl
