#include "autrl/dfa.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace autrl {

Dfa dfa_empty(int alphabet_size) {
    if (alphabet_size < 1) throw std::invalid_argument("alphabet size must be positive");
    Dfa dfa;
    dfa.num_states = 1;
    dfa.alphabet_size = alphabet_size;
    dfa.delta.assign(alphabet_size, 0);
    dfa.accepting.assign(1, 0);
    return dfa;
}

void dfa_validate(const Dfa& dfa) {
    if (dfa.num_states < 1) throw std::invalid_argument("dfa needs at least one state");
    if (dfa.alphabet_size < 1) throw std::invalid_argument("dfa alphabet must be non-empty");
    if (dfa.delta.size() != static_cast<size_t>(dfa.num_states) * dfa.alphabet_size)
        throw std::invalid_argument("dfa transition table is not total");
    if (dfa.accepting.size() != static_cast<size_t>(dfa.num_states))
        throw std::invalid_argument("dfa accepting flags do not match state count");
    for (const int target : dfa.delta)
        if (target < 0 || target >= dfa.num_states)
            throw std::invalid_argument("dfa transition target out of range");
}

int dfa_step(const Dfa& dfa, int q, Symbol sym) {
    if (q < 0 || q >= dfa.num_states)
        throw std::out_of_range("dfa state " + std::to_string(q) + " out of range");
    if (sym < 0 || sym >= dfa.alphabet_size)
        throw std::out_of_range("symbol " + std::to_string(sym) + " out of range");
    return dfa.step_unchecked(q, sym);
}

DfaRunResult dfa_run(const Dfa& dfa, std::span<const Symbol> symbols) {
    int q = Dfa::kInitialState;
    for (const Symbol sym : symbols) q = dfa_step(dfa, q, sym);
    return {q, dfa.accepting[q] != 0};
}

Dfa dfa_prune_unreachable(const Dfa& dfa) {
    dfa_validate(dfa);
    std::vector<char> reachable(dfa.num_states, 0);
    std::vector<int> frontier{Dfa::kInitialState};
    reachable[Dfa::kInitialState] = 1;
    while (!frontier.empty()) {
        const int q = frontier.back();
        frontier.pop_back();
        for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym) {
            const int target = dfa.step_unchecked(q, sym);
            if (!reachable[target]) {
                reachable[target] = 1;
                frontier.push_back(target);
            }
        }
    }
    std::vector<int> remap(dfa.num_states, -1);
    int kept = 0;
    for (int q = 0; q < dfa.num_states; ++q)
        if (reachable[q]) remap[q] = kept++;
    if (kept == dfa.num_states) return dfa;
    Dfa pruned;
    pruned.num_states = kept;
    pruned.alphabet_size = dfa.alphabet_size;
    pruned.delta.resize(static_cast<size_t>(kept) * dfa.alphabet_size);
    pruned.accepting.resize(kept);
    for (int q = 0; q < dfa.num_states; ++q) {
        if (remap[q] < 0) continue;
        pruned.accepting[remap[q]] = dfa.accepting[q];
        for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym)
            pruned.delta[static_cast<size_t>(remap[q]) * dfa.alphabet_size + sym] =
                remap[dfa.step_unchecked(q, sym)];
    }
    return pruned;
}

double dfa_classification_error(const Dfa& dfa, const std::vector<Trace>& traces) {
    if (traces.empty())
        throw std::invalid_argument("classification error over an empty trace set");
    size_t wrong = 0;
    for (const Trace& trace : traces) {
        const bool accept = dfa_run(dfa, trace.symbols).accept;
        if (accept != (trace.label == 1)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(traces.size());
}

SymbolNamer plain_symbol_namer() {
    return [](Symbol sym) { return std::to_string(sym); };
}

SymbolNamer state_action_namer(int num_actions) {
    return [num_actions](Symbol sym) {
        return "s" + std::to_string(sym / num_actions) + "a" +
               std::to_string(sym % num_actions);
    };
}

std::string dfa_to_dot(const Dfa& dfa, const SymbolNamer& namer) {
    dfa_validate(dfa);
    std::ostringstream out;
    out << "digraph dfa {\n";
    out << "  rankdir=LR;\n";
    out << "  __start [shape=point];\n";
    for (int q = 0; q < dfa.num_states; ++q)
        out << "  q" << q << " [shape=" << (dfa.accepting[q] ? "doublecircle" : "circle")
            << "];\n";
    out << "  __start -> q0;\n";
    for (int q = 0; q < dfa.num_states; ++q) {
        std::vector<int> target_count(dfa.num_states, 0);
        for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym)
            ++target_count[dfa.step_unchecked(q, sym)];
        int default_target = 0;
        for (int t = 1; t < dfa.num_states; ++t)
            if (target_count[t] > target_count[default_target]) default_target = t;
        out << "  q" << q << " -> q" << default_target << " [label=\"o/w\"];\n";
        for (int t = 0; t < dfa.num_states; ++t) {
            if (t == default_target || target_count[t] == 0) continue;
            std::string label;
            for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym) {
                if (dfa.step_unchecked(q, sym) != t) continue;
                if (!label.empty()) label += ", ";
                label += namer(sym);
            }
            out << "  q" << q << " -> q" << t << " [label=\"" << label << "\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

void save_dfa(const Dfa& dfa, std::ostream& out) {
    dfa_validate(dfa);
    out << "dfa " << dfa.num_states << " " << dfa.alphabet_size << "\n";
    for (int q = 0; q < dfa.num_states; ++q)
        out << "state " << q << " " << (dfa.accepting[q] ? 1 : 0) << "\n";
    for (int q = 0; q < dfa.num_states; ++q)
        for (Symbol sym = 0; sym < dfa.alphabet_size; ++sym)
            out << "t " << q << " " << sym << " " << dfa.step_unchecked(q, sym) << "\n";
}

Dfa load_dfa(std::istream& in) {
    std::string tag;
    Dfa dfa;
    if (!(in >> tag) || tag != "dfa")
        throw std::runtime_error("dfa file: expected 'dfa' header");
    if (!(in >> dfa.num_states >> dfa.alphabet_size) || dfa.num_states < 1 ||
        dfa.alphabet_size < 1)
        throw std::runtime_error("dfa file: bad header counts");
    dfa.accepting.assign(dfa.num_states, 0);
    dfa.delta.assign(static_cast<size_t>(dfa.num_states) * dfa.alphabet_size, -1);
    std::vector<char> state_seen(dfa.num_states, 0);
    for (int i = 0; i < dfa.num_states; ++i) {
        int id = 0, accepting = 0;
        if (!(in >> tag >> id >> accepting) || tag != "state")
            throw std::runtime_error("dfa file: expected 'state' line");
        if (id < 0 || id >= dfa.num_states || state_seen[id])
            throw std::runtime_error("dfa file: bad or duplicate state id");
        if (accepting != 0 && accepting != 1)
            throw std::runtime_error("dfa file: accepting flag must be 0 or 1");
        state_seen[id] = 1;
        dfa.accepting[id] = static_cast<char>(accepting);
    }
    const size_t transitions = static_cast<size_t>(dfa.num_states) * dfa.alphabet_size;
    for (size_t i = 0; i < transitions; ++i) {
        int q = 0, sym = 0, target = 0;
        if (!(in >> tag >> q >> sym >> target) || tag != "t")
            throw std::runtime_error("dfa file: expected 't' line");
        if (q < 0 || q >= dfa.num_states || sym < 0 || sym >= dfa.alphabet_size ||
            target < 0 || target >= dfa.num_states)
            throw std::runtime_error("dfa file: transition out of range");
        auto& cell = dfa.delta[static_cast<size_t>(q) * dfa.alphabet_size + sym];
        if (cell != -1) throw std::runtime_error("dfa file: duplicate transition");
        cell = target;
    }
    dfa_validate(dfa);
    return dfa;
}

void save_dfa_file(const Dfa& dfa, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_dfa(dfa, out);
    if (!out) throw std::runtime_error("failed writing dfa to '" + path + "'");
}

Dfa load_dfa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dfa file '" + path + "'");
    return load_dfa(in);
}

}  // namespace autrl
