#pragma once

// Backward saturation computing pre* of a regular set of single-stack
// configurations.

#include <hocpds/automaton.hpp>
#include <hocpds/model.hpp>

#include <cmath>
#include <functional>

namespace hocpds {

enum class SatMode {
    Auto,       // Optimized when the initial automaton is non-alternating at order n
    Full,
    Optimized,  // keep only transitions whose order-n target set has at most one state
};

struct SaturationOptions {
    SatMode mode = SatMode::Auto;
    // reject automata whose heads or head labels are final or have incoming transitions
    bool check_initial = true;
};

struct SaturationStats {
    std::size_t iterations = 0;
    std::size_t added = 0;
    bool optimized = false;
};

// Letter the long forms from the rule's target head must carry.
inline Letter trigger_letter(const Rule& r) {
    switch (r.op.kind) {
    case OpKind::Rew:
    case OpKind::Push: return r.op.letter;
    default: return r.letter;
    }
}

inline std::vector<LongForm> auxsat_consuming(const Rule& r, const StackAutomaton& a, const std::vector<State>& head) {
    const int n = a.order();
    const int k = r.op.order;
    std::vector<LongForm> out;
    State qp = head.at(r.src), qd = head.at(r.dst);
    if (r.op.kind == OpKind::Pop) {
        for (auto& [qk, sets] : a.prefix_chains(qd, k)) {
            LongForm t{qp, r.letter, {}, std::vector<StateSet>(n)};
            t.to[k - 1] = {qk};
            for (int j = k + 1; j <= n; ++j) t.to[j - 1] = sets[j - k - 1];
            out.push_back(std::move(t));
        }
    } else if (r.op.kind == OpKind::Collapse) {
        if (k == n) {
            out.push_back(LongForm{qp, r.letter, {qd}, std::vector<StateSet>(n)});
        } else {
            for (auto& [qk, sets] : a.prefix_chains(qd, k)) {
                LongForm t{qp, r.letter, {qk}, std::vector<StateSet>(n)};
                for (int j = k + 1; j <= n; ++j) t.to[j - 1] = sets[j - k - 1];
                out.push_back(std::move(t));
            }
        }
    }
    return out;
}

// t is a long form from the head of r.dst reading trigger_letter(r)
inline std::vector<LongForm> auxsat_generating(const Rule& r, const LongForm& t, const StackAutomaton& a,
                                               const std::vector<State>& head) {
    const int n = a.order();
    std::vector<LongForm> out;
    State qp = head.at(r.src);
    switch (r.op.kind) {
    case OpKind::Noop:
    case OpKind::Rew:
        out.push_back(LongForm{qp, r.letter, t.branch, t.to});
        break;
    case OpKind::Copy: {
        const int k = r.op.order;
        for (auto& f : a.set_forms(t.to[k - 1], k, r.letter)) {
            if (!t.branch.empty() && !f.branch.empty() &&
                a.state_order(t.branch.front()) != a.state_order(f.branch.front()))
                continue;
            LongForm u{qp, r.letter, set_union(t.branch, f.branch), t.to};
            for (int j = 1; j < k; ++j) u.to[j - 1] = set_union(t.to[j - 1], f.to[j - 1]);
            u.to[k - 1] = f.to[k - 1];
            out.push_back(std::move(u));
        }
        break;
    }
    case OpKind::Push: {
        const int k = r.op.order;
        if (k == 1 && !t.branch.empty()) break;
        if (k > 1 && !t.branch.empty() && a.state_order(t.branch.front()) != k) break;
        for (auto& f : a.set_forms(t.to[0], 1, r.letter)) {
            LongForm u{qp, r.letter, f.branch, t.to};
            u.to[0] = f.to[0];
            if (k > 1) u.to[k - 1] = set_union(t.to[k - 1], t.branch);
            out.push_back(std::move(u));
        }
        break;
    }
    default: break;
    }
    (void)n;
    return out;
}

// log2 of a generous ceiling on the number of transitions saturation may
// create, given the order-n states (fixed during saturation) and the initial
// lower-order states: each order-k target set spawns at most one label.
inline double log2_transition_cap(const StackAutomaton& a, std::size_t letters) {
    const int n = a.order();
    std::vector<double> cnt(n + 1, 0.0);
    for (State q = 0; q < a.num_states(); ++q) cnt[a.state_order(q)] += 1;
    // labels of order k-1: at most (#order-k states) * 2^(#order-k states)
    std::vector<double> lg(n + 1);
    lg[n] = std::log2(std::max(1.0, cnt[n]));
    for (int k = n; k >= 2; --k) {
        double fresh = lg[k] + std::exp2(std::min(lg[k], 1000.0));
        double base = std::log2(std::max(1.0, cnt[k - 1]));
        lg[k - 1] = std::max(fresh, base) + 1;
    }
    double all = 0;
    for (int k = 1; k <= n; ++k) all = std::max(all, lg[k]);
    double states = all + std::log2(double(n));
    // order-1 transitions: source * letter * branch set * target set
    double tr1 = lg[1] + std::log2(double(std::max<std::size_t>(letters, 1))) + std::exp2(std::min(states, 1000.0)) +
                 std::exp2(std::min(lg[1], 1000.0));
    return std::max(tr1, states) + 2;
}

// The non-alternation predicate used to pick the optimized mode: every
// order-n transition of a0 has at most one target, and no transition asks
// for two order-n obligations at once (an order-n branch next to a nonempty
// order-n target).
inline bool non_alternating_at_top(const StackAutomaton& a) {
    const int n = a.order();
    if (n < 2) return false;
    for (State q = 0; q < a.num_states(); ++q) {
        for (auto& [Q, lab] : a.out_hi(q))
            if (a.state_order(q) == n && Q.size() > 1) return false;
        if (a.state_order(q) != n) continue;
        for (auto& t : a.long_forms(q)) {
            std::size_t obligations = t.to[n - 1].size();
            for (State b : t.branch)
                if (a.state_order(b) == n) ++obligations;
            if (obligations > 1) return false;
        }
    }
    return true;
}

inline bool add_fresh(StackAutomaton& a, const std::vector<LongForm>& fresh, const SaturationOptions& opt,
                      std::size_t* added) {
    const int n = a.order();
    std::size_t before = a.num_transitions();
    bool changed = false;
    for (auto& t : fresh) {
        if (opt.mode == SatMode::Optimized && t.to[n - 1].size() > 1) continue;
        if (a.add_long_form(t)) {
            changed = true;
            if (added) ++*added;
        }
    }
    invariant(a.num_transitions() >= before, "saturation monotone");
    if (changed) invariant(a.num_transitions() > before, "productive iteration adds transitions");
    return changed;
}

using ExtraRule = std::function<std::vector<LongForm>(const StackAutomaton&, const std::vector<State>&)>;

// One saturation step: adds every long form derivable from the current
// automaton. Returns whether anything was added.
inline bool satstep(const std::vector<Rule>& rules, StackAutomaton& a, const std::vector<State>& head,
                    const SaturationOptions& opt = {}, const std::vector<ExtraRule>& extra = {},
                    std::size_t* added = nullptr) {
    std::vector<LongForm> fresh;
    std::map<std::pair<State, Letter>, std::vector<LongForm>> cache;
    for (auto& r : rules) {
        if (r.consuming()) {
            auto v = auxsat_consuming(r, a, head);
            fresh.insert(fresh.end(), v.begin(), v.end());
            continue;
        }
        auto key = std::make_pair(head.at(r.dst), trigger_letter(r));
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, a.long_forms(key.first, key.second)).first;
        for (auto& t : it->second) {
            auto v = auxsat_generating(r, t, a, head);
            fresh.insert(fresh.end(), v.begin(), v.end());
        }
    }
    for (auto& x : extra) {
        auto v = x(a, head);
        fresh.insert(fresh.end(), v.begin(), v.end());
    }
    return add_fresh(a, fresh, opt, added);
}

// Saturates a in place with the given rules. `extra` supplies further long
// forms per round (extended rules).
inline SaturationStats saturate(const std::vector<Rule>& rules, StackAutomaton& a, const std::vector<State>& head,
                                std::size_t letters, const SaturationOptions& opt = {},
                                const std::vector<ExtraRule>& extra = {}) {
    if (opt.check_initial) check_initial_states(a, head);
    SaturationOptions o = opt;
    if (o.mode == SatMode::Auto) o.mode = non_alternating_at_top(a) ? SatMode::Optimized : SatMode::Full;
    const double cap = log2_transition_cap(a, letters);
    SaturationStats st;
    for (;;) {
        ++st.iterations;
        // extended rules are costly, so they only run once the plain rules are stable
        bool changed = satstep(rules, a, head, o, {}, &st.added);
        if (!changed && !extra.empty()) {
            std::vector<LongForm> fresh;
            for (auto& x : extra) {
                auto v = x(a, head);
                fresh.insert(fresh.end(), v.begin(), v.end());
            }
            changed = add_fresh(a, fresh, o, &st.added);
        }
        invariant(std::log2(double(std::max<std::size_t>(a.num_transitions(), 1))) <= cap,
                  "saturation transition cap");
        if (!changed) break;
    }
    a.check_structure();
    st.optimized = o.mode == SatMode::Optimized;
    if (st.optimized) {
        for (State h : head)
            for (auto& [Q, lab] : a.out_hi(h)) invariant(Q.size() <= 1, "optimized mode |Q_n| <= 1");
    }
    return st;
}

inline PAutomaton prestar(const Mcpds& sys, const PAutomaton& a0, const SaturationOptions& opt = {},
                          SaturationStats* stats = nullptr, std::size_t stack = 0) {
    if (a0.order() != sys.order) throw OrderMismatch("automaton order differs from system order");
    if (a0.head.size() != sys.num_controls()) throw UnknownControl("automaton heads do not cover controls");
    PAutomaton a = a0;
    auto st = saturate(sys.stacks.at(stack), a.aut, a.head, sys.alphabet.size(), opt);
    if (stats) *stats = st;
    return a;
}

}
