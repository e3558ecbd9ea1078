#pragma once

// Phase-bounded reachability. Runs are split into phases that consume from a
// single stack. Working backward from the last phase, each phase is one pre*
// over the consuming stack in product with transition automata that follow the
// other stacks' generating updates.

#include <hocpds/regconf.hpp>
#include <hocpds/saturate.hpp>

#include <map>
#include <set>

namespace hocpds {

// Transition automaton of a stack that only generates during the phase. Its
// states are long forms of A from one head h; the head is implied by the
// product control, so every control maps to h. t1 -r-> t2 iff t1 is a pre of
// t2 under the generating rule r. Exits are the long forms of A from h.
struct PhaseTa {
    State head = 0;
    std::vector<LongForm> states;
    std::map<LongForm, std::size_t> id;
    std::vector<std::tuple<std::size_t, Rule, std::size_t>> edges;
    std::vector<std::size_t> exits;
};

inline PhaseTa phase_closure(const std::vector<Rule>& rules, const StackAutomaton& a, State h,
                             std::size_t controls) {
    PhaseTa ta;
    ta.head = h;
    std::vector<State> heads(controls, h);
    std::vector<std::size_t> todo;
    auto add = [&](const LongForm& t) {
        auto [it, fresh] = ta.id.emplace(t, ta.states.size());
        if (fresh) {
            ta.states.push_back(t);
            todo.push_back(it->second);
        }
        return it->second;
    };
    for (auto& t : a.long_forms(h)) ta.exits.push_back(add(t));
    while (!todo.empty()) {
        std::size_t i = todo.back();
        todo.pop_back();
        const LongForm t2 = ta.states[i];
        for (auto& r : rules) {
            if (r.consuming() || trigger_letter(r) != t2.letter) continue;
            for (auto& t1 : auxsat_generating(r, t2, a, heads)) ta.edges.emplace_back(add(t1), r, i);
        }
    }
    return ta;
}

struct PhaseStats {
    std::vector<std::size_t> tuples;  // per level, level 0 is the target
    std::size_t products = 0;
    std::size_t product_controls = 0;
    std::size_t memo_hits = 0;
};

class PhaseSolver {
public:
    PhaseSolver(const Mcpds& sys, SaturationOptions opt = {}) : sys_(sys), opt_(opt) {
        sys_.validate();
        if (sys_.num_stacks() > 1 && sys_.mode != Mode::Phase) throw PreconditionViolation("system is not phase-bounded");
    }

    const PhaseStats& stats() const { return stats_; }

    // ⟨q_out, anything⟩. Kept alive here: the memo is keyed on automaton
    // addresses.
    ConfigTuple target(Control qout) {
        if (auto it = targets_.find(qout); it != targets_.end()) return it->second;
        const int n = sys_.order;
        auto a = std::make_shared<StackAutomaton>(n);
        State h = a->add_state(n);
        for (Letter x = 0; x < sys_.alphabet.size(); ++x) a->add_long_form(LongForm{h, x, {}, std::vector<StateSet>(n)});
        ConfigTuple t{qout, {}, {}};
        for (std::size_t j = 0; j < sys_.num_stacks(); ++j) {
            t.auts.push_back(a);
            t.init.push_back(h);
        }
        return targets_.emplace(qout, t).first->second;
    }

    // Tuples at the start of a phase that consumes from stack s and ends in t.
    std::vector<ConfigTuple> phase_pre(const ConfigTuple& t, std::size_t s) {
        Key key{t.control, s, t.init, {}};
        for (auto& a : t.auts) key.auts.push_back(a.get());
        if (auto it = memo_.find(key); it != memo_.end()) {
            ++stats_.memo_hits;
            return it->second;
        }
        auto out = compute(t, s);
        memo_.emplace(std::move(key), out);
        return out;
    }

    // tuples of runs with at most `phases` phases; level i has i phases
    std::vector<std::vector<ConfigTuple>> levels(Control qout, unsigned phases,
                                                 const std::function<bool(const std::vector<ConfigTuple>&)>& stop = {}) {
        std::vector<std::vector<ConfigTuple>> lv{{target(qout)}};
        stats_.tuples = {1};
        for (unsigned i = 0; i < phases; ++i) {
            if (stop && stop(lv.back())) break;
            std::vector<ConfigTuple> next;
            std::set<std::tuple<Control, std::vector<const StackAutomaton*>, std::vector<State>>> seen;
            for (auto& t : lv.back())
                for (std::size_t s = 0; s < sys_.num_stacks(); ++s)
                    for (auto& u : phase_pre(t, s)) {
                        std::vector<const StackAutomaton*> ps;
                        for (auto& a : u.auts) ps.push_back(a.get());
                        if (seen.emplace(u.control, ps, u.init).second) next.push_back(std::move(u));
                    }
            stats_.tuples.push_back(next.size());
            lv.push_back(std::move(next));
        }
        return lv;
    }

    bool reachable(Control qin, Control qout, unsigned phases) {
        Stack bot = bottom_stack(sys_.order);
        auto hit = [&](const std::vector<ConfigTuple>& ts) {
            for (auto& t : ts) {
                if (t.control != qin) continue;
                bool all = true;
                for (std::size_t j = 0; j < t.auts.size() && all; ++j) all = accepts(*t.auts[j], t.init[j], bot);
                if (all) return true;
            }
            return false;
        };
        auto lv = levels(qout, phases, hit);
        return hit(lv.back());
    }

    // an empty phase repeats the previous level, so the last level covers all
    RegularConfigSet global(Control qout, unsigned phases) {
        auto lv = levels(qout, phases);
        RegularConfigSet out(sys_.order, sys_.num_stacks());
        for (auto& t : lv.back()) out.add(t);
        return out;
    }

private:
    struct Key {
        Control control;
        std::size_t stack;
        std::vector<State> init;
        std::vector<const StackAutomaton*> auts;
        auto operator<=>(const Key&) const = default;
    };

    std::vector<ConfigTuple> compute(const ConfigTuple& t, std::size_t s) {
        const std::size_t m = sys_.num_stacks();
        const int n = sys_.order;
        const std::size_t nq = sys_.num_controls();
        ++stats_.products;

        std::vector<PhaseTa> ta(m);
        std::vector<std::map<std::size_t, std::vector<std::pair<Rule, std::size_t>>>> into(m);  // t2 -> (r, t1)
        for (std::size_t j = 0; j < m; ++j) {
            if (j == s) continue;
            ta[j] = phase_closure(sys_.stacks[j], *t.auts[j], t.init[j], nq);
            for (auto& [t1, r, t2] : ta[j].edges) into[j][t2].push_back({r, t1});
        }

        // product controls (q, T-state per other stack; 0 for s), found
        // backward from the exits
        using PC = std::pair<Control, std::vector<std::size_t>>;
        std::map<PC, Control> pid;
        std::vector<PC> pcs;
        std::vector<std::size_t> todo;
        auto add = [&](PC c) {
            auto [it, fresh] = pid.emplace(c, static_cast<Control>(pcs.size()));
            if (fresh) {
                pcs.push_back(std::move(c));
                todo.push_back(pcs.size() - 1);
            }
            return it->second;
        };
        std::vector<Control> exits;
        {
            std::vector<std::vector<std::size_t>> combos{std::vector<std::size_t>(m, 0)};
            for (std::size_t j = 0; j < m; ++j) {
                if (j == s) continue;
                std::vector<std::vector<std::size_t>> next;
                for (auto& c : combos)
                    for (std::size_t e : ta[j].exits) {
                        next.push_back(c);
                        next.back()[j] = e;
                    }
                combos = std::move(next);
            }
            for (auto& c : combos) exits.push_back(add({t.control, c}));
        }
        struct Edge {
            Control from;
            Letter letter;  // kBottom with any == true stands for every letter
            bool any;
            StackOp op;
            Control to;
        };
        std::vector<Edge> edges;
        while (!todo.empty()) {
            std::size_t i = todo.back();
            todo.pop_back();
            PC c = pcs[i];
            for (auto& r : sys_.stacks[s]) {
                if (r.dst != c.first) continue;
                Control from = add({r.src, c.second});
                edges.push_back({from, r.letter, false, r.op, static_cast<Control>(i)});
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (j == s) continue;
                auto it = into[j].find(c.second[j]);
                if (it == into[j].end()) continue;
                for (auto& [r, t1] : it->second) {
                    if (r.dst != c.first) continue;
                    PC d{r.src, c.second};
                    d.second[j] = t1;
                    Control from = add(std::move(d));
                    edges.push_back({from, kBottom, true, StackOp::noop(), static_cast<Control>(i)});
                }
            }
        }

        Mcpds p;
        p.order = n;
        p.alphabet = sys_.alphabet;
        p.stacks.assign(1, {});
        for (auto& c : pcs) {
            std::string name = sys_.controls.at(c.first);
            for (std::size_t j = 0; j < m; ++j)
                if (j != s) name += "#" + std::to_string(c.second[j]);
            p.controls.push_back(name);
        }
        const Control exitc = static_cast<Control>(p.controls.size());
        p.controls.push_back("$exit");
        std::set<Rule> rules;
        for (auto& e : edges) {
            if (!e.any) {
                rules.insert(Rule{e.from, e.letter, e.op, e.to});
                continue;
            }
            for (Letter a = 0; a < p.alphabet.size(); ++a) rules.insert(Rule{e.from, a, e.op, e.to});
        }
        for (Control x : exits)
            for (Letter a = 0; a < p.alphabet.size(); ++a) rules.insert(Rule{x, a, StackOp::noop(), exitc});
        p.stacks[0].assign(rules.begin(), rules.end());
        stats_.product_controls += p.num_controls();

        PAutomaton a0(n, p.num_controls());
        auto map = import_automaton(a0.aut, *t.auts[s]);
        auto mapset = [&](const StateSet& S) {
            std::vector<State> v;
            for (State q : S) v.push_back(map.at(q));
            return make_set(std::move(v));
        };
        for (auto& lf : t.auts[s]->long_forms(t.init[s])) {
            LongForm u{a0.head[exitc], lf.letter, mapset(lf.branch), {}};
            for (auto& Q : lf.to) u.to.push_back(mapset(Q));
            a0.aut.add_long_form(u);
        }
        PAutomaton res = prestar(p, a0, opt_);
        auto pre = std::make_shared<const StackAutomaton>(std::move(res.aut));

        // the other stacks gain one fresh initial transition per T-state
        std::vector<std::shared_ptr<const StackAutomaton>> ext(m);
        std::vector<std::vector<State>> fresh(m);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == s) continue;
            auto a = std::make_shared<StackAutomaton>(*t.auts[j]);
            for (auto& lf : ta[j].states) {
                State h = a->add_state(n);
                a->add_long_form(LongForm{h, lf.letter, lf.branch, lf.to});
                fresh[j].push_back(h);
            }
            ext[j] = a;
        }

        Emptiness em(*pre);
        std::vector<std::optional<Emptiness>> ext_em(m);
        for (std::size_t j = 0; j < m; ++j)
            if (j != s) ext_em[j].emplace(*ext[j]);
        std::vector<ConfigTuple> out;
        for (Control c = 0; c < pcs.size(); ++c) {
            if (!em.nonempty(res.head[c])) continue;
            bool empty = false;
            for (std::size_t j = 0; j < m && !empty; ++j)
                if (j != s) empty = !ext_em[j]->nonempty(fresh[j][pcs[c].second[j]]);
            if (empty) continue;
            ConfigTuple u{pcs[c].first, std::vector<std::shared_ptr<const StackAutomaton>>(m), std::vector<State>(m)};
            for (std::size_t j = 0; j < m; ++j) {
                if (j == s) {
                    u.auts[j] = pre;
                    u.init[j] = res.head[c];
                } else {
                    u.auts[j] = ext[j];
                    u.init[j] = fresh[j][pcs[c].second[j]];
                }
            }
            out.push_back(std::move(u));
        }
        return out;
    }

    Mcpds sys_;
    SaturationOptions opt_;
    PhaseStats stats_;
    std::map<Key, std::vector<ConfigTuple>> memo_;
    std::map<Control, ConfigTuple> targets_;
};

inline bool phase_reachability(const Mcpds& sys, unsigned phases, Control qin, Control qout,
                               SaturationOptions opt = {}) {
    PhaseSolver s(sys, opt);
    return s.reachable(qin, qout, phases);
}

inline RegularConfigSet phase_global(const Mcpds& sys, unsigned phases, Control qout, SaturationOptions opt = {}) {
    PhaseSolver s(sys, opt);
    return s.global(qout, phases);
}

}
