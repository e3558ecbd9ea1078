#pragma once

// Scope-bounded reachability. Layered automata track a stack across the
// rounds in scope; a backward search over the reachability graph prepends
// one round per edge.

#include <hocpds/regconf.hpp>
#include <hocpds/saturate.hpp>

#include <cmath>
#include <deque>
#include <functional>
#include <map>

namespace hocpds {

// Order-n states are q_c^l for layers l = 1..L and controls c, numbered
// (l-1)*|Q| + c. A lower-order state lives in the layer of the transition it
// labels. L is the scope bound plus one: material created in round z is read
// in round z+d through layer d+1.
class LayeredAutomaton {
public:
    LayeredAutomaton(int n, std::size_t controls, unsigned layers) : aut_(n), controls_(controls), layers_(layers) {
        for (std::size_t i = 0; i < controls * layers; ++i) aut_.add_state(n);
    }

    int order() const { return aut_.order(); }
    std::size_t controls() const { return controls_; }
    unsigned layers() const { return layers_; }
    const StackAutomaton& aut() const { return aut_; }
    StackAutomaton& aut() { return aut_; }

    State head(unsigned l, Control c) const { return static_cast<State>((l - 1) * controls_ + c); }
    std::vector<State> heads(unsigned l) const {
        std::vector<State> h;
        for (Control c = 0; c < controls_; ++c) h.push_back(head(l, c));
        return h;
    }

    // layer per state; 0 for lower-order states no transition labels
    std::vector<unsigned> layer_of() const {
        std::vector<unsigned> lay(aut_.num_states(), 0);
        const int n = order();
        for (State s = 0; s < controls_ * layers_; ++s) lay[s] = 1 + s / static_cast<State>(controls_);
        for (int k = n; k >= 2; --k)
            for (State s = 0; s < aut_.num_states(); ++s) {
                if (aut_.state_order(s) != k || !lay[s]) continue;
                for (auto& [Q, lab] : aut_.out_hi(s)) {
                    invariant(lay[lab] == 0 || lay[lab] == lay[s], "layered: label in one layer");
                    lay[lab] = lay[s];
                }
            }
        return lay;
    }

    // no transition reaches into a strictly lower layer
    void check_layering() const {
        auto lay = layer_of();
        auto ok = [&](unsigned l, const StateSet& S) {
            for (State x : S)
                if (lay[x] < l) return false;
            return true;
        };
        for (State s = 0; s < aut_.num_states(); ++s) {
            if (!lay[s]) continue;
            for (auto& [Q, lab] : aut_.out_hi(s)) invariant(ok(lay[s], Q), "layered: no edge into a lower layer");
            for (auto& t : aut_.out1(s)) {
                invariant(ok(lay[s], t.to), "layered: no edge into a lower layer");
                invariant(ok(lay[s], t.branch), "layered: no edge into a lower layer");
            }
        }
    }

private:
    StackAutomaton aut_;
    std::size_t controls_;
    unsigned layers_;
};

namespace detail {

// Copies a with layers renamed by f. A transition touching a state whose
// layer f drops is dropped with it.
inline LayeredAutomaton relayer(const LayeredAutomaton& a, const std::function<std::optional<unsigned>(unsigned)>& f) {
    const int n = a.order();
    const std::size_t nq = a.controls();
    LayeredAutomaton b(n, nq, a.layers());
    const auto& A = a.aut();
    auto lay = a.layer_of();
    std::vector<std::optional<State>> ren(A.num_states());
    for (State s = 0; s < A.num_states(); ++s) {
        if (!lay[s]) continue;
        auto l = f(lay[s]);
        if (!l) continue;
        ren[s] = A.state_order(s) == n ? b.head(*l, s % static_cast<State>(nq)) : b.aut().add_state(A.state_order(s));
    }
    auto map = [&](const StateSet& S) -> std::optional<StateSet> {
        StateSet r;
        for (State x : S) {
            if (!ren[x]) return std::nullopt;
            r.push_back(*ren[x]);
        }
        return make_set(std::move(r));
    };
    for (State s = 0; s < A.num_states(); ++s) {
        if (!ren[s]) continue;
        for (auto& [Q, lab] : A.out_hi(s)) {
            auto Q2 = map(Q);
            if (Q2 && ren[lab]) b.aut().add_hi(*ren[s], *Q2, *ren[lab]);
        }
        for (auto& t : A.out1(s)) {
            auto br = map(t.branch);
            auto to = map(t.to);
            if (br && to) b.aut().add1(*ren[s], t.letter, *br, *to);
        }
    }
    return b;
}

}

// layer l moves to l+1; the last layer goes out of scope
inline LayeredAutomaton shift(const LayeredAutomaton& a) {
    const unsigned L = a.layers();
    auto b = detail::relayer(a, [L](unsigned l) -> std::optional<unsigned> {
        if (l >= L) return std::nullopt;
        return l + 1;
    });
    b.check_layering();
    return b;
}

// Drops everything in the last layer. Initial material read in round d sits
// in layer d, and the bound allows d <= L-1.
inline LayeredAutomaton truncate_last_layer(const LayeredAutomaton& a) {
    const unsigned L = a.layers();
    return detail::relayer(a, [L](unsigned l) -> std::optional<unsigned> {
        if (l >= L) return std::nullopt;
        return l;
    });
}

// the other stacks move the control from c1 (this round) to c2 (next round)
inline void envmove(LayeredAutomaton& a, Control c1, Control c2) {
    if (a.layers() < 2) return;
    State q = a.head(1, c1);
    for (auto& t : a.aut().long_forms(a.head(2, c2))) a.aut().add_long_form(LongForm{q, t.letter, t.branch, t.to});
}

inline SaturationStats saturate_layer(const Mcpds& sys, std::size_t j, LayeredAutomaton& a,
                                      const SaturationOptions& opt = {}) {
    auto st = saturate(sys.stacks.at(j), a.aut(), a.heads(1), sys.alphabet.size(), opt);
    a.check_layering();
    return st;
}

// Canonical form: order-n states keep their fixed names, a lower-order state
// is named by the transition it labels, and everything no head reaches is
// dropped. Equal codes mean equal automata.
struct CanonicalLayered {
    LayeredAutomaton aut;
    std::vector<std::uint32_t> code;
};

inline CanonicalLayered canonicalize(const LayeredAutomaton& a) {
    const int n = a.order();
    const auto& A = a.aut();
    const std::size_t nn = a.controls() * a.layers();
    std::vector<std::int64_t> cid(A.num_states(), -1);
    for (State s = 0; s < nn; ++s) cid[s] = s;
    auto canon = [&](const StateSet& S) {
        std::vector<std::uint32_t> v;
        for (State x : S) {
            invariant(cid[x] >= 0, "canonical form: target reachable from a head");
            v.push_back(static_cast<std::uint32_t>(cid[x]));
        }
        std::sort(v.begin(), v.end());
        return v;
    };
    std::vector<std::uint32_t> code{static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(a.controls()),
                                    a.layers()};
    LayeredAutomaton b(n, a.controls(), a.layers());
    // states of b per order, by canonical index
    std::vector<std::vector<State>> bstate(n + 1);
    for (State s = 0; s < nn; ++s) bstate[n].push_back(s);
    std::vector<std::vector<State>> by_cid(n + 1);
    for (State s = 0; s < nn; ++s) by_cid[n].push_back(s);
    for (int k = n; k >= 2; --k) {
        std::vector<std::tuple<std::uint32_t, std::vector<std::uint32_t>, State, StateSet>> es;
        for (std::size_t i = 0; i < by_cid[k].size(); ++i)
            for (auto& [Q, lab] : A.out_hi(by_cid[k][i])) es.emplace_back(static_cast<std::uint32_t>(i), canon(Q), lab, Q);
        std::sort(es.begin(), es.end(), [](auto& x, auto& y) {
            return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y));
        });
        code.push_back(static_cast<std::uint32_t>(es.size()));
        for (auto& [p, Q, lab, raw] : es) {
            invariant(cid[lab] < 0, "canonical form: labels are not shared");
            cid[lab] = static_cast<std::int64_t>(by_cid[k - 1].size());
            by_cid[k - 1].push_back(lab);
            State nl = b.aut().add_state(k - 1);
            bstate[k - 1].push_back(nl);
            StateSet Qb;
            for (auto x : Q) Qb.push_back(bstate[k][x]);
            b.aut().add_hi(bstate[k][p], make_set(std::move(Qb)), nl);
            code.push_back(p);
            code.push_back(static_cast<std::uint32_t>(Q.size()));
            code.insert(code.end(), Q.begin(), Q.end());
        }
    }
    for (std::size_t i = 0; i < by_cid[1].size(); ++i) {
        std::vector<std::tuple<Letter, std::uint32_t, std::vector<std::uint32_t>, std::vector<std::uint32_t>>> ts;
        for (auto& t : A.out1(by_cid[1][i])) {
            std::uint32_t bo = t.branch.empty() ? 0 : static_cast<std::uint32_t>(A.state_order(t.branch.front()));
            ts.emplace_back(t.letter, bo, canon(t.branch), canon(t.to));
        }
        std::sort(ts.begin(), ts.end());
        code.push_back(static_cast<std::uint32_t>(ts.size()));
        for (auto& [x, bo, br, to] : ts) {
            StateSet bb, tb;
            for (auto y : br) bb.push_back(bstate[bo][y]);
            for (auto y : to) tb.push_back(bstate[1][y]);
            b.aut().add1(bstate[1][i], x, make_set(std::move(bb)), make_set(std::move(tb)));
            code.push_back(x);
            code.push_back(bo);
            code.push_back(static_cast<std::uint32_t>(br.size()));
            code.insert(code.end(), br.begin(), br.end());
            code.push_back(static_cast<std::uint32_t>(to.size()));
            code.insert(code.end(), to.begin(), to.end());
        }
    }
    return {std::move(b), std::move(code)};
}

// Ceiling on the states of a layered automaton (saturating at 2^62). The
// restricted mode follows the layer-automaton size lemma: c = L|Q| states of
// order n, c*c of order n-1, then s*2^s per further order. Full saturation
// allows every subset at order n, so order n-1 starts from c*2^c.
inline std::uint64_t sbmax(unsigned layers, std::size_t controls, int n, bool restricted = true) {
    const double cap = std::ldexp(1.0, 62);
    double c = double(layers) * double(controls);
    double total = c;
    double s = n >= 2 ? (restricted ? c * c : c * std::exp2(std::min(c, 62.0))) : 0;
    for (int k = n - 1; k >= 1; --k) {
        total += s;
        if (total >= cap) return std::uint64_t(cap);
        s = s * std::exp2(std::min(s, 62.0));
    }
    // order-1 automata: every state is an order-n state
    return std::uint64_t(std::min(total, cap));
}

struct ReachVertex {
    std::vector<Control> q;                   // q_0 .. q_m
    std::vector<std::size_t> a;               // interned automata A_1 .. A_m
    auto operator<=>(const ReachVertex&) const = default;
};

struct ScopeStats {
    std::size_t vertices = 0;
    std::size_t initial = 0;
    std::size_t edges = 0;
    std::size_t automata = 0;
    std::size_t predecessors = 0;
    std::size_t max_states = 0;
};

class ScopeSolver {
public:
    ScopeSolver(const Mcpds& sys, unsigned zeta, SaturationOptions opt = {}, std::size_t vertex_budget = 200000)
        : sys_(sys), layers_(zeta + 1), opt_(opt), budget_(vertex_budget) {
        sys_.validate();
        if (zeta == 0) throw PreconditionViolation("scope bound must be positive");
        if (sys_.num_stacks() > 1 && sys_.mode != Mode::Scope) throw PreconditionViolation("system is not scope-bounded");
    }

    const ScopeStats& stats() const { return stats_; }
    unsigned layers() const { return layers_; }
    const LayeredAutomaton& automaton(std::size_t id) const { return *auts_.at(id); }

    std::size_t intern(const LayeredAutomaton& a) {
        auto c = canonicalize(a);
        auto it = ids_.find(c.code);
        if (it != ids_.end()) return it->second;
        std::size_t n = c.aut.aut().num_states();
        stats_.max_states = std::max(stats_.max_states, n);
        invariant(n <= sbmax(layers_, sys_.num_controls(), sys_.order, false), "layered automaton within sbmax");
        auts_.push_back(std::make_shared<const LayeredAutomaton>(std::move(c.aut)));
        adm_.emplace_back();
        ids_.emplace(std::move(c.code), auts_.size() - 1);
        stats_.automata = auts_.size();
        return auts_.size() - 1;
    }

    // whether some stack is accepted from q_c^1
    bool admissible(std::size_t id, Control c) {
        if (adm_[id].empty()) {
            Emptiness em(auts_[id]->aut());
            for (Control x = 0; x < sys_.num_controls(); ++x) adm_[id].push_back(em.nonempty(auts_[id]->head(1, x)));
        }
        return adm_[id][c];
    }

    // saturation of "anything at control c" by the rules of stack j
    std::size_t initial_automaton(std::size_t j, Control c) {
        auto key = std::make_tuple(j, c);
        if (auto it = init_memo_.find(key); it != init_memo_.end()) return it->second;
        LayeredAutomaton a(sys_.order, sys_.num_controls(), layers_);
        for (Letter x = 0; x < sys_.alphabet.size(); ++x)
            a.aut().add_long_form(LongForm{a.head(1, c), x, {}, std::vector<StateSet>(sys_.order)});
        saturate_layer(sys_, j, a, opt_);
        return init_memo_[key] = intern(a);
    }

    std::size_t predecessor(std::size_t j, std::size_t id, Control c, Control c2) {
        auto key = std::make_tuple(j, id, c, c2);
        if (auto it = pred_memo_.find(key); it != pred_memo_.end()) return it->second;
        ++stats_.predecessors;
        LayeredAutomaton a = shift(*auts_[id]);
        envmove(a, c, c2);
        saturate_layer(sys_, j, a, opt_);
        return pred_memo_[key] = intern(a);
    }

    std::vector<ReachVertex> initial_vertices(Control qout) {
        std::vector<ReachVertex> out;
        const std::size_t m = sys_.num_stacks();
        ReachVertex v{std::vector<Control>(m + 1), std::vector<std::size_t>(m)};
        v.q[m] = qout;
        chains(v, m, [&](std::size_t i, Control qi) { return initial_automaton(i - 1, qi); }, out);
        return out;
    }

    // vertices of the round before v
    std::vector<ReachVertex> predecessors(const ReachVertex& v) {
        std::vector<ReachVertex> out;
        const std::size_t m = sys_.num_stacks();
        ReachVertex u{std::vector<Control>(m + 1), std::vector<std::size_t>(m)};
        u.q[m] = v.q[0];
        chains(u, m, [&](std::size_t i, Control qi) { return predecessor(i - 1, v.a[i - 1], qi, v.q[i - 1]); }, out);
        return out;
    }

    // Backward search from the initial vertices. `visit` may stop the search
    // by returning true.
    void explore(Control qout, const std::function<bool(const ReachVertex&)>& visit) {
        std::map<ReachVertex, std::size_t> seen;
        std::deque<ReachVertex> todo;
        auto add = [&](ReachVertex v) {
            if (seen.count(v)) return false;
            if (seen.size() >= budget_) throw VertexBudgetExceeded("reachability graph over budget");
            seen.emplace(v, seen.size());
            stats_.vertices = seen.size();
            todo.push_back(v);
            return visit(v);
        };
        auto init = initial_vertices(qout);
        stats_.initial = init.size();
        for (auto& v : init)
            if (add(v)) return;
        while (!todo.empty()) {
            ReachVertex v = todo.front();
            todo.pop_front();
            for (auto& u : predecessors(v)) {
                ++stats_.edges;
                if (add(std::move(u))) return;
            }
        }
    }

    // A_i truncated, read from q_{i-1}
    std::shared_ptr<const StackAutomaton> truncated(std::size_t id) {
        if (auto it = trunc_.find(id); it != trunc_.end()) return it->second;
        auto t = std::make_shared<const StackAutomaton>(truncate_last_layer(*auts_[id]).aut());
        return trunc_[id] = t;
    }

    bool reachable(Control qin, Control qout) {
        Stack bot = bottom_stack(sys_.order);
        bool found = false;
        explore(qout, [&](const ReachVertex& v) {
            if (v.q[0] != qin) return false;
            for (std::size_t i = 0; i < v.a.size(); ++i)
                if (!accepts(*truncated(v.a[i]), auts_[v.a[i]]->head(1, v.q[i]), bot)) return false;
            return found = true;
        });
        return found;
    }

    RegularConfigSet global(Control qout) {
        RegularConfigSet out(sys_.order, sys_.num_stacks());
        std::set<std::pair<Control, std::vector<std::pair<std::size_t, Control>>>> seen;
        explore(qout, [&](const ReachVertex& v) {
            std::vector<std::pair<std::size_t, Control>> key;
            for (std::size_t i = 0; i < v.a.size(); ++i) key.push_back({v.a[i], v.q[i]});
            if (!seen.emplace(v.q[0], key).second) return false;
            ConfigTuple t{v.q[0], {}, {}};
            for (std::size_t i = 0; i < v.a.size(); ++i) {
                t.auts.push_back(truncated(v.a[i]));
                t.init.push_back(auts_[v.a[i]]->head(1, v.q[i]));
            }
            out.add(std::move(t));
            return false;
        });
        return out;
    }

    std::string graph_dot(Control qout) {
        std::map<ReachVertex, std::size_t> id;
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        auto name = [&](const ReachVertex& v) {
            auto [it, fresh] = id.emplace(v, id.size());
            return it->second;
        };
        explore(qout, [&](const ReachVertex& v) {
            name(v);
            return false;
        });
        for (auto& [v, i] : std::map<ReachVertex, std::size_t>(id))
            for (auto& u : predecessors(v))
                if (id.count(u)) edges.push_back({id.at(u), i});
        std::string s = "digraph reach {\n";
        for (auto& [v, i] : id) {
            s += "  v" + std::to_string(i) + " [label=\"";
            for (std::size_t k = 0; k < v.q.size(); ++k) {
                if (k) s += " A" + std::to_string(v.a[k - 1]) + " ";
                s += sys_.controls.at(v.q[k]);
            }
            s += "\"];\n";
        }
        std::sort(edges.begin(), edges.end());
        for (auto& [a, b] : edges) s += "  v" + std::to_string(a) + " -> v" + std::to_string(b) + ";\n";
        return s + "}\n";
    }

private:
    // Fills q_{i-1} .. q_0 with A_i = f(i, q_i) and q_{i-1} admissible for A_i.
    void chains(ReachVertex& v, std::size_t i, const std::function<std::size_t(std::size_t, Control)>& f,
                std::vector<ReachVertex>& out) {
        if (i == 0) {
            out.push_back(v);
            return;
        }
        std::size_t a = f(i, v.q[i]);
        v.a[i - 1] = a;
        for (Control c = 0; c < sys_.num_controls(); ++c) {
            if (!admissible(a, c)) continue;
            v.q[i - 1] = c;
            chains(v, i - 1, f, out);
        }
    }

    Mcpds sys_;
    unsigned layers_;
    SaturationOptions opt_;
    std::size_t budget_;
    ScopeStats stats_;
    std::vector<std::shared_ptr<const LayeredAutomaton>> auts_;
    std::vector<std::vector<bool>> adm_;
    std::map<std::vector<std::uint32_t>, std::size_t> ids_;
    std::map<std::tuple<std::size_t, Control>, std::size_t> init_memo_;
    std::map<std::tuple<std::size_t, std::size_t, Control, Control>, std::size_t> pred_memo_;
    std::map<std::size_t, std::shared_ptr<const StackAutomaton>> trunc_;
};

inline bool scope_reachability(const Mcpds& sys, unsigned zeta, Control qin, Control qout,
                               SaturationOptions opt = {}) {
    ScopeSolver s(sys, zeta, opt);
    return s.reachable(qin, qout);
}

inline RegularConfigSet scope_global(const Mcpds& sys, unsigned zeta, Control qout, SaturationOptions opt = {}) {
    ScopeSolver s(sys, zeta, opt);
    return s.global(qout);
}

}
