#pragma once

// Ordered multi-stack reachability by induction on the number of stacks.
// The top stack is handled by an extended CPDS whose extended rules stand
// for the stretches where some lower stack is nonempty; those languages are
// decided on a product with one stack fewer.

#include <hocpds/ecpds.hpp>
#include <hocpds/regconf.hpp>

namespace hocpds {

// A rule of the left automaton: controls are (control, tracked top letter of
// the top stack), `out` is the rule emitted for the top stack.
struct LeftRule {
    Control src;
    Letter tracked;
    Letter letter;
    Rule out;
    StackOp op;
    Control dst;
    Letter tracked_dst;
    std::size_t stack;
};

struct LeftCpda {
    std::size_t stacks = 0;
    std::vector<LeftRule> rules;
    std::map<Rule, std::vector<std::size_t>> by_output;
};

inline LeftCpda build_leftcpda(const Mcpds& sys) {
    const std::size_t m = sys.num_stacks();
    if (m < 2) throw PreconditionViolation("left automaton needs at least two stacks");
    LeftCpda l;
    l.stacks = m - 1;
    auto letters = sys.alphabet.letters();
    for (auto& r : sys.stacks[m - 1]) {
        if (r.consuming()) continue;
        Letter after = (r.op.kind == OpKind::Rew || r.op.kind == OpKind::Push) ? r.op.letter : r.letter;
        for (Letter b : letters) l.rules.push_back(LeftRule{r.src, r.letter, b, r, StackOp::noop(), r.dst, after, 0});
    }
    for (std::size_t j = 0; j + 1 < m; ++j)
        for (auto& r : sys.stacks[j])
            for (Letter a : letters)
                l.rules.push_back(LeftRule{r.src, a, r.letter, Rule{r.src, a, StackOp::noop(), r.dst}, r.op, r.dst, a, j});
    for (std::size_t i = 0; i < l.rules.size(); ++i) l.by_output[l.rules[i].out].push_back(i);
    return l;
}

// Rules of a lower stack that fire on ⊥ when every lower stack is ⊥_n either
// keep them empty (a control move) or start a stretch with nonempty stacks.
struct BottomRule {
    Rule rule;
    std::size_t stack;
    Stack start;  // rule.op applied to ⊥_n
};

inline std::pair<std::vector<Rule>, std::vector<BottomRule>> bottom_rules(const Mcpds& sys) {
    std::vector<Rule> moves;
    std::vector<BottomRule> opens;
    const Stack bot = bottom_stack(sys.order);
    for (std::size_t j = 0; j + 1 < sys.num_stacks(); ++j)
        for (auto& r : sys.stacks[j]) {
            if (r.letter != kBottom) continue;
            auto w = try_apply(r.op, bot);
            if (!w) continue;
            if (*w == bot) moves.push_back(r);
            else opens.push_back(BottomRule{r, j, *w});
        }
    return {moves, opens};
}

// Closure of a set of target long forms under the backward edges of the
// transition automaton, restricted to the rules the left automaton emits.
struct TaClosure {
    std::vector<LongForm> states;
    std::map<LongForm, std::size_t> id;
    std::vector<std::tuple<std::size_t, Rule, std::size_t>> edges;  // t1 -r-> t2
};

inline TaClosure ta_closure(const std::vector<LongForm>& targets, const LeftCpda& left, const StackAutomaton& a,
                            const std::vector<State>& head) {
    TaClosure c;
    std::map<std::pair<State, Letter>, std::vector<Rule>> outs;
    for (auto& [r, idx] : left.by_output) outs[{head.at(r.dst), trigger_letter(r)}].push_back(r);
    std::vector<std::size_t> todo;
    auto add = [&](const LongForm& t) {
        auto [it, fresh] = c.id.emplace(t, c.states.size());
        if (fresh) {
            c.states.push_back(t);
            todo.push_back(it->second);
        }
        return it->second;
    };
    for (auto& t : targets) add(t);
    while (!todo.empty()) {
        std::size_t i = todo.back();
        todo.pop_back();
        const LongForm t2 = c.states[i];
        auto it = outs.find({t2.head, t2.letter});
        if (it == outs.end()) continue;
        for (auto& r : it->second)
            for (auto& t1 : auxsat_generating(r, t2, a, head)) c.edges.emplace_back(add(t1), r, i);
    }
    return c;
}

// The lower stacks run in product with the transition automaton; product
// controls are closure states (the left control and tracked letter are the
// long form's control and letter), followed by `extra` named controls.
inline Mcpds left_product(const Mcpds& sys, const LeftCpda& left, const TaClosure& c, const std::vector<State>& head,
                          const std::vector<std::string>& extra) {
    std::map<State, Control> ctrl;
    for (Control q = 0; q < head.size(); ++q) ctrl[head[q]] = q;
    Mcpds p;
    p.order = sys.order;
    p.alphabet = sys.alphabet;
    p.mode = Mode::Ordered;
    p.stacks.assign(left.stacks, {});
    for (std::size_t i = 0; i < c.states.size(); ++i)
        p.controls.push_back(sys.controls.at(ctrl.at(c.states[i].head)) + "#" + std::to_string(i));
    for (auto& x : extra) p.controls.push_back(x);
    std::set<std::pair<std::size_t, Rule>> seen;
    for (auto& [t1, r, t2] : c.edges) {
        auto it = left.by_output.find(r);
        if (it == left.by_output.end()) continue;
        for (std::size_t li : it->second) {
            const LeftRule& lr = left.rules[li];
            Rule pr{static_cast<Control>(t1), lr.letter, lr.op, static_cast<Control>(t2)};
            if (seen.emplace(lr.stack, pr).second) p.stacks[lr.stack].push_back(pr);
        }
    }
    return p;
}

class OrderedSolver;

// Words of the left automaton from (q1, a) with the opening rule's stack
// started, to all lower stacks empty at some exit control, prefixed by the
// control move (q, a, noop, q1) of the opening rule. Sources for different
// exits are added alike, so one language covers them all. Answered in batch:
// one product per automaton version serves every letter.
class CpdaLanguage : public Language {
public:
    CpdaLanguage(std::shared_ptr<const LeftCpda> left, const Mcpds* sys, BottomRule open, std::vector<Control> exits,
                 OrderedSolver* solver)
        : left_(std::move(left)), sys_(sys), open_(std::move(open)), exits_(std::move(exits)), solver_(solver) {}

    std::string name() const override {
        return "L(" + sys_->controls.at(open_.rule.dst) + ",stack " + std::to_string(open_.stack + 1) + ")";
    }

    const std::vector<Control>& exits() const { return exits_; }

    std::vector<LongForm> sources(const ExtRule& r, const LongForm& target, const StackAutomaton& a,
                                  const std::vector<State>& head) const override {
        for (Control q2 : exits_)
            if (target.head == head.at(q2)) return finish(r, solve({target}, a, head), head);
        return {};
    }

    std::vector<LongForm> sources_all(const ExtRule& r, const StackAutomaton& a,
                                      const std::vector<State>& head) const override {
        auto it = memo_.find(a.version());
        if (it == memo_.end()) {
            memo_.clear();
            std::vector<LongForm> targets;
            for (Control q2 : exits_)
                for (auto& t : a.long_forms(head.at(q2))) targets.push_back(t);
            it = memo_.emplace(a.version(), solve(targets, a, head)).first;
        }
        return finish(r, it->second, head);
    }

private:
    // sources at the opening rule's target control q1
    std::vector<LongForm> solve(const std::vector<LongForm>& targets, const StackAutomaton& a,
                                const std::vector<State>& head) const;

    // the noop prefix moves q1 back to the rule's control
    static std::vector<LongForm> finish(const ExtRule& r, const std::vector<LongForm>& v,
                                        const std::vector<State>& head) {
        std::vector<LongForm> out;
        for (auto& t : v)
            if (t.letter == r.letter) out.push_back(LongForm{head.at(r.src), t.letter, t.branch, t.to});
        return out;
    }

    std::shared_ptr<const LeftCpda> left_;
    const Mcpds* sys_;
    BottomRule open_;
    std::vector<Control> exits_;
    OrderedSolver* solver_;
    mutable std::map<std::uint64_t, std::vector<LongForm>> memo_;
};

// ⟨q_end, ⊥..⊥⟩ is reachable iff q_out is: q_out may move to q_end, which
// pops every stack down to ⊥_n.
inline Mcpds with_clearing(const Mcpds& sys, Control qout, Control* qend) {
    Mcpds s = sys;
    Control e = static_cast<Control>(s.controls.size());
    s.controls.push_back("$end");
    for (Letter a : s.alphabet.letters()) {
        s.stacks[0].push_back(Rule{qout, a, StackOp::noop(), e});
        for (auto& rs : s.stacks)
            for (int k = 1; k <= s.order; ++k) rs.push_back(Rule{e, a, StackOp::pop(k), e});
    }
    *qend = e;
    return s;
}

struct OrderedStats {
    std::size_t language_queries = 0;
    std::size_t product_controls = 0;
    std::size_t max_depth = 0;
};

class OrderedSolver {
public:
    explicit OrderedSolver(SaturationOptions opt = {}) : opt_(opt) {}

    const OrderedStats& stats() const { return stats_; }

    // the single-stack system on the top stack with extended rules for the
    // stretches where lower stacks are nonempty
    Ecpds build_rightcpds(const Mcpds& sys) {
        const std::size_t m = sys.num_stacks();
        Ecpds e;
        e.sys = sys;
        e.sys.mode = Mode::Single;
        e.sys.stacks = {sys.stacks[m - 1]};
        if (m == 1) return e;
        auto left = std::make_shared<const LeftCpda>(build_leftcpda(sys));
        auto [moves, opens] = bottom_rules(sys);
        for (auto& r : moves)
            for (Letter a : sys.alphabet.letters()) e.sys.stacks[0].push_back(Rule{r.src, a, StackOp::noop(), r.dst});
        // lower stacks only become empty again after a pop or collapse there
        std::set<Control> exit_set;
        for (std::size_t i = 0; i + 1 < m; ++i)
            for (auto& r : sys.stacks[i])
                if (r.op.kind == OpKind::Pop || r.op.kind == OpKind::Collapse) exit_set.insert(r.dst);
        std::vector<Control> exits(exit_set.begin(), exit_set.end());
        if (exits.empty()) return e;
        for (auto& o : opens) {
            auto lang = std::make_shared<CpdaLanguage>(left, &sys, o, exits, this);
            for (Letter a : sys.alphabet.letters()) e.ext.push_back(ExtRule{o.rule.src, a, lang, exits.front()});
        }
        return e;
    }

    // P-automaton over the top stack: ⟨q, ⊥_n .. ⊥_n, w⟩ reaches ⟨target, ⊥_n .. ⊥_n⟩
    PAutomaton top_prestar(const Mcpds& sys, Control target) {
        sys.validate();
        if (sys.num_stacks() > 1 && sys.mode != Mode::Ordered) throw PreconditionViolation("system is not ordered");
        if (++depth_ > 64) throw RecursionDepthExceeded("ordered recursion too deep");
        stats_.max_depth = std::max(stats_.max_depth, depth_);
        struct Guard {
            std::size_t& d;
            ~Guard() { --d; }
        } guard{depth_};
        PAutomaton a0 = empty_target(sys, target);
        if (sys.num_stacks() == 1) {
            Mcpds one = sys;
            one.mode = Mode::Single;
            return prestar(one, a0, opt_);
        }
        Ecpds e = build_rightcpds(sys);
        return prestar_extended(e, a0, opt_);
    }

    bool reachable(const Mcpds& sys, Control qin, Control qout) {
        Control qend;
        Mcpds s = with_clearing(sys, qout, &qend);
        return top_prestar(s, qend).member(qin, bottom_stack(sys.order));
    }

    // configurations reaching ⟨target, ⊥_n .. ⊥_n⟩
    RegularConfigSet exact_global(const Mcpds& sys, Control target) {
        PAutomaton top = top_prestar(sys, target);
        const std::size_t m = sys.num_stacks();
        if (m == 1) return from_pautomaton(top);
        RegularConfigSet out(sys.order, m);
        std::vector<LongForm> targets;
        for (State h : top.head)
            for (auto& t : top.aut.long_forms(h)) targets.push_back(t);
        LeftCpda left = build_leftcpda(sys);
        TaClosure c = ta_closure(targets, left, top.aut, top.head);
        Mcpds p = left_product(sys, left, c, top.head, {"$fin"});
        const Control fin = static_cast<Control>(c.states.size());
        for (std::size_t i = 0; i < targets.size(); ++i)
            p.stacks[0].push_back(Rule{static_cast<Control>(c.id.at(targets[i])), kBottom, StackOp::noop(), fin});
        stats_.product_controls += p.num_controls();
        RegularConfigSet lower = exact_global(p, fin);
        std::map<State, Control> ctrl;
        for (Control q = 0; q < top.head.size(); ++q) ctrl[top.head[q]] = q;
        std::map<std::size_t, std::pair<std::shared_ptr<const StackAutomaton>, State>> spliced;
        for (auto& t : lower.tuples()) {
            if (t.control >= c.states.size()) continue;
            auto it = spliced.find(t.control);
            if (it == spliced.end()) {
                const LongForm& lf = c.states[t.control];
                auto a = std::make_shared<StackAutomaton>(top.aut);
                State h = a->add_state(sys.order);
                a->add_long_form(LongForm{h, lf.letter, lf.branch, lf.to});
                it = spliced.emplace(t.control, std::make_pair(std::shared_ptr<const StackAutomaton>(a), h)).first;
            }
            ConfigTuple ct{ctrl.at(c.states[t.control].head), t.auts, t.init};
            ct.auts.push_back(it->second.first);
            ct.init.push_back(it->second.second);
            out.add(std::move(ct));
        }
        return out;
    }

    RegularConfigSet global(const Mcpds& sys, Control qout) {
        Control qend;
        Mcpds s = with_clearing(sys, qout, &qend);
        RegularConfigSet all = exact_global(s, qend);
        RegularConfigSet out(sys.order, sys.num_stacks());
        for (auto& t : all.tuples())
            if (t.control != qend) out.add(t);
        return out;
    }

    // sources, at the opening rule's target control, of the targets
    std::vector<LongForm> language_sources(const LeftCpda& left, const Mcpds& sys, const BottomRule& open,
                                           const std::vector<LongForm>& targets, const StackAutomaton& a,
                                           const std::vector<State>& head) {
        ++stats_.language_queries;
        std::vector<LongForm> out;
        if (targets.empty()) return out;
        TaClosure c = ta_closure(targets, left, a, head);
        std::vector<std::size_t> cand;
        for (std::size_t i = 0; i < c.states.size(); ++i)
            if (c.states[i].head == head.at(open.rule.dst)) cand.push_back(i);
        if (cand.empty()) return out;
        std::vector<std::string> extra{"$out"};
        for (std::size_t i = 0; i < cand.size(); ++i) extra.push_back("$in" + std::to_string(i));
        Mcpds p = left_product(sys, left, c, head, extra);
        const Control outc = static_cast<Control>(c.states.size());
        for (auto& t : targets)
            p.stacks[open.stack].push_back(Rule{static_cast<Control>(c.id.at(t)), kBottom, StackOp::noop(), outc});
        for (std::size_t i = 0; i < cand.size(); ++i)
            p.stacks[open.stack].push_back(
                Rule{static_cast<Control>(outc + 1 + i), kBottom, open.rule.op, static_cast<Control>(cand[i])});
        stats_.product_controls += p.num_controls();
        PAutomaton res = top_prestar(p, outc);
        Stack bot = bottom_stack(sys.order);
        Acceptor acc(res.aut);
        for (std::size_t i = 0; i < cand.size(); ++i)
            if (acc.accepts(res.head[outc + 1 + i], bot)) out.push_back(c.states[cand[i]]);
        return out;
    }

private:
    static PAutomaton empty_target(const Mcpds& sys, Control target) {
        const int n = sys.order;
        PAutomaton a(n, sys.num_controls());
        LongForm t{a.head.at(target), kBottom, {}, std::vector<StateSet>(n)};
        for (int k = 1; k <= n; ++k) t.to[k - 1] = {a.aut.add_state(k, true)};
        a.aut.add_long_form(t);
        return a;
    }

    SaturationOptions opt_;
    OrderedStats stats_;
    std::size_t depth_ = 0;
};

inline std::vector<LongForm> CpdaLanguage::solve(const std::vector<LongForm>& targets,
                                                 const StackAutomaton& a, const std::vector<State>& head) const {
    return solver_->language_sources(*left_, *sys_, open_, targets, a, head);
}

inline bool ordered_reachability(const Mcpds& sys, Control qin, Control qout, SaturationOptions opt = {}) {
    OrderedSolver s(opt);
    return s.reachable(sys, qin, qout);
}

inline RegularConfigSet ordered_global(const Mcpds& sys, Control qout, SaturationOptions opt = {}) {
    OrderedSolver s(opt);
    return s.global(sys, qout);
}

}
