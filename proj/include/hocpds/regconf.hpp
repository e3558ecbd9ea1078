#pragma once

// Regular sets of multi-stack configurations: finite sets of tuples of a
// control and one stack automaton (with initial state) per stack.

#include <hocpds/automaton.hpp>
#include <hocpds/model.hpp>

#include <memory>

namespace hocpds {

struct ConfigTuple {
    Control control = 0;
    std::vector<std::shared_ptr<const StackAutomaton>> auts;
    std::vector<State> init;
};

class RegularConfigSet {
public:
    RegularConfigSet() = default;
    RegularConfigSet(int order, std::size_t stacks) : order_(order), stacks_(stacks) {}

    int order() const { return order_; }
    std::size_t num_stacks() const { return stacks_; }
    const std::vector<ConfigTuple>& tuples() const { return tuples_; }

    void add(ConfigTuple t) {
        if (t.auts.size() != stacks_ || t.init.size() != stacks_) throw ArityMismatch("tuple arity");
        for (std::size_t i = 0; i < stacks_; ++i) {
            if (t.auts[i]->order() != order_) throw OrderMismatch("tuple automaton order");
            if (t.auts[i]->state_order(t.init[i]) != order_) throw OrderMismatch("initial state order");
        }
        tuples_.push_back(std::move(t));
    }

    bool member(const Config& c) const {
        if (c.stacks.size() != stacks_) throw ArityMismatch("configuration has " + std::to_string(c.stacks.size()) +
                                                            " stacks, set has " + std::to_string(stacks_));
        for (auto& t : tuples_) {
            if (t.control != c.control) continue;
            bool ok = true;
            for (std::size_t i = 0; i < stacks_ && ok; ++i) ok = accepts(*t.auts[i], t.init[i], c.stacks[i]);
            if (ok) return true;
        }
        return false;
    }

    RegularConfigSet unite(const RegularConfigSet& o) const {
        check(o);
        RegularConfigSet r = *this;
        for (auto& t : o.tuples_) r.tuples_.push_back(t);
        return r;
    }

    RegularConfigSet intersect(const RegularConfigSet& o) const {
        check(o);
        RegularConfigSet r(order_, stacks_);
        for (auto& x : tuples_)
            for (auto& y : o.tuples_) {
                if (x.control != y.control) continue;
                ConfigTuple t{x.control, {}, {}};
                for (std::size_t i = 0; i < stacks_; ++i) {
                    auto a = std::make_shared<StackAutomaton>(order_);
                    auto rx = import_automaton(*a, *x.auts[i]);
                    auto ry = import_automaton(*a, *y.auts[i]);
                    t.init.push_back(intersect_states(*a, rx[x.init[i]], ry[y.init[i]]));
                    t.auts.push_back(std::move(a));
                }
                r.tuples_.push_back(std::move(t));
            }
        return r;
    }

    [[noreturn]] RegularConfigSet complement() const {
        throw NotSupported("complement needs stack automaton complementation, which is not constructed here");
    }

    // some member configuration, if any
    std::optional<Config> witness() const {
        for (auto& t : tuples_) {
            Config c{t.control, {}};
            for (std::size_t i = 0; i < stacks_; ++i) {
                auto w = Emptiness(*t.auts[i]).witness({t.init[i]}, order_);
                if (!w) break;
                c.stacks.push_back(*w);
            }
            if (c.stacks.size() == stacks_) return c;
        }
        return std::nullopt;
    }

    bool is_empty() const { return !witness(); }

private:
    void check(const RegularConfigSet& o) const {
        if (o.stacks_ != stacks_) throw ArityMismatch("sets differ in stack count");
        if (o.order_ != order_) throw OrderMismatch("sets differ in order");
    }

    int order_ = 1;
    std::size_t stacks_ = 1;
    std::vector<ConfigTuple> tuples_;
};

// one tuple per control: the heads of a P-automaton on a single stack
inline RegularConfigSet from_pautomaton(const PAutomaton& a) {
    RegularConfigSet r(a.order(), 1);
    auto shared = std::make_shared<const StackAutomaton>(a.aut);
    for (Control c = 0; c < a.head.size(); ++c) r.add(ConfigTuple{c, {shared}, {a.head[c]}});
    return r;
}

// automaton accepting exactly ⊥_n from its returned state
inline std::pair<std::shared_ptr<StackAutomaton>, State> bottom_only(int n) {
    auto a = std::make_shared<StackAutomaton>(n);
    State prev = a->add_state(1, true);
    State s1 = a->add_state(1);
    a->add1(s1, kBottom, {}, {prev});
    State cur = s1;
    for (int k = 2; k <= n; ++k) {
        State e = a->add_state(k, true);
        State s = a->add_state(k);
        a->add_hi(s, {e}, cur);
        cur = s;
    }
    return {a, cur};
}

}
