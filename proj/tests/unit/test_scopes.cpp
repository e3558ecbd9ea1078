#include <hocpds/oracle.hpp>
#include <hocpds/scopes.hpp>

#include <gtest/gtest.h>

using namespace hocpds;

namespace {

// Stack 1 pushes a in round 1 and pops it in round 3; stack 2 only passes
// the control on. Needs scope bound 2.
Mcpds fix_sc() {
    Mcpds s;
    s.order = 1;
    s.mode = Mode::Scope;
    for (int i = 0; i <= 5; ++i) s.add_control("p" + std::to_string(i));
    Letter a = s.alphabet.add("a");
    s.stacks.assign(2, {});
    s.stacks[0].push_back(Rule{0, kBottom, StackOp::push(a, 1), 1});
    s.stacks[1].push_back(Rule{1, kBottom, StackOp::noop(), 2});
    s.stacks[0].push_back(Rule{2, a, StackOp::noop(), 3});
    s.stacks[1].push_back(Rule{3, kBottom, StackOp::noop(), 4});
    s.stacks[0].push_back(Rule{4, a, StackOp::pop(1), 5});
    return s;
}

// Stack 1 pushes in round 1, both stacks idle for k rounds, then stack 1
// pops in round k+2. Needs scope bound k+1.
Mcpds delayed(int k) {
    Mcpds s;
    s.order = 1;
    s.mode = Mode::Scope;
    Letter a = s.alphabet.add("a");
    s.stacks.assign(2, {});
    Control q = s.add_control("c0");
    auto next = [&](std::size_t i, Letter x, StackOp op) {
        Control d = s.add_control("c" + std::to_string(s.num_controls()));
        s.stacks[i].push_back(Rule{q, x, op, d});
        q = d;
    };
    next(0, kBottom, StackOp::push(a, 1));
    next(1, kBottom, StackOp::noop());
    for (int i = 0; i < k; ++i) {
        next(0, a, StackOp::noop());
        next(1, kBottom, StackOp::noop());
    }
    next(0, a, StackOp::pop(1));
    return s;
}

bool oracle(Mcpds s, unsigned z, Control qin, Control qout) {
    s.bound = z;
    auto r = explore(s, initial_config(s, qin));
    EXPECT_TRUE(r.closed);
    if (r.witness[qout]) EXPECT_TRUE(validate_scope(*r.witness[qout], z));
    return r.verdict(qout) == Verdict::Reachable;
}

// order 1, two controls, two layers: q^1 -a-> {q^2}, q^2 -a-> ∅
LayeredAutomaton two_layer_chain() {
    LayeredAutomaton a(1, 2, 2);
    a.aut().add1(a.head(1, 0), 1, {}, {a.head(2, 0)});
    a.aut().add1(a.head(2, 0), 1, {}, {});
    return a;
}

}

TEST(Scopes, FixSc) {
    Mcpds s = fix_sc();
    EXPECT_TRUE(oracle(s, 2, 0, 5));
    EXPECT_FALSE(oracle(s, 1, 0, 5));
    EXPECT_TRUE(scope_reachability(s, 2, 0, 5));
    EXPECT_FALSE(scope_reachability(s, 1, 0, 5));
    EXPECT_TRUE(scope_reachability(s, 3, 0, 5));
    EXPECT_TRUE(scope_reachability(s, 1, 0, 4));
}

TEST(Scopes, DelayedPopNeedsItsBound) {
    for (int k = 0; k <= 3; ++k) {
        Mcpds s = delayed(k);
        Control last = static_cast<Control>(s.num_controls() - 1);
        for (unsigned z = 1; z <= 4; ++z) {
            bool expect = z >= static_cast<unsigned>(k) + 1;
            EXPECT_EQ(oracle(s, z, 0, last), expect) << k << " " << z;
            EXPECT_EQ(scope_reachability(s, z, 0, last), expect) << k << " " << z;
        }
    }
}

TEST(Scopes, ShiftMovesLayersAndDropsTheLast) {
    auto a = two_layer_chain();
    auto b = shift(a);
    Stack w = parse_stack("[a a #]1", Alphabet{"a"});
    EXPECT_TRUE(accepts(a.aut(), a.head(1, 0), w));
    // q^1 -a-> q^2 became q^2 -a-> q^3, which is out of scope
    EXPECT_TRUE(b.aut().out1(b.head(1, 0)).empty());
    EXPECT_TRUE(b.aut().out1(b.head(2, 0)).empty());
    EXPECT_EQ(b.aut().num_transitions(), 0u);
    LayeredAutomaton c(1, 2, 3);
    c.aut().add1(c.head(1, 1), 1, {}, {c.head(2, 0)});
    c.aut().add1(c.head(2, 0), 1, {}, {});
    auto d = shift(c);
    ASSERT_EQ(d.aut().out1(d.head(2, 1)).size(), 1u);
    EXPECT_EQ(d.aut().out1(d.head(2, 1)).begin()->to, StateSet{d.head(3, 0)});
    EXPECT_EQ(d.aut().out1(d.head(3, 0)).size(), 1u);
    EXPECT_EQ(shift(shift(d)).aut().num_transitions(), 0u);
}

TEST(Scopes, ShiftKeepsLowerOrderStructure) {
    LayeredAutomaton a(2, 1, 3);
    a.aut().add_long_form(LongForm{a.head(1, 0), 1, {}, {{}, {a.head(2, 0)}}});
    a.aut().add_long_form(LongForm{a.head(2, 0), 0, {}, {{}, {}}});
    auto b = shift(a);
    Stack w = parse_stack("[[a #]1 [#]1]2", Alphabet{"a"});
    EXPECT_TRUE(accepts(a.aut(), a.head(1, 0), w));
    EXPECT_TRUE(accepts(b.aut(), b.head(2, 0), w));
    EXPECT_FALSE(accepts(b.aut(), b.head(1, 0), w));
    b.check_layering();
    auto lay = b.layer_of();
    for (State s = 0; s < b.aut().num_states(); ++s)
        if (b.aut().state_order(s) == 1) EXPECT_GE(lay[s], 2u);
}

TEST(Scopes, EnvmoveIsIdempotent) {
    LayeredAutomaton a(1, 2, 2);
    a.aut().add1(a.head(2, 1), 1, {}, {});
    envmove(a, 0, 1);
    auto n = a.aut().num_transitions();
    auto v = canonicalize(a).code;
    envmove(a, 0, 1);
    EXPECT_EQ(a.aut().num_transitions(), n);
    EXPECT_EQ(canonicalize(a).code, v);
    ASSERT_EQ(a.aut().out1(a.head(1, 0)).size(), 1u);
    // with a single layer there is no next round to hand over to
    LayeredAutomaton one(1, 2, 1);
    envmove(one, 0, 1);
    EXPECT_EQ(one.aut().num_transitions(), 0u);
}

TEST(Scopes, TruncationDropsTheLastLayer) {
    auto a = two_layer_chain();
    auto t = truncate_last_layer(a);
    EXPECT_TRUE(t.aut().out1(t.head(1, 0)).empty());
    LayeredAutomaton b(1, 2, 3);
    b.aut().add1(b.head(1, 0), 1, {}, {b.head(2, 0)});
    b.aut().add1(b.head(2, 0), 0, {}, {});
    EXPECT_EQ(truncate_last_layer(b).aut().num_transitions(), 2u);
}

TEST(Scopes, CanonicalFormIgnoresStateNames) {
    LayeredAutomaton a(2, 1, 2), b(2, 1, 2);
    // same two long forms, added in opposite orders
    LongForm x{a.head(1, 0), 1, {}, {{}, {a.head(2, 0)}}}, y{a.head(2, 0), 0, {}, {{}, {}}};
    a.aut().add_long_form(x);
    a.aut().add_long_form(y);
    b.aut().add_long_form(y);
    b.aut().add_long_form(x);
    auto ca = canonicalize(a), cb = canonicalize(b);
    EXPECT_EQ(ca.code, cb.code);
    EXPECT_EQ(canonicalize(ca.aut).code, ca.code);
    a.aut().add_long_form(LongForm{a.head(1, 0), 0, {}, {{}, {}}});
    EXPECT_NE(canonicalize(a).code, cb.code);
}

TEST(Scopes, Sbmax) {
    EXPECT_EQ(sbmax(2, 3, 1), 6u);
    EXPECT_EQ(sbmax(2, 3, 2), 6u + 36u);
    EXPECT_EQ(sbmax(2, 3, 2, false), 6u + 6u * 64u);
    EXPECT_EQ(sbmax(1, 2, 3), 2u + 4u + 4u * 16u);
    EXPECT_EQ(sbmax(3, 10, 3), std::uint64_t(1) << 62);
}

TEST(Scopes, LayeringHoldsAfterSaturation) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomProfile p;
        p.stacks = 2;
        p.mode = Mode::Scope;
        p.order = 1 + seed % 2;
        p.controls = 4;
        Mcpds sys = gen_random_system(seed, p);
        ScopeSolver solver(sys, 2);
        solver.reachable(0, 3);
        for (std::size_t i = 0; i < solver.stats().automata; ++i) {
            solver.automaton(i).check_layering();
            EXPECT_LE(solver.automaton(i).aut().num_states(), sbmax(3, 4, p.order, false));
        }
    }
}

TEST(Scopes, RandomAgreesWithOracle) {
    int closed = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RandomProfile p;
        p.stacks = 2;
        p.mode = Mode::Scope;
        p.controls = 4;
        p.letters = 2;
        p.rules_per_stack = 5;
        p.order = 1 + seed % 2;
        Mcpds sys = gen_random_system(seed, p);
        for (Control q = 1; q < sys.num_controls(); ++q) {
            bool prev = false;
            for (unsigned z = 1; z <= 3; ++z) {
                Mcpds s = sys;
                s.bound = z;
                auto r = explore(s, initial_config(s, 0));
                if (!r.closed) continue;
                ++closed;
                bool expect = r.verdict(q) == Verdict::Reachable;
                bool got = scope_reachability(sys, z, 0, q);
                ASSERT_EQ(got, expect) << "seed " << seed << " control " << q << " bound " << z;
                EXPECT_TRUE(!prev || got) << "monotone in the bound";
                prev = got;
            }
        }
    }
    EXPECT_GT(closed, 200);
}

TEST(Scopes, GlobalAgreesWithOracle) {
    std::size_t sampled = 0, members = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        RandomProfile p;
        p.stacks = 2;
        p.mode = Mode::Scope;
        p.controls = 3;
        p.letters = 2;
        p.rules_per_stack = 5;
        p.order = 1 + seed % 2;
        Mcpds sys = gen_random_system(seed, p);
        for (unsigned z = 1; z <= 2; ++z) {
            Mcpds s = sys;
            s.bound = z;
            for (Control target = 1; target < sys.num_controls(); ++target) {
                auto g = scope_global(sys, z, target);
                StackEnumerator en(sys.order, sys.alphabet.letters());
                auto ws = en.upto(sys.order, sys.order == 1 ? 3 : 4);
                for (auto& w1 : ws)
                    for (auto& w2 : ws)
                        for (Control q = 0; q < sys.num_controls(); ++q) {
                            Config c{q, {w1, w2}};
                            auto r = explore(s, c);
                            if (!r.closed) continue;
                            ++sampled;
                            bool expect = r.verdict(target) == Verdict::Reachable;
                            members += expect;
                            ASSERT_EQ(g.member(c), expect) << "seed " << seed << " bound " << z << " "
                                                           << config_to_string(c, sys);
                        }
            }
        }
    }
    EXPECT_GT(sampled, 1000u);
    EXPECT_GT(members, 100u);
}

TEST(Scopes, GlobalFixSc) {
    Mcpds s = fix_sc();
    Stack bot = bottom_stack(1);
    Stack a = parse_stack("[a #]1", s.alphabet);
    auto g2 = scope_global(s, 2, 5);
    auto g1 = scope_global(s, 1, 5);
    EXPECT_TRUE(g2.member(Config{0, {bot, bot}}));
    EXPECT_FALSE(g1.member(Config{0, {bot, bot}}));
    // with a already on the stack at round 1, p4 pops it in round 1
    EXPECT_TRUE(g1.member(Config{4, {a, bot}}));
    // from p2 the pop comes in round 2, too late for initial material at bound 1
    EXPECT_FALSE(g1.member(Config{2, {a, bot}}));
    EXPECT_TRUE(g2.member(Config{2, {a, bot}}));
}

TEST(Scopes, VertexBudget) {
    Mcpds s = fix_sc();
    ScopeSolver solver(s, 2, {}, 1);
    EXPECT_THROW(solver.reachable(0, 5), VertexBudgetExceeded);
    EXPECT_THROW(ScopeSolver(s, 0), PreconditionViolation);
}
