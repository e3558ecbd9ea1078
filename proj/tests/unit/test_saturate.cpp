#include <hocpds/oracle.hpp>
#include <hocpds/saturate.hpp>

#include <gtest/gtest.h>

using namespace hocpds;

namespace {

struct Fix1 {
    Mcpds sys;
    PAutomaton a0;
    Fix1() {
        sys.order = 2;
        sys.add_control("p");
        sys.add_control("q");
        Letter a = sys.alphabet.add("a");
        sys.stacks = {{Rule{0, a, StackOp::pop(1), 1}}};
        a0 = PAutomaton(2, 2);
        State f = a0.aut.add_state(1, true);
        a0.aut.add_long_form(LongForm{a0.head[1], kBottom, {}, {{f}, {}}});
    }
};

// the worked chain push_c^2; copy_2; collapse_2 from [[a]1 [b]1]2 to [[b]1]2
struct Fix2 {
    Mcpds sys;
    PAutomaton a0;
    Fix2() {
        sys.order = 2;
        for (int i = 0; i < 4; ++i) sys.add_control("p" + std::to_string(i));
        Letter a = sys.alphabet.add("a"), b = sys.alphabet.add("b"), c = sys.alphabet.add("c");
        sys.stacks = {{Rule{0, a, StackOp::push(c, 2), 1}, Rule{1, c, StackOp::copy(2), 2},
                       Rule{2, c, StackOp::collapse(2), 3}}};
        a0 = PAutomaton(2, 4);
        State f1 = a0.aut.add_state(1, true), f2 = a0.aut.add_state(2, true);
        a0.aut.add_long_form(LongForm{a0.head[3], b, {}, {{f1}, {f2}}});
    }
};

std::vector<Config> all_configs(const Mcpds& sys, std::size_t max_size) {
    StackEnumerator en(sys.order, sys.alphabet.letters());
    std::vector<Config> out;
    for (auto w : en.upto(sys.order, max_size))
        for (Control c = 0; c < sys.num_controls(); ++c) out.push_back(Config{c, {w}});
    return out;
}

}

TEST(Saturate, Fix1Consuming) {
    Fix1 f;
    auto ts = auxsat_consuming(f.sys.stacks[0][0], f.a0.aut, f.a0.head);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].head, f.a0.head[0]);
    EXPECT_TRUE(ts[0].branch.empty());
    EXPECT_EQ(ts[0].to[0].size(), 1u);
    EXPECT_TRUE(ts[0].to[1].empty());
    // the target of the new transition is the label below the head of q
    State lab = f.a0.aut.out_hi(f.a0.head[1]).begin()->second;
    EXPECT_EQ(ts[0].to[0], StateSet{lab});
}

TEST(Saturate, Fix1Prestar) {
    Fix1 f;
    auto& al = f.sys.alphabet;
    SaturationStats st;
    auto r = prestar(f.sys, f.a0, {}, &st);
    EXPECT_TRUE(r.member(0, parse_stack("[[a #]1]2", al)));
    EXPECT_TRUE(r.member(1, parse_stack("[[#]1]2", al)));
    EXPECT_FALSE(r.member(1, parse_stack("[[a #]1]2", al)));
    EXPECT_FALSE(r.member(0, parse_stack("[[a a #]1]2", al)));
    EXPECT_EQ(st.added, 1u);
    // oracle over all configurations of tree size <= 8
    auto cs = all_configs(f.sys, 8);
    auto truth = prestar_oracle(f.sys, f.a0, cs);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        ASSERT_NE(truth[i], Tri::Unknown);
        EXPECT_EQ(r.member(cs[i].control, cs[i].stacks[0]), truth[i] == Tri::Yes) << config_to_string(cs[i], f.sys);
    }
}

TEST(Saturate, CollapseTopOrderIsIndependentOfAutomaton) {
    Fix1 f;
    Rule r{0, 1, StackOp::collapse(2), 1};
    auto ts = auxsat_consuming(r, f.a0.aut, f.a0.head);
    ASSERT_EQ(ts.size(), 1u);
    EXPECT_EQ(ts[0].branch, StateSet{f.a0.head[1]});
    PAutomaton empty(2, 2);
    EXPECT_EQ(auxsat_consuming(r, empty.aut, empty.head).size(), 1u);
    // collapse_1 needs a 1-prefix chain from the target head
    EXPECT_TRUE(auxsat_consuming(Rule{0, 1, StackOp::collapse(1), 1}, empty.aut, empty.head).empty());
}

TEST(Saturate, GeneratingCases) {
    PAutomaton a(2, 2);
    State x = a.aut.add_state(1), y = a.aut.add_state(2);
    a.aut.add_long_form(LongForm{a.head[1], 2, {}, {{x}, {}}});
    // rew: relabel head and letter
    LongForm t = a.aut.long_forms(a.head[1])[0];
    auto r1 = auxsat_generating(Rule{0, 1, StackOp::rew(2), 1}, t, a.aut, a.head);
    ASSERT_EQ(r1.size(), 1u);
    EXPECT_EQ(r1[0], (LongForm{a.head[0], 1, {}, {{x}, {}}}));
    // copy_2 unions the target sets of the long forms of Q_2
    PAutomaton b(2, 2);
    State q1 = b.aut.add_state(1), q2 = b.aut.add_state(2), q3 = b.aut.add_state(1);
    b.aut.add_long_form(LongForm{q2, 1, {}, {{q3}, {}}});
    b.aut.add_long_form(LongForm{b.head[1], 1, {}, {{q1}, {q2}}});
    LongForm tc = b.aut.long_forms(b.head[1])[0];
    auto rc = auxsat_generating(Rule{0, 1, StackOp::copy(2), 1}, tc, b.aut, b.head);
    ASSERT_EQ(rc.size(), 1u);
    EXPECT_EQ(rc[0].to[0], (StateSet{q1, q3}));
    EXPECT_TRUE(rc[0].to[1].empty());
    (void)y;
}

TEST(Saturate, PaperChain) {
    Fix2 f;
    auto& al = f.sys.alphabet;
    auto r = prestar(f.sys, f.a0);
    EXPECT_TRUE(r.member(0, parse_stack("[[a]1 [b]1]2", al)));
    EXPECT_TRUE(r.member(2, parse_stack("[[c^{[[b]1]2} a]1 [c^{[[b]1]2} a]1 [b]1]2", al)));
    EXPECT_FALSE(r.member(0, parse_stack("[[a]1 [a]1]2", al)));
    EXPECT_FALSE(r.member(0, parse_stack("[[a]1]2", al)));
}

TEST(Saturate, NoRulesIsIdentity) {
    Fix1 f;
    Mcpds s = f.sys;
    s.stacks = {{}};
    SaturationStats st;
    auto r = prestar(s, f.a0, {}, &st);
    EXPECT_EQ(r.aut.num_transitions(), f.a0.aut.num_transitions());
    EXPECT_EQ(st.iterations, 1u);
}

TEST(Saturate, FixpointIsStable) {
    Fix2 f;
    auto r = prestar(f.sys, f.a0);
    auto before = r.aut.num_transitions();
    EXPECT_FALSE(satstep(f.sys.stacks[0], r.aut, r.head));
    EXPECT_EQ(r.aut.num_transitions(), before);
}

TEST(Saturate, PreconditionViolation) {
    Fix1 f;
    PAutomaton bad = f.a0;
    bad.aut.set_final(bad.head[0], true);
    EXPECT_THROW(prestar(f.sys, bad), PreconditionViolation);
    PAutomaton bad2 = f.a0;
    bad2.aut.add_long_form(LongForm{bad2.head[0], 1, {}, {{}, {bad2.head[1]}}});
    EXPECT_THROW(prestar(f.sys, bad2), PreconditionViolation);
}

class SaturateRandom : public ::testing::TestWithParam<int> {};

TEST_P(SaturateRandom, AgreesWithOracle) {
    const int n = 1 + GetParam() % 2;
    for (std::uint64_t seed = 100 * GetParam(); seed < 100 * GetParam() + 10; ++seed) {
        RandomProfile p;
        p.order = n;
        p.controls = 3;
        p.letters = 2;
        p.rules_per_stack = 6;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed + 7, sys);
        auto r = prestar(sys, a0);
        auto cs = all_configs(sys, n == 1 ? 7 : 8);
        ExploreBounds b;
        b.max_size = 40;
        auto truth = prestar_oracle(sys, a0, cs, b);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (truth[i] == Tri::Unknown) continue;
            ASSERT_EQ(r.member(cs[i].control, cs[i].stacks[0]), truth[i] == Tri::Yes)
                << "seed " << seed << " " << config_to_string(cs[i], sys);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SaturateRandom, ::testing::Range(0, 6));

// Dropping long forms with |Q_n| > 1 loses this configuration: push^n unions
// the branch of the target long form into Q_n. The predicate rejects the
// automaton (order-n branch next to an order-n target), so Auto runs in full.
TEST(Saturate, OptimizedModeNeedsThePredicate) {
    Mcpds sys;
    sys.order = 2;
    sys.add_control("p");
    sys.add_control("p1");
    Letter a = sys.alphabet.add("a"), b = sys.alphabet.add("b");
    sys.stacks = {{Rule{0, a, StackOp::push(b, 2), 1}}};
    PAutomaton a0(2, 2);
    State x = a0.aut.add_state(2), y = a0.aut.add_state(2);
    for (Letter l : sys.alphabet.letters()) a0.aut.add_long_form(LongForm{x, l, {}, {{}, {}}});
    a0.aut.add_long_form(LongForm{y, kBottom, {}, {{}, {}}});
    a0.aut.add_long_form(LongForm{a0.head[1], b, {x}, {{}, {y}}});
    EXPECT_FALSE(non_alternating_at_top(a0.aut));
    Stack w = parse_stack("[[a #]1 [#]1]2", sys.alphabet);
    SaturationStats st;
    EXPECT_TRUE(prestar(sys, a0, {}, &st).member(0, w));
    EXPECT_FALSE(st.optimized);
    SaturationOptions o;
    o.mode = SatMode::Optimized;
    EXPECT_FALSE(prestar(sys, a0, o).member(0, w));
}

TEST(Saturate, OptimizedModeAgreesUnderPredicate) {
    int eligible = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        RandomProfile p;
        p.order = 2 + (seed % 5 == 0);
        p.controls = 3 + seed % 3;
        p.letters = 1 + seed % 2;
        p.rules_per_stack = 4 + seed % 9;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed * 7 + 1, sys);
        if (!non_alternating_at_top(a0.aut)) continue;
        ++eligible;
        SaturationOptions full;
        full.mode = SatMode::Full;
        SaturationStats st;
        auto f = prestar(sys, a0, full);
        auto o = prestar(sys, a0, {}, &st);
        ASSERT_TRUE(st.optimized);
        for (auto& c : all_configs(sys, sys.order == 2 ? 8 : 7))
            ASSERT_EQ(f.member(c.control, c.stacks[0]), o.member(c.control, c.stacks[0]))
                << "seed " << seed << " " << config_to_string(c, sys);
    }
    EXPECT_GT(eligible, 100);
}
