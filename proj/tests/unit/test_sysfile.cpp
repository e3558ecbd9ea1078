#include <hocpds/oracle.hpp>
#include <hocpds/ordered.hpp>
#include <hocpds/serialize.hpp>
#include <hocpds/sysfile.hpp>

#include <gtest/gtest.h>

using namespace hocpds;

namespace {

std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

void expect_error_at(const std::string& text, std::size_t line, std::size_t col) {
    try {
        parse_system(text);
        ADD_FAILURE() << "parsed: " << text;
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, line) << e.what();
        EXPECT_EQ(e.column, col) << e.what();
    }
}

}

TEST(SysFile, ParsesFix3) {
    SystemFile f = load_system(fixture("fix3.sys"));
    EXPECT_EQ(f.sys.order, 2);
    EXPECT_EQ(f.sys.mode, Mode::Ordered);
    EXPECT_EQ(f.sys.num_stacks(), 2u);
    EXPECT_EQ(f.sys.num_controls(), 13u);
    EXPECT_EQ(f.sys.stacks[0].size(), 6u);
    EXPECT_EQ(f.sys.stacks[1].size(), 6u);
    EXPECT_EQ(f.sys.stacks[1][0], (Rule{0, kBottom, StackOp::push(f.sys.alphabet.at("a"), 2), 1}));
    ASSERT_TRUE(f.query);
    EXPECT_EQ(f.query->second, f.sys.control("goal"));
}

TEST(SysFile, RoundTrip) {
    for (auto name : {"fix1.sys", "fix1_ext.sys", "fix2.sys", "fix3.sys", "fix_sc.sys", "fix_ph.sys"}) {
        SystemFile f = load_system(fixture(name));
        std::string text = write_system(f);
        SystemFile g = parse_system(text);
        EXPECT_EQ(write_system(g), text) << name;
        EXPECT_EQ(g.sys.stacks, f.sys.stacks) << name;
        EXPECT_EQ(g.sys.bound, f.sys.bound) << name;
        EXPECT_EQ(g.ext.size(), f.ext.size()) << name;
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomProfile p;
        p.stacks = 1 + seed % 2;
        p.mode = p.stacks == 1 ? Mode::Single : Mode::Scope;
        p.bound = 2;
        SystemFile f;
        f.sys = gen_random_system(seed, p);
        SystemFile g = parse_system(write_system(f));
        EXPECT_EQ(g.sys.stacks, f.sys.stacks);
        EXPECT_EQ(g.sys.controls, f.sys.controls);
    }
}

TEST(SysFile, ErrorsCarryPositions) {
    expect_error_at("order x\n", 1, 7);
    expect_error_at("order 2\ncontrols p q\nstack 1\n  p a pop 1 q\n", 4, 5);  // unknown letter
    expect_error_at("order 2\nletters a\ncontrols p q\nstack 1\n  p a pop 3 q\n", 5, 11);
    expect_error_at("order 2\nletters a\ncontrols p q\nstack 1\n  p a jump q\n", 5, 7);
    expect_error_at("order 1\nletters a\ncontrols p q\nstack 1\n  p a copy 2 q\n", 5, 12);
    expect_error_at("order 1\nletters a\ncontrols p q\nstack 2\n", 4, 7);
    expect_error_at("order 1\nletters a\ncontrols p q\nstack 1\n  p a noop r\n", 5, 12);
    expect_error_at("order 1\nletters a\ncontrols p q\nstack 1\n  p a noop q extra\n", 5, 14);
    expect_error_at("order 1\ncontrols p q\nletters a\nstack 1\norder 2\n", 5, 1);
    expect_error_at("order 1\nletters a\ncontrols p q\nlanguage L\n  word p a pop 1 q\n", 5, 8);
    EXPECT_THROW(parse_system("order 1\nstacks 2\ncontrols p\n"), ParseError);
    EXPECT_THROW(parse_system("order 1\nstacks 2\nmode scope 0\ncontrols p\n"), ParseError);
    EXPECT_THROW(parse_system("controls p\n"), ParseError);
}

TEST(SysFile, CommentsAndBottom) {
    SystemFile f = parse_system("// header\norder 1 // one\nletters a\ncontrols p q\nstack 1\n p # push a 1 q // go\n");
    ASSERT_EQ(f.sys.stacks[0].size(), 1u);
    EXPECT_EQ(f.sys.stacks[0][0].letter, kBottom);
}

TEST(SysFile, ExtendedRulesMatchWrappedSystem) {
    SystemFile f = load_system(fixture("fix1_ext.sys"));
    PAutomaton a = prestar_extended(f.ecpds(), f.target_automaton());
    Stack bot = bottom_stack(2);
    EXPECT_TRUE(a.member(f.sys.control("p"), bot));
    EXPECT_TRUE(a.member(f.sys.control("q"), bot));
    EXPECT_FALSE(a.member(f.sys.control("m"), bot));
}

TEST(SysFile, ConfigLiterals) {
    SystemFile f = load_system(fixture("fix3.sys"));
    Config c = parse_config("p3 [[c #]1 [#]1]2 [[#]1]2", f.sys);
    EXPECT_EQ(c.control, 3u);
    ASSERT_EQ(c.stacks.size(), 2u);
    EXPECT_EQ(format_stack(c.stacks[0], f.sys.alphabet), "[[c #]1 [#]1]2");
    EXPECT_THROW(parse_config("nope [[#]1]2", f.sys), ParseError);
    EXPECT_THROW(parse_config("p0 [#]1", f.sys), OrderMismatch);
}

TEST(Serialize, SetRoundTripPreservesMembership) {
    SystemFile f = load_system(fixture("fix3.sys"));
    auto g = ordered_global(f.sys, f.sys.control("goal"));
    json j = set_to_json(g, f.sys);
    auto [h, skel] = set_from_json(json::parse(j.dump()));
    EXPECT_EQ(set_to_json(h, skel).dump(), j.dump());
    auto r = explore(f.sys, initial_config(f.sys, 0));
    ASSERT_TRUE(r.witness[12]);
    for (auto& c : r.witness[12]->configs) EXPECT_TRUE(h.member(c));
    Stack bot = bottom_stack(2);
    EXPECT_FALSE(h.member(Config{3, {bot, bot}}));
}

TEST(Serialize, EqualSetsSerializeEqually) {
    SystemFile f = load_system(fixture("fix1.sys"));
    auto a = from_pautomaton(prestar(f.sys, f.target_automaton()));
    RegularConfigSet twice = a.unite(a);
    EXPECT_EQ(set_to_json(twice, f.sys).dump(), set_to_json(a, f.sys).dump());
}

TEST(Serialize, RejectsBadAutomata) {
    Alphabet al{"a"};
    json bad = json::parse(R"({"order":1,"states":[1],"final":[],"hi":[],"lo":[[0,"a",[],[7]]]})");
    EXPECT_THROW(automaton_from_json(bad, al), Error);
    json bad_order = json::parse(R"({"order":1,"states":[2],"final":[],"hi":[],"lo":[]})");
    EXPECT_THROW(automaton_from_json(bad_order, al), Error);
}
