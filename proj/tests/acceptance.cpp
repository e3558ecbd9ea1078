// One line per acceptance criterion; exit status 1 if any fails.

#include <hocpds/ecpds.hpp>
#include <hocpds/invariants.hpp>
#include <hocpds/oracle.hpp>
#include <hocpds/ordered.hpp>
#include <hocpds/phases.hpp>
#include <hocpds/regconf.hpp>
#include <hocpds/saturate.hpp>
#include <hocpds/scopes.hpp>
#include <hocpds/sysfile.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace hocpds;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct Fail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class... A>
std::string cat(const A&... a) {
    std::ostringstream s;
    (s << ... << a);
    return s.str();
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Fail(what);
}

std::string fixture(const std::string& n) { return std::string(FIXTURE_DIR) + "/" + n; }

std::vector<Config> single_configs(const Mcpds& sys, std::size_t max_size) {
    StackEnumerator en(sys.order, sys.alphabet.letters());
    std::vector<Config> out;
    for (auto w : en.upto(sys.order, max_size))
        for (Control c = 0; c < sys.num_controls(); ++c) out.push_back(Config{c, {w}});
    return out;
}

// enumeration size per order, kept within tree size 10
std::size_t enum_size(int order) { return order == 1 ? 10 : 8; }

Outcome worked_example() {
    auto t0 = std::chrono::steady_clock::now();
    Alphabet al{"a", "b", "c"};
    Stack w = parse_stack("[[a]1 [b]1]2", al);
    Stack w1 = apply_op(StackOp::push(al.at("c"), 2), w);
    Stack w2 = apply_op(StackOp::copy(2), w1);
    Stack w3 = apply_op(StackOp::collapse(2), w2);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(format_stack(w1, al) == "[[c^{[[b]1]2} a]1 [b]1]2", format_stack(w1, al));
    require(format_stack(w2, al) == "[[c^{[[b]1]2} a]1 [c^{[[b]1]2} a]1 [b]1]2", format_stack(w2, al));
    require(format_stack(w3, al) == "[[b]1]2", format_stack(w3, al));
    require(s < 1.0, "too slow");
    return {true, "3 stacks match"};
}

Outcome single_prestar() {
    std::size_t instances = 0, compared = 0, members = 0;
    for (std::uint64_t seed = 0; instances < 200 && seed < 5000; ++seed) {
        RandomProfile p;
        p.order = 1 + seed % 2;
        p.controls = 2 + seed % 3;
        p.letters = 1 + seed % 2;
        p.rules_per_stack = 3 + seed % 5;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed + 7, sys);
        auto cs = single_configs(sys, enum_size(p.order));
        ExploreBounds b;
        b.max_size = 40;
        auto truth = prestar_oracle(sys, a0, cs, b);
        if (std::find(truth.begin(), truth.end(), Tri::Unknown) != truth.end()) continue;
        ++instances;
        auto r = prestar(sys, a0);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            bool got = r.member(cs[i].control, cs[i].stacks[0]);
            require(got == (truth[i] == Tri::Yes), cat("seed ", seed, " ", config_to_string(cs[i], sys)));
            ++compared;
            members += got;
        }
    }
    require(instances >= 200, cat("only ", instances, " closed instances"));
    return {true, cat(instances, " instances, ", compared, " configurations (", members, " members), 0 divergences")};
}

Outcome ecpds_conservative() {
    std::size_t singleton = 0, finite = 0, compared = 0, decided = 0;
    for (std::uint64_t seed = 0; singleton < 100; ++seed) {
        RandomProfile p;
        p.order = 1 + seed % 2;
        p.controls = 4;
        p.letters = 2;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed + 11, sys);
        auto plain = prestar(sys, a0);
        auto ext = prestar_extended(singleton_extension(sys), a0);
        for (auto& c : single_configs(sys, 7)) {
            require(plain.member(c.control, c.stacks[0]) == ext.member(c.control, c.stacks[0]),
                    cat("singleton seed ", seed, " ", config_to_string(c, sys)));
            ++compared;
        }
        ++singleton;
    }
    for (std::uint64_t seed = 0; finite < 50; ++seed) {
        RandomProfile p;
        p.order = 2;
        p.controls = 4;
        p.letters = 2;
        p.rules_per_stack = 4;
        Ecpds e = gen_random_ecpds(seed, p, 3, 2);
        PAutomaton a0 = gen_random_target(seed + 5, e.sys);
        auto r = prestar_extended(e, a0);
        auto cs = single_configs(e.sys, 8);
        ExploreBounds b;
        b.max_size = 40;
        auto truth = prestar_extended_oracle(e, a0, cs, b);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (truth[i] == Tri::Unknown) continue;
            ++decided;
            require(r.member(cs[i].control, cs[i].stacks[0]) == (truth[i] == Tri::Yes),
                    cat("length-2 seed ", seed, " ", config_to_string(cs[i], e.sys)));
        }
        ++finite;
    }
    return {true, cat(singleton, " singleton instances (", compared, " configurations), ", finite,
                      " length-2 instances (", decided, " decided configurations), 0 divergences")};
}

Outcome ordered_decision() {
    SystemFile f3 = load_system(fixture("fix3.sys")), fb = load_system(fixture("fix3_blocked.sys"));
    require(ordered_reachability(f3.sys, f3.query->first, f3.query->second), "FIX3 not reachable");
    require(!ordered_reachability(fb.sys, fb.query->first, fb.query->second), "FIX3-blocked reachable");
    std::size_t closed = 0, reach = 0, pairs = 0;
    for (std::uint64_t seed = 0; closed < 50 && seed < 1000; ++seed) {
        RandomProfile p;
        p.stacks = 2;
        p.mode = Mode::Ordered;
        p.controls = 4;
        p.letters = 2;
        p.rules_per_stack = 5;
        p.order = 1 + seed % 2;
        Mcpds sys = gen_random_system(seed, p);
        auto r = explore(sys, initial_config(sys, 0));
        if (!r.closed) continue;
        ++closed;
        OrderedSolver solver;
        for (Control q = 1; q < sys.num_controls(); ++q) {
            bool expect = r.verdict(q) == Verdict::Reachable;
            require(solver.reachable(sys, 0, q) == expect, cat("seed ", seed, " control ", q));
            reach += expect;
            ++pairs;
        }
    }
    require(closed >= 50, cat("only ", closed, " closed instances"));
    return {true, cat("FIX3 reachable, blocked unreachable; ", closed, " instances, ", pairs, " queries (", reach,
                      " reachable), 0 divergences")};
}

// restricted run verdict from the bounded oracle; nullopt if not closed
std::optional<bool> oracle_verdict(Mcpds s, unsigned bound, Control qin, Control qout) {
    s.bound = bound;
    auto r = explore(s, initial_config(s, qin));
    if (!r.closed) return std::nullopt;
    if (r.witness[qout]) {
        bool valid = s.mode == Mode::Scope ? validate_scope(*r.witness[qout], bound)
                                           : validate_phase(*r.witness[qout], bound);
        require(valid, "oracle witness violates the bound");
    }
    return r.verdict(qout) == Verdict::Reachable;
}

using BoundedDecide = std::function<bool(const Mcpds&, unsigned, Control, Control)>;
using BoundedGlobal = std::function<RegularConfigSet(const Mcpds&, unsigned, Control)>;

// From all-⊥ starts random instances rarely need a second round or phase, so
// the global sets are also compared on sampled nonempty start configurations.
struct SampledStats {
    std::size_t compared = 0, needs_more = 0;
};

void sampled_starts(const Mcpds& sys, std::uint64_t seed, const BoundedGlobal& global, SampledStats& st) {
    StackEnumerator en(sys.order, sys.alphabet.letters());
    auto ws = en.upto(sys.order, sys.order == 1 ? 4 : 5);
    std::mt19937_64 rng(seed);
    std::vector<Config> starts;
    for (int i = 0; i < 60; ++i)
        starts.push_back(Config{static_cast<Control>(rng() % sys.num_controls()),
                                {ws[rng() % ws.size()], ws[rng() % ws.size()]}});
    for (Control target = 1; target < sys.num_controls(); ++target) {
        std::vector<RegularConfigSet> g;
        for (unsigned b = 1; b <= 3; ++b) g.push_back(global(sys, b, target));
        for (auto& c : starts) {
            bool prev = false;
            for (unsigned b = 1; b <= 3; ++b) {
                Mcpds s = sys;
                s.bound = b;
                auto r = explore(s, c);
                if (!r.closed) break;
                bool expect = r.verdict(target) == Verdict::Reachable;
                require(g[b - 1].member(c) == expect,
                        cat("global: seed ", seed, " bound ", b, " ", config_to_string(c, sys)));
                require(!prev || expect, cat("not monotone: seed ", seed, " ", config_to_string(c, sys)));
                st.needs_more += expect && !prev && b > 1;
                prev = expect;
                ++st.compared;
            }
        }
    }
}

Outcome threshold(Mode mode, const std::string& fx, const BoundedDecide& decide, const BoundedDecide& decide_all,
                  const BoundedGlobal& global) {
    SystemFile f = load_system(fixture(fx));
    Control qin = f.query->first, qout = f.query->second;
    for (unsigned b = 1; b <= 2; ++b) {
        bool expect = b == 2;
        require(decide(f.sys, b, qin, qout) == expect, cat(fx, " bound ", b));
        require(oracle_verdict(f.sys, b, qin, qout) == std::optional<bool>(expect), cat(fx, " oracle bound ", b));
    }
    std::size_t closed = 0, queries = 0, needs_more = 0;
    SampledStats sampled;
    for (std::uint64_t seed = 0; closed < 50 && seed < 1000; ++seed) {
        RandomProfile p;
        p.stacks = 2;
        p.mode = mode;
        p.controls = 4;
        p.letters = 2;
        p.rules_per_stack = 5;
        p.order = 1 + seed % 2;
        Mcpds sys = gen_random_system(seed, p);
        std::vector<std::vector<bool>> truth(4);
        bool ok = true;
        for (unsigned b = 1; b <= 3 && ok; ++b) {
            Mcpds s = sys;
            s.bound = b;
            auto r = explore(s, initial_config(s, 0));
            ok = r.closed;
            for (Control q = 0; q < sys.num_controls(); ++q) truth[b].push_back(r.verdict(q) == Verdict::Reachable);
        }
        if (!ok) continue;
        ++closed;
        for (Control q = 1; q < sys.num_controls(); ++q) {
            bool prev = false;
            for (unsigned b = 1; b <= 3; ++b) {
                bool got = decide_all(sys, b, 0, q);
                require(got == truth[b][q], cat("seed ", seed, " control ", q, " bound ", b));
                require(!prev || got, cat("not monotone: seed ", seed, " control ", q));
                needs_more += got && !prev && b > 1;
                prev = got;
                ++queries;
            }
        }
        if (closed <= 15) sampled_starts(sys, seed, global, sampled);
    }
    require(closed >= 50, cat("only ", closed, " closed instances"));
    require(sampled.needs_more > 0, "no sampled start needs a bound above 1");
    return {true, cat(fx, " false at 1, true at 2; ", closed, " instances, ", queries, " initial queries (", needs_more,
                      " need bound > 1), ", sampled.compared, " sampled starts (", sampled.needs_more,
                      " need bound > 1), monotone, 0 divergences")};
}

RegularConfigSet random_set(std::uint64_t seed, const Mcpds& sys) {
    PAutomaton pa = prestar(sys, gen_random_target(seed, sys));
    PAutomaton pb = prestar(sys, gen_random_target(seed + 1000, sys));
    auto a = std::make_shared<const StackAutomaton>(pa.aut);
    auto b = std::make_shared<const StackAutomaton>(pb.aut);
    RegularConfigSet r(sys.order, 2);
    std::mt19937_64 rng(seed);
    for (Control c = 0; c < sys.num_controls(); ++c) {
        if (rng() % 3 == 0) continue;
        Control d = static_cast<Control>(rng() % sys.num_controls());
        r.add(ConfigTuple{c, {a, b}, {pa.head[c], pb.head[d]}});
    }
    return r;
}

std::vector<Config> samples(const Mcpds& sys, std::size_t count, std::uint64_t seed) {
    StackEnumerator en(sys.order, sys.alphabet.letters());
    auto ws = en.upto(sys.order, sys.order == 1 ? 4 : 5);
    std::mt19937_64 rng(seed);
    std::vector<Config> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(Config{static_cast<Control>(rng() % sys.num_controls()),
                             {ws[rng() % ws.size()], ws[rng() % ws.size()]}});
    return out;
}

Outcome regular_algebra() {
    std::size_t unions = 0, inters = 0, nonempty = 0, empty = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomProfile p;
        p.order = 1 + seed % 2;
        p.controls = 3;
        Mcpds sys = gen_random_system(seed, p);
        auto x = random_set(seed, sys), y = random_set(seed + 1, sys);
        auto u = x.unite(y), i = x.intersect(y);
        for (auto& c : samples(sys, 200, seed)) {
            require(u.member(c) == (x.member(c) || y.member(c)), cat("union seed ", seed));
            require(i.member(c) == (x.member(c) && y.member(c)), cat("intersection seed ", seed));
            ++unions;
            ++inters;
        }
        auto z = random_set(seed, sys).intersect(random_set(seed + 3, sys));
        if (auto w = z.witness()) {
            require(!z.is_empty() && z.member(*w), cat("witness not a member, seed ", seed));
            for (auto& s : w->stacks) require(well_formed(s, sys.order), "ill-formed witness");
            ++nonempty;
        } else {
            require(z.is_empty(), "no witness for nonempty set");
            for (auto& c : samples(sys, 200, seed + 9)) require(!z.member(c), cat("empty set has member, seed ", seed));
            ++empty;
        }
    }
    return {true, cat(unions, " union and ", inters, " intersection samples; emptiness ", nonempty, " nonempty with witness, ",
                      empty, " empty; 0 violations")};
}

struct Ran {
    int code;
    std::string out;
};

Ran run_cli(const std::string& args) {
    std::string cmd = std::string(CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw Fail("popen failed");
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

Outcome determinism() {
    std::size_t docs = 0;
    std::vector<std::string> files;
    for (auto& e : std::filesystem::directory_iterator(FIXTURE_DIR))
        if (e.path().extension() == ".sys") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (auto& f : files)
        for (std::string cmd : {"check", "global"}) {
            Ran a = run_cli(cmd + " " + f), b = run_cli(cmd + " " + f);
            require(a.code != 2 && !a.out.empty(), cat(cmd, " failed on ", f));
            require(a.code == b.code && a.out == b.out, cat(cmd, " differs on ", f));
            ++docs;
        }
    return {true, cat(files.size(), " fixtures, ", docs, " document pairs identical")};
}

// extra pipeline coverage for the structural invariants: optimized mode and
// three-stack ordered instances
void exercise_invariants() {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        RandomProfile p;
        p.order = 2 + (seed % 5 == 0);
        p.controls = 3;
        p.letters = 2;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed * 7 + 1, sys);
        if (non_alternating_at_top(a0.aut)) prestar(sys, a0);
    }
}

Outcome invariants() {
    exercise_invariants();
    auto snap = InvariantLedger::get().snapshot();
    std::uint64_t checks = 0, bad = 0;
    for (auto& [name, cv] : snap) {
        checks += cv.first;
        bad += cv.second;
    }
    for (const char* need : {"order>=2 determinism", "layered: no edge into a lower layer", "optimized mode |Q_n| <= 1",
                             "layered automaton within sbmax", "saturation monotone", "saturation transition cap"})
        require(snap.count(need) && snap[need].first > 0, cat("invariant never checked: ", need));
    std::string detail = cat(snap.size(), " invariants, ", checks, " checks, ", bad, " violations");
    require(bad == 0, detail);
    return {true, detail};
}

bool report(int id, const char* name, const std::function<Outcome()>& f) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = f();
    } catch (const std::exception& e) {
        o = {false, e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %d %s: %s (%.1f s)\n", o.ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
    std::fflush(stdout);
    return o.ok;
}

template <class F>
std::function<Outcome()> timed(double limit, F f) {
    return [=] {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o = f();
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s > limit) o = {false, cat(o.detail, "; over the ", limit, " s limit")};
        return o;
    };
}

}

int main() {
    InvariantLedger::get().reset();
    bool ok = true;
    ok &= report(1, "worked example", worked_example);
    ok &= report(2, "single-stack pre*", timed(300, single_prestar));
    ok &= report(3, "ECPDS conservativity", ecpds_conservative);
    ok &= report(4, "ordered decision", timed(600, ordered_decision));
    ok &= report(5, "scope threshold", [] {
        return threshold(
            Mode::Scope, "fix_sc.sys",
            [](const Mcpds& s, unsigned b, Control i, Control o) { return scope_reachability(s, b, i, o); },
            [](const Mcpds& s, unsigned b, Control i, Control o) { return scope_reachability(s, b, i, o); },
            [](const Mcpds& s, unsigned b, Control t) { return scope_global(s, b, t); });
    });
    ok &= report(6, "phase threshold", [] {
        return threshold(
            Mode::Phase, "fix_ph.sys",
            [](const Mcpds& s, unsigned b, Control i, Control o) { return phase_reachability(s, b, i, o); },
            [](const Mcpds& s, unsigned b, Control i, Control o) { return PhaseSolver(s).reachable(i, o, b); },
            [](const Mcpds& s, unsigned b, Control t) { return PhaseSolver(s).global(t, b); });
    });
    ok &= report(8, "regular-set algebra", regular_algebra);
    ok &= report(9, "determinism", determinism);
    // last, so the tally covers every criterion above
    ok &= report(7, "structural invariants", invariants);
    return ok ? 0 : 1;
}
