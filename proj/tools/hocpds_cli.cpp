// hocpds: command-line front end.
//
//   hocpds check FILE [--from q] [--to q] [--witness] [--bound N] [--sat MODE]
//   hocpds global FILE [--to q] [--out PATH] [--dot DIR] [--graph PATH] [--bound N]
//   hocpds member SET CONFIG
//   hocpds simulate FILE [--from CONFIG] [--steps B] [--to q]
//   hocpds selftest [--seeds K] [--start S] [--jobs J] [--reproducer PATH]
//
// Exit codes: 0 reachable / member / success, 1 unreachable / not a member /
// selftest divergence, 2 usage, parse or validation error.

#include <hocpds/oracle.hpp>
#include <hocpds/ordered.hpp>
#include <hocpds/phases.hpp>
#include <hocpds/scopes.hpp>
#include <hocpds/serialize.hpp>
#include <hocpds/sysfile.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

using namespace hocpds;

namespace {

struct Usage : Error {
    using Error::Error;
};

SaturationOptions sat_options(const std::string& s) {
    SaturationOptions o;
    if (s == "auto") o.mode = SatMode::Auto;
    else if (s == "full") o.mode = SatMode::Full;
    else if (s == "optimized") o.mode = SatMode::Optimized;
    else throw Usage("--sat must be auto, full or optimized");
    return o;
}

Control pick(const SystemFile& f, const std::string& name, bool from) {
    if (!name.empty()) return f.sys.control(name);
    if (!f.query) throw Usage(std::string("no --") + (from ? "from" : "to") + " and no query line in the file");
    return from ? f.query->first : f.query->second;
}

json doc_header(const char* cmd, const SystemFile& f) {
    return json{{"schema", kResultSchema}, {"command", cmd}, {"mode", mode_name(f.sys.mode)},
                {"order", f.sys.order},    {"stacks", f.sys.num_stacks()}};
}

unsigned bound_of(const Mcpds& s) {
    if (s.bound == 0) throw Usage("mode needs a positive bound");
    return s.bound;
}

// single-stack target: --to wins, then the target lines, then the query
PAutomaton single_target(const SystemFile& f, const std::string& to, std::string* label) {
    if (to.empty() && !f.targets.empty()) {
        *label = "target";
        return f.target_automaton();
    }
    Control q = pick(f, to, false);
    *label = f.sys.controls[q];
    return control_target(f.sys, q);
}

json saturation_stats(const SaturationStats& st, const PAutomaton& a) {
    return json{{"iterations", st.iterations},
                {"added", st.added},
                {"optimized", st.optimized},
                {"states", a.aut.num_states()},
                {"transitions", a.aut.num_transitions()}};
}

PAutomaton single_prestar(const SystemFile& f, const PAutomaton& a0, const SaturationOptions& opt,
                          SaturationStats* st) {
    if (f.ext.empty()) return prestar(f.sys, a0, opt, st);
    return prestar_extended(f.ecpds(), a0, opt, st);
}

// --bound overrides the phase or scope bound of the file
SystemFile load_with_bound(const std::string& path, unsigned bound) {
    SystemFile f = load_system(path);
    if (bound) {
        if (f.sys.mode != Mode::Phase && f.sys.mode != Mode::Scope) throw Usage("--bound needs mode phase or scope");
        f.sys.bound = bound;
    }
    return f;
}

int cmd_check(const std::string& path, const std::string& from, const std::string& to, bool witness,
              const std::string& sat, unsigned bound) {
    SystemFile f = load_with_bound(path, bound);
    auto opt = sat_options(sat);
    const Mcpds& s = f.sys;
    Control qin = pick(f, from, true);
    json doc = doc_header("check", f);
    doc["from"] = s.controls[qin];
    if (s.mode == Mode::Phase || s.mode == Mode::Scope) doc["bound"] = s.bound;
    bool reach = false;
    if (s.num_stacks() == 1 && (s.mode == Mode::Single || !f.ext.empty() || !f.targets.empty())) {
        std::string label;
        PAutomaton a0 = single_target(f, to, &label);
        doc["to"] = label;
        SaturationStats st;
        PAutomaton a = single_prestar(f, a0, opt, &st);
        reach = a.member(qin, bottom_stack(s.order));
        doc["statistics"] = saturation_stats(st, a);
    } else {
        Control qout = pick(f, to, false);
        doc["to"] = s.controls[qout];
        switch (s.mode) {
        case Mode::Single:
        case Mode::Ordered: {
            Mcpds o = s;
            o.mode = s.num_stacks() > 1 ? Mode::Ordered : Mode::Single;
            OrderedSolver solver(opt);
            reach = solver.reachable(o, qin, qout);
            auto& st = solver.stats();
            doc["statistics"] = json{{"language_queries", st.language_queries},
                                     {"product_controls", st.product_controls},
                                     {"max_depth", st.max_depth}};
            break;
        }
        case Mode::Phase: {
            PhaseSolver solver(s, opt);
            reach = solver.reachable(qin, qout, bound_of(s));
            auto& st = solver.stats();
            doc["statistics"] = json{{"tuples", st.tuples},
                                     {"products", st.products},
                                     {"product_controls", st.product_controls},
                                     {"memo_hits", st.memo_hits}};
            break;
        }
        case Mode::Scope: {
            ScopeSolver solver(s, bound_of(s), opt);
            reach = solver.reachable(qin, qout);
            auto& st = solver.stats();
            doc["statistics"] = json{{"vertices", st.vertices},   {"initial", st.initial},
                                     {"edges", st.edges},         {"automata", st.automata},
                                     {"predecessors", st.predecessors}, {"max_states", st.max_states}};
            break;
        }
        }
    }
    doc["verdict"] = reach ? "reachable" : "unreachable";
    if (witness && reach && f.ext.empty() && f.targets.empty()) {
        Control qout = pick(f, to, false);
        auto r = explore(s, initial_config(s, qin));
        if (r.witness[qout]) doc["witness"] = run_to_json(*r.witness[qout], s);
        else doc["witness"] = verdict_name(r.verdict(qout));
    }
    std::cout << doc.dump(2) << "\n";
    return reach ? 0 : 1;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Usage("cannot write '" + p.string() + "'");
    out << text;
}

int cmd_global(const std::string& path, const std::string& to, const std::string& out, const std::string& dot,
               const std::string& graph, const std::string& sat, unsigned bound) {
    SystemFile f = load_with_bound(path, bound);
    auto opt = sat_options(sat);
    const Mcpds& s = f.sys;
    json doc = doc_header("global", f);
    if (s.mode == Mode::Phase || s.mode == Mode::Scope) doc["bound"] = s.bound;
    RegularConfigSet set;
    if (s.num_stacks() == 1 && (s.mode == Mode::Single || !f.ext.empty() || !f.targets.empty())) {
        std::string label;
        PAutomaton a0 = single_target(f, to, &label);
        doc["to"] = label;
        SaturationStats st;
        PAutomaton a = single_prestar(f, a0, opt, &st);
        set = from_pautomaton(a);
        doc["statistics"] = saturation_stats(st, a);
    } else {
        Control qout = pick(f, to, false);
        doc["to"] = s.controls[qout];
        switch (s.mode) {
        case Mode::Single:
        case Mode::Ordered: {
            Mcpds o = s;
            o.mode = s.num_stacks() > 1 ? Mode::Ordered : Mode::Single;
            OrderedSolver solver(opt);
            set = solver.global(o, qout);
            doc["statistics"] = json{{"language_queries", solver.stats().language_queries}};
            break;
        }
        case Mode::Phase: {
            PhaseSolver solver(s, opt);
            set = solver.global(qout, bound_of(s));
            doc["statistics"] = json{{"tuples", solver.stats().tuples}, {"products", solver.stats().products}};
            break;
        }
        case Mode::Scope: {
            ScopeSolver solver(s, bound_of(s), opt);
            set = solver.global(qout);
            doc["statistics"] = json{{"vertices", solver.stats().vertices}, {"automata", solver.stats().automata}};
            if (!graph.empty()) write_file(graph, solver.graph_dot(qout));
            break;
        }
        }
    }
    doc["verdict"] = set.is_empty() ? "unreachable" : "reachable";
    doc["set"] = set_to_json(set, s);
    if (!dot.empty()) {
        std::filesystem::create_directories(dot);
        auto& auts = doc["set"]["automata"];
        for (std::size_t i = 0; i < auts.size(); ++i) {
            StackAutomaton a = automaton_from_json(auts[i], s.alphabet);
            write_file(std::filesystem::path(dot) / ("automaton" + std::to_string(i) + ".dot"),
                       a.to_dot({}, &s.alphabet));
        }
    }
    std::string text = doc.dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else write_file(out, text);
    return 0;
}

int cmd_member(const std::string& path, const std::string& config) {
    std::ifstream in(path);
    if (!in) throw Usage("cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Usage(std::string("bad JSON: ") + e.what());
    }
    const json& sj = j.contains("set") ? j.at("set") : j;
    auto [set, sys] = set_from_json(sj);
    Config c = parse_config(config, sys);
    bool m = set.member(c);
    json doc{{"schema", kResultSchema}, {"command", "member"}, {"config", config_to_string(c, sys)}, {"member", m}};
    std::cout << doc.dump(2) << "\n";
    return m ? 0 : 1;
}

int cmd_simulate(const std::string& path, const std::string& from, std::size_t steps, const std::string& to) {
    SystemFile f = load_system(path);
    const Mcpds& s = f.sys;
    Config start = from.empty() ? initial_config(s, pick(f, "", true)) : parse_config(from, s);
    if (start.stacks.size() != s.num_stacks()) throw ArityMismatch("configuration has the wrong number of stacks");
    ExploreBounds b;
    b.max_steps = steps;
    auto r = explore(s, start, b);
    std::vector<Control> targets;
    if (!to.empty()) targets.push_back(s.control(to));
    else
        for (Control q = 0; q < s.num_controls(); ++q) targets.push_back(q);
    bool any = false;
    for (Control q : targets) {
        std::cout << "to " << s.controls[q] << ": ";
        if (!r.witness[q]) {
            std::cout << verdict_name(r.verdict(q)) << "\n";
            continue;
        }
        any = true;
        const Run& run = *r.witness[q];
        std::cout << run.steps.size() << " steps\n";
        for (std::size_t i = 0; i < run.configs.size(); ++i) {
            if (i) std::cout << "  -- stack " << run.steps[i - 1].second + 1 << ": "
                             << rule_to_string(run.steps[i - 1].first, s) << "\n";
            std::cout << "  " << config_to_string(run.configs[i], s) << "\n";
        }
    }
    return any ? 0 : 1;
}

// ---- selftest

struct Divergence {
    std::uint64_t seed;
    std::string what;
    std::string system;
};

std::optional<Divergence> selftest_seed(std::uint64_t seed, bool fault, std::size_t& checks) {
    RandomProfile p;
    p.controls = 3;
    p.letters = 2;
    p.order = 1 + static_cast<int>(seed / 4 % 2);
    const int family = static_cast<int>(seed % 4);
    bool flip = fault;
    auto diverged = [&](const Mcpds& sys, const std::string& what) {
        SystemFile f;
        f.sys = sys;
        return Divergence{seed, what, "// selftest seed " + std::to_string(seed) + ": " + what + "\n" + write_system(f)};
    };
    auto solver_says = [&](bool v) {
        if (flip) {
            flip = false;
            return !v;
        }
        return v;
    };
    if (family == 0) {
        p.rules_per_stack = 5;
        Mcpds sys = gen_random_system(seed, p);
        PAutomaton a0 = gen_random_target(seed, sys);
        PAutomaton a = prestar(sys, a0);
        StackEnumerator en(sys.order, sys.alphabet.letters());
        std::vector<Config> cs;
        for (auto w : en.upto(sys.order, sys.order == 1 ? 5 : 6))
            for (Control c = 0; c < sys.num_controls(); ++c) cs.push_back(Config{c, {w}});
        auto truth = prestar_oracle(sys, a0, cs);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (truth[i] == Tri::Unknown) continue;
            ++checks;
            if (solver_says(a.member(cs[i].control, cs[i].stacks[0])) != (truth[i] == Tri::Yes))
                return diverged(sys, "pre* membership of " + config_to_string(cs[i], sys));
        }
        return std::nullopt;
    }
    p.stacks = 2;
    p.rules_per_stack = 4;
    p.mode = family == 1 ? Mode::Ordered : family == 2 ? Mode::Phase : Mode::Scope;
    Mcpds base = gen_random_system(seed, p);
    for (unsigned z = 1; z <= (family == 1 ? 1u : 2u); ++z) {
        Mcpds sys = base;
        sys.bound = z;
        auto r = explore(sys, initial_config(sys, 0));
        std::optional<PhaseSolver> ph;
        std::optional<ScopeSolver> sc;
        if (family == 2) ph.emplace(sys);
        if (family == 3) sc.emplace(sys, z);
        OrderedSolver ord;
        for (Control q = 1; q < sys.num_controls(); ++q) {
            bool got = family == 1 ? ord.reachable(sys, 0, q) : family == 2 ? ph->reachable(0, q, z) : sc->reachable(0, q);
            got = solver_says(got);
            bool expect = r.verdict(q) == Verdict::Reachable;
            ++checks;
            // without a closed search only positive oracle answers are definite
            if (got != expect && (r.closed || expect))
                return diverged(sys, std::string(mode_name(sys.mode)) + " reachability of " + sys.controls[q] +
                                         " (solver " + (got ? "true" : "false") + ")");
        }
    }
    return std::nullopt;
}

int cmd_selftest(std::uint64_t seeds, std::uint64_t start, unsigned jobs, const std::string& repro, bool fault) {
    if (jobs == 0) jobs = 1;
    std::vector<std::optional<Divergence>> res(seeds);
    std::vector<std::size_t> checks(seeds);
    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (std::uint64_t i; (i = next++) < seeds;) {
            try {
                res[i] = selftest_seed(start + i, fault && i == 0, checks[i]);
            } catch (const std::exception& e) {
                res[i] = Divergence{start + i, std::string("exception: ") + e.what(), ""};
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& d : res) {
        if (!d) continue;
        write_file(repro, d->system);
        std::cout << "selftest: divergence at seed " << d->seed << ": " << d->what << "\n"
                  << "selftest: reproducer written to " << repro << "\n";
        return 1;
    }
    std::size_t total = 0;
    for (auto c : checks) total += c;
    std::cout << "selftest: " << seeds << " seeds, " << total << " comparisons, no divergence\n";
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Reachability for collapsible pushdown systems and their multi-stack variants"};
    app.require_subcommand(1);
    std::string file, from, to, out, dot, graph, config, sat = "auto", repro = "selftest-repro.sys";
    bool witness = false, fault = false;
    std::size_t steps = 32;
    std::uint64_t seeds = 50, start = 0;
    unsigned jobs = 1, bound = 0;

    auto* check = app.add_subcommand("check", "decide control state reachability");
    check->add_option("file", file, "system file")->required();
    check->add_option("--from", from, "initial control (stacks at bottom)");
    check->add_option("--to", to, "target control");
    check->add_flag("--witness", witness, "attach a shortest witness run from the bounded oracle");
    check->add_option("--sat", sat, "saturation mode: auto, full or optimized");
    check->add_option("--bound", bound, "override the phase or scope bound");

    auto* global = app.add_subcommand("global", "regular set of configurations reaching the target");
    global->add_option("file", file, "system file")->required();
    global->add_option("--to", to, "target control");
    global->add_option("--out", out, "write the result document here instead of stdout");
    global->add_option("--dot", dot, "directory for one DOT file per automaton");
    global->add_option("--graph", graph, "DOT file for the scope reachability graph");
    global->add_option("--sat", sat, "saturation mode: auto, full or optimized");
    global->add_option("--bound", bound, "override the phase or scope bound");

    auto* member = app.add_subcommand("member", "membership in a set from 'global'");
    member->add_option("set", file, "result document or set JSON")->required();
    member->add_option("config", config, "configuration, e.g. \"p [[a #]1]2 [[#]1]2\"")->required();

    auto* simulate = app.add_subcommand("simulate", "shortest mode-respecting runs from a configuration");
    simulate->add_option("file", file, "system file")->required();
    simulate->add_option("--from", from, "start configuration (default: the query control on empty stacks)");
    simulate->add_option("--steps", steps, "step bound");
    simulate->add_option("--to", to, "only this control");

    auto* selftest = app.add_subcommand("selftest", "differential check of the solvers against the oracle");
    selftest->add_option("--seeds", seeds, "number of random instances");
    selftest->add_option("--start", start, "first seed");
    selftest->add_option("--jobs", jobs, "worker threads");
    selftest->add_option("--reproducer", repro, "where to write the first diverging system");
    selftest->add_flag("--inject-fault", fault, "flip the first solver answer (harness check)")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (*check) return cmd_check(file, from, to, witness, sat, bound);
        if (*global) return cmd_global(file, to, out, dot, graph, sat, bound);
        if (*member) return cmd_member(file, config);
        if (*simulate) return cmd_simulate(file, from, steps, to);
        if (*selftest) return cmd_selftest(seeds, start, jobs, repro, fault);
    } catch (const ParseError& e) {
        std::cerr << file << ":" << e.what() << "\n";
        return 2;
    } catch (const BudgetExceeded& e) {
        std::cerr << "unknown-within-bounds: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
