#pragma once

// Bounded explicit-state exploration, used as ground truth by the tests.

#include <hocpds/automaton.hpp>
#include <hocpds/model.hpp>

#include <functional>
#include <queue>
#include <random>

namespace hocpds {

struct ExploreBounds {
    std::size_t max_steps = 64;
    std::size_t max_size = 24;      // tree size of any single stack
    std::size_t max_configs = 200000;
};

enum class Verdict { Reachable, UnreachableWithinBounds, UnreachableClosed };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Reachable: return "reachable";
    case Verdict::UnreachableWithinBounds: return "unknown-within-bounds";
    case Verdict::UnreachableClosed: return "unreachable";
    }
    return "?";
}

struct ExploreResult {
    bool closed = true;
    std::size_t explored = 0;
    std::vector<std::optional<Run>> witness;  // per control, shortest run reaching it

    Verdict verdict(Control q) const {
        if (witness.at(q)) return Verdict::Reachable;
        return closed ? Verdict::UnreachableClosed : Verdict::UnreachableWithinBounds;
    }
};

namespace detail {

// Search state: configuration plus the bookkeeping of the run restriction.
// Scope mode keeps round tags relative to the current round: a tag t is
// alive iff t >= 1 and the current round is always zeta + 1.
struct SearchState {
    Config c;
    std::uint32_t x = 0, y = 0;  // scope: current stack; phase: phases used, current consuming stack + 1
    bool operator==(const SearchState&) const = default;
};

struct SearchStateHash {
    std::size_t operator()(const SearchState& s) const {
        std::size_t h = ConfigHash()(s.c);
        hash_mix(h, s.x);
        hash_mix(h, s.y);
        return h;
    }
};

inline std::vector<std::pair<Successor, SearchState>> search_successors(const Mcpds& sys, const SearchState& s) {
    std::vector<std::pair<Successor, SearchState>> out;
    if (sys.mode == Mode::Scope) {
        const std::uint32_t zeta = sys.bound;
        for (std::size_t i = 0; i < sys.num_stacks(); ++i) {
            SearchState base = s;
            if (i < s.x) {
                for (auto& w : base.c.stacks) w = map_rounds(w, [](std::uint32_t t) { return t > 0 ? t - 1 : 0; });
            }
            base.x = static_cast<std::uint32_t>(i);
            auto tc = try_top_char(base.c.stacks[i]);
            if (!tc) continue;
            for (auto& r : sys.stacks[i]) {
                if (r.src != base.c.control || r.letter != tc->letter) continue;
                if (r.consuming()) {
                    auto t = consumed_round(r.op, base.c.stacks[i]);
                    if (!t || *t < 1) continue;
                }
                auto w = try_apply(r.op, base.c.stacks[i], zeta + 1);
                if (!w) continue;
                SearchState d = base;
                d.c.control = r.dst;
                d.c.stacks[i] = *w;
                out.push_back({Successor{r, i, d.c}, std::move(d)});
            }
        }
        return out;
    }
    for (auto& succ : step(sys, s.c)) {
        SearchState d{succ.config, s.x, s.y};
        if (sys.mode == Mode::Phase && succ.rule.consuming()) {
            std::uint32_t st = static_cast<std::uint32_t>(succ.stack + 1);
            if (d.y != 0 && d.y != st) ++d.x;
            d.y = st;
            if (d.x > sys.bound) continue;
        }
        out.push_back({succ, std::move(d)});
    }
    return out;
}

inline SearchState initial_search_state(const Mcpds& sys, const Config& start) {
    SearchState s{start, 0, 0};
    if (sys.mode == Mode::Scope) {
        std::uint32_t zeta = sys.bound;
        for (auto& w : s.c.stacks) w = map_rounds(erase_rounds(w), [zeta](std::uint32_t) { return zeta; });
    }
    if (sys.mode == Mode::Phase) s.x = 1;
    return s;
}

}

// Breadth-first search from start under the system's mode. Witness runs are
// shortest and carry plain (untagged) stacks.
inline ExploreResult explore(const Mcpds& sys, const Config& start, const ExploreBounds& b = {}) {
    using detail::SearchState;
    ExploreResult res;
    res.witness.resize(sys.num_controls());
    std::vector<SearchState> states;
    std::vector<std::pair<std::size_t, std::pair<Rule, std::size_t>>> parent;
    std::vector<std::size_t> depth;
    std::unordered_map<SearchState, std::size_t, detail::SearchStateHash> seen;

    auto witness_to = [&](std::size_t id) {
        Run run;
        std::vector<std::size_t> path;
        for (std::size_t x = id; x != SIZE_MAX; x = parent[x].first) path.push_back(x);
        std::reverse(path.begin(), path.end());
        for (std::size_t i = 0; i < path.size(); ++i) {
            run.configs.push_back(Run::erase_all(states[path[i]].c));
            if (i) run.steps.push_back(parent[path[i]].second);
        }
        return run;
    };
    auto add = [&](SearchState s, std::size_t from, std::pair<Rule, std::size_t> via, std::size_t d) {
        auto [it, fresh] = seen.emplace(s, states.size());
        if (!fresh) return;
        states.push_back(std::move(s));
        parent.push_back({from, via});
        depth.push_back(d);
        Control q = states.back().c.control;
        if (!res.witness[q]) res.witness[q] = witness_to(states.size() - 1);
    };

    add(detail::initial_search_state(sys, start), SIZE_MAX, {}, 0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (depth[i] >= b.max_steps) {
            if (!detail::search_successors(sys, states[i]).empty()) res.closed = false;
            continue;
        }
        for (auto& [succ, d] : detail::search_successors(sys, states[i])) {
            bool too_big = false;
            for (auto w : d.c.stacks) too_big = too_big || tree_size(w) > b.max_size;
            if (too_big || states.size() >= b.max_configs) {
                res.closed = false;
                continue;
            }
            add(std::move(d), i, {succ.rule, succ.stack}, depth[i] + 1);
        }
    }
    res.explored = states.size();
    return res;
}

enum class Tri { No, Yes, Unknown };

// For every configuration in `configs`, whether it can reach L(a0) (single
// stack). Exploration is joint from all roots; a root is Unknown when it
// reaches a truncated state without reaching L(a0).
using StepFn = std::function<std::vector<Config>(const Config&)>;

inline std::vector<Tri> prestar_oracle(const StepFn& next, const PAutomaton& a0, const std::vector<Config>& configs,
                                       const ExploreBounds& b = {}) {
    std::unordered_map<Config, std::size_t, ConfigHash> id;
    std::vector<Config> nodes;
    std::vector<std::vector<std::size_t>> preds;
    std::vector<char> truncated;
    auto add = [&](const Config& c) {
        auto [it, fresh] = id.emplace(c, nodes.size());
        if (fresh) {
            nodes.push_back(c);
            preds.emplace_back();
            truncated.push_back(0);
        }
        return it->second;
    };
    for (auto& c : configs) add(c);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (auto& d : next(nodes[i])) {
            if (tree_size(d.stacks[0]) > b.max_size || nodes.size() >= b.max_configs) {
                truncated[i] = 1;
                continue;
            }
            std::size_t j = add(d);
            preds[j].push_back(i);
        }
    }
    std::vector<Tri> val(nodes.size(), Tri::No);
    Acceptor acc(a0.aut);
    std::vector<std::size_t> work;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (acc.accepts(a0.head.at(nodes[i].control), nodes[i].stacks[0])) {
            val[i] = Tri::Yes;
            work.push_back(i);
        }
    while (!work.empty()) {
        std::size_t j = work.back();
        work.pop_back();
        for (std::size_t i : preds[j])
            if (val[i] != Tri::Yes) {
                val[i] = Tri::Yes;
                work.push_back(i);
            }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (truncated[i] && val[i] == Tri::No) {
            val[i] = Tri::Unknown;
            work.push_back(i);
        }
    while (!work.empty()) {
        std::size_t j = work.back();
        work.pop_back();
        for (std::size_t i : preds[j])
            if (val[i] == Tri::No) {
                val[i] = Tri::Unknown;
                work.push_back(i);
            }
    }
    val.resize(configs.size());
    return val;
}

inline std::vector<Tri> prestar_oracle(const Mcpds& sys, const PAutomaton& a0, const std::vector<Config>& configs,
                                       const ExploreBounds& b = {}, std::size_t stack = 0) {
    Mcpds one = sys;
    one.stacks = {sys.stacks.at(stack)};
    one.mode = Mode::Single;
    auto next = [&](const Config& c) {
        std::vector<Config> out;
        for (auto& s : step(one, c)) out.push_back(std::move(s.config));
        return out;
    };
    return prestar_oracle(next, a0, configs, b);
}

// All well-formed order-`order` stacks of tree size at most max_size. Chars
// may carry annotations of order 2..n (empty annotations included); order-1
// annotations never arise from the operations and are not generated.
class StackEnumerator {
public:
    StackEnumerator(int n, std::vector<Letter> letters, bool annotations = true)
        : n_(n), letters_(std::move(letters)), annotations_(annotations) {}

    std::vector<Stack> upto(int order, std::size_t max_size) {
        std::vector<Stack> out;
        for (std::size_t s = 1; s <= max_size; ++s) {
            auto& v = exact(order, s);
            out.insert(out.end(), v.begin(), v.end());
        }
        return out;
    }

    const std::vector<Stack>& exact(int order, std::size_t size) {
        auto key = std::make_pair(order, size);
        auto it = stacks_.find(key);
        if (it != stacks_.end()) return it->second;
        std::vector<Stack> out;
        if (size >= 2) {
            if (order == 1) {
                // [c_1 .. c_m ⊥]: ⊥ costs 1, the rest size - 2
                for (auto& cs : char_seqs(size - 2)) {
                    std::vector<Char> v{Char{kBottom, {}, 0, 0}};
                    v.insert(v.end(), cs.begin(), cs.end());
                    out.push_back(make_stack1(v));
                }
            } else {
                for (auto& es : elem_seqs(order - 1, size - 1)) out.push_back(make_stack(order, es));
            }
        }
        return stacks_[key] = std::move(out);
    }

private:
    // bottom-first sequences of non-⊥ chars of total size s (possibly empty)
    const std::vector<std::vector<Char>>& char_seqs(std::size_t s) {
        auto it = cseq_.find(s);
        if (it != cseq_.end()) return it->second;
        std::vector<std::vector<Char>> out;
        if (s == 0) out.push_back({});
        for (std::size_t first = 1; first <= s; ++first) {
            for (auto& c : chars(first))
                for (auto& rest : char_seqs(s - first)) {
                    std::vector<Char> v{c};
                    v.insert(v.end(), rest.begin(), rest.end());
                    out.push_back(std::move(v));
                }
        }
        return cseq_[s] = std::move(out);
    }

    std::vector<Char> chars(std::size_t s) {
        std::vector<Char> out;
        for (Letter a : letters_) {
            if (a == kBottom) continue;
            if (s == 1) out.push_back(Char{a, {}, 0, 0});
            if (!annotations_ || s < 2) continue;
            for (int k = 2; k <= n_; ++k) {
                if (s == 2) out.push_back(Char{a, empty_stack(k), 0, 0});
                for (auto w : exact(k, s - 1)) out.push_back(Char{a, w, 0, 0});
            }
        }
        return out;
    }

    // nonempty bottom-first sequences of well-formed order-k stacks, total size s
    const std::vector<std::vector<Stack>>& elem_seqs(int k, std::size_t s) {
        auto key = std::make_pair(k, s);
        auto it = eseq_.find(key);
        if (it != eseq_.end()) return it->second;
        std::vector<std::vector<Stack>> out;
        for (std::size_t first = 1; first <= s; ++first) {
            for (auto w : exact(k, first)) {
                if (first == s) out.push_back({w});
                for (auto& rest : elem_seqs(k, s - first)) {
                    std::vector<Stack> v{w};
                    v.insert(v.end(), rest.begin(), rest.end());
                    out.push_back(std::move(v));
                }
            }
        }
        return eseq_[key] = std::move(out);
    }

    int n_;
    std::vector<Letter> letters_;
    bool annotations_;
    std::map<std::pair<int, std::size_t>, std::vector<Stack>> stacks_;
    std::map<std::size_t, std::vector<std::vector<Char>>> cseq_;
    std::map<std::pair<int, std::size_t>, std::vector<std::vector<Stack>>> eseq_;
};

struct RandomProfile {
    int order = 2;
    std::size_t controls = 4;
    std::size_t letters = 2;   // besides ⊥
    std::size_t stacks = 1;
    std::size_t rules_per_stack = 6;
    Mode mode = Mode::Single;
    unsigned bound = 0;
    bool collapse = true;
};

// Reproducible random system. Operations that can grow the stack (push,
// copy) and rewrites strictly increase the control index, so every run has
// boundedly many of them and the reachable space from any configuration is
// finite; pops, collapses and noops are unrestricted.
inline Mcpds gen_random_system(std::uint64_t seed, const RandomProfile& p) {
    std::mt19937_64 rng(seed);
    Mcpds sys;
    sys.order = p.order;
    sys.mode = p.mode;
    sys.bound = p.bound;
    for (std::size_t i = 0; i < p.controls; ++i) sys.add_control("q" + std::to_string(i));
    for (std::size_t i = 0; i < p.letters; ++i) sys.alphabet.add(std::string(1, char('a' + i)));
    sys.stacks.assign(p.stacks, {});
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto letter = [&](bool with_bottom) {
        return static_cast<Letter>(with_bottom ? pick(p.letters + 1) : 1 + pick(p.letters));
    };
    for (auto& rs : sys.stacks) {
        std::set<Rule> chosen;
        for (std::size_t tries = 0; chosen.size() < p.rules_per_stack && tries < 50 * p.rules_per_stack; ++tries) {
            Rule r;
            r.src = static_cast<Control>(pick(p.controls));
            r.letter = letter(true);
            int kind = static_cast<int>(pick(p.collapse && p.order >= 2 ? 6 : 5));
            int k = 1 + static_cast<int>(pick(p.order));
            switch (kind) {
            case 0: r.op = StackOp::noop(); break;
            case 1: r.op = StackOp::rew(r.letter == kBottom ? kBottom : letter(false)); break;
            case 2: r.op = StackOp::push(letter(false), k); break;
            case 3: r.op = p.order >= 2 ? StackOp::copy(std::max(2, k)) : StackOp::push(letter(false), 1); break;
            case 4: r.op = StackOp::pop(k); break;
            default: r.op = StackOp::collapse(std::max(2, k)); break;
            }
            bool grows = r.op.kind == OpKind::Push || r.op.kind == OpKind::Copy || r.op.kind == OpKind::Rew;
            if (grows) {
                if (r.src + 1 >= p.controls) continue;
                r.dst = static_cast<Control>(r.src + 1 + pick(p.controls - r.src - 1));
            } else {
                r.dst = static_cast<Control>(pick(p.controls));
            }
            if (!op_valid_for_order(r.op, p.order)) continue;
            if (r.letter == kBottom && r.op.consuming()) continue;
            chosen.insert(r);
        }
        rs.assign(chosen.begin(), chosen.end());
    }
    sys.validate();
    return sys;
}

// Random target automaton: some controls accept everything, others get a few
// random long forms over a pool of states that accept all nonempty stacks of
// their order or specific letters.
inline PAutomaton gen_random_target(std::uint64_t seed, const Mcpds& sys) {
    std::mt19937_64 rng(seed);
    const int n = sys.order;
    PAutomaton a(n, sys.num_controls());
    // pool per order: state accepting everything nonempty, and one requiring a given top letter
    std::vector<std::vector<State>> pool(n + 1);
    for (int k = 1; k <= n; ++k) {
        State u = a.aut.add_state(k);
        for (Letter x : sys.alphabet.letters())
            a.aut.add_long_form(LongForm{u, x, {}, std::vector<StateSet>(k)});
        pool[k].push_back(u);
        State v = a.aut.add_state(k);
        Letter x = static_cast<Letter>(rng() % sys.alphabet.size());
        a.aut.add_long_form(LongForm{v, x, {}, std::vector<StateSet>(k)});
        pool[k].push_back(v);
    }
    for (Control c = 0; c < sys.num_controls(); ++c) {
        switch (rng() % 4) {
        case 0: a.accept_all(c, sys.alphabet); break;
        case 1: break;
        default: {
            std::size_t m = 1 + rng() % 3;
            for (std::size_t i = 0; i < m; ++i) {
                LongForm t{a.head[c], static_cast<Letter>(rng() % sys.alphabet.size()), {}, std::vector<StateSet>(n)};
                for (int k = 1; k <= n; ++k)
                    if (rng() % 2) t.to[k - 1] = {pool[k][rng() % pool[k].size()]};
                if (n >= 2 && rng() % 4 == 0) t.branch = {pool[n][rng() % pool[n].size()]};
                a.aut.add_long_form(t);
            }
        }
        }
    }
    return a;
}

}
