#pragma once

// Systems, configurations and the concrete step relation.

#include <hocpds/stack.hpp>

#include <memory>

namespace hocpds {

using Control = std::uint32_t;

struct Rule {
    Control src = 0;
    Letter letter = kBottom;
    StackOp op;
    Control dst = 0;

    bool consuming() const { return op.consuming(); }
    auto operator<=>(const Rule&) const = default;
};

enum class Mode { Single, Ordered, Phase, Scope };

inline const char* mode_name(Mode m) {
    switch (m) {
    case Mode::Single: return "single";
    case Mode::Ordered: return "ordered";
    case Mode::Phase: return "phase";
    case Mode::Scope: return "scope";
    }
    return "?";
}

// Multi-stack CPDS; a plain CPDS is the one-stack case.
struct Mcpds {
    int order = 1;
    std::vector<std::string> controls;
    Alphabet alphabet;
    std::vector<std::vector<Rule>> stacks{1};
    Mode mode = Mode::Single;
    unsigned bound = 0;  // phases or scope

    std::size_t num_stacks() const { return stacks.size(); }
    std::size_t num_controls() const { return controls.size(); }

    Control add_control(const std::string& name) {
        for (Control c = 0; c < controls.size(); ++c)
            if (controls[c] == name) return c;
        controls.push_back(name);
        return static_cast<Control>(controls.size() - 1);
    }
    std::optional<Control> find_control(const std::string& name) const {
        for (Control c = 0; c < controls.size(); ++c)
            if (controls[c] == name) return c;
        return std::nullopt;
    }
    Control control(const std::string& name) const {
        auto c = find_control(name);
        if (!c) throw UnknownControl("unknown control '" + name + "'");
        return *c;
    }

    void validate() const {
        if (stacks.empty()) throw Error("system needs at least one stack");
        for (auto& rs : stacks)
            for (auto& r : rs) {
                if (r.src >= controls.size() || r.dst >= controls.size()) throw UnknownControl("rule control");
                if (r.letter >= alphabet.size()) throw Error("rule letter outside the alphabet");
                if (!op_valid_for_order(r.op, order)) throw Error("operation not in O_n");
                if (r.op.kind == OpKind::Rew && r.op.letter >= alphabet.size()) throw Error("rewrite letter");
            }
    }
};

inline std::string rule_to_string(const Rule& r, const Mcpds& sys) {
    return sys.controls.at(r.src) + " " + sys.alphabet.name(r.letter) + " " + op_to_string(r.op, sys.alphabet) +
           " " + sys.controls.at(r.dst);
}

struct Config {
    Control control = 0;
    std::vector<Stack> stacks;

    bool operator==(const Config&) const = default;
};

struct ConfigHash {
    std::size_t operator()(const Config& c) const {
        std::size_t h = c.control;
        for (auto s : c.stacks) detail::hash_mix(h, StackHash()(s));
        return h;
    }
};

inline Config initial_config(const Mcpds& sys, Control q) {
    return Config{q, std::vector<Stack>(sys.num_stacks(), bottom_stack(sys.order))};
}

inline std::string config_to_string(const Config& c, const Mcpds& sys, bool rounds = false) {
    std::string s = "<" + sys.controls.at(c.control);
    for (auto w : c.stacks) s += ", " + format_stack(w, sys.alphabet, rounds);
    return s + ">";
}

inline bool all_empty_below(const Config& c, std::size_t i, int n) {
    Stack b = bottom_stack(n);
    for (std::size_t j = 0; j < i; ++j)
        if (erase_rounds(c.stacks[j]) != b) return false;
    return true;
}

struct Successor {
    Rule rule;
    std::size_t stack;
    Config config;
};

// One-step successors. In ordered mode a consuming rule on stack i needs all
// lower stacks to be ⊥_n. Round tags are threaded through with round z.
inline std::vector<Successor> step(const Mcpds& sys, const Config& c, std::uint32_t z = 0) {
    std::vector<Successor> out;
    for (std::size_t i = 0; i < sys.num_stacks(); ++i) {
        auto tc = try_top_char(c.stacks[i]);
        if (!tc) continue;
        for (auto& r : sys.stacks[i]) {
            if (r.src != c.control || r.letter != tc->letter) continue;
            if (sys.mode == Mode::Ordered && r.consuming() && !all_empty_below(c, i, sys.order)) continue;
            auto w = try_apply(r.op, c.stacks[i], z);
            if (!w) continue;
            Config d = c;
            d.control = r.dst;
            d.stacks[i] = *w;
            out.push_back(Successor{r, i, std::move(d)});
        }
    }
    return out;
}

struct Run {
    std::vector<Config> configs;                  // configs.size() == steps.size() + 1
    std::vector<std::pair<Rule, std::size_t>> steps;  // rule and stack index

    bool replays(const Mcpds& sys) const {
        if (configs.size() != steps.size() + 1) return false;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            auto& [r, s] = steps[i];
            const Config& c = configs[i];
            if (r.src != c.control || s >= c.stacks.size()) return false;
            auto tc = try_top_char(c.stacks[s]);
            if (!tc || tc->letter != r.letter) return false;
            auto w = try_apply(r.op, c.stacks[s]);
            if (!w) return false;
            Config d = c;
            d.control = r.dst;
            d.stacks[s] = *w;
            if (!(erase_all(d) == erase_all(configs[i + 1]))) return false;
        }
        return true;
    }

    static Config erase_all(Config c) {
        for (auto& s : c.stacks) s = erase_rounds(s);
        return c;
    }
};

inline bool validate_ordered(const Run& run) {
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        auto& [r, s] = run.steps[i];
        const Config& c = run.configs[i];
        if (r.consuming() && !all_empty_below(c, s, c.stacks[s].order())) return false;
    }
    return true;
}

// Coarsest round partition: a new round starts whenever the stack index
// decreases. Returns the step indices per round (rounds numbered from 1).
inline std::optional<std::vector<std::vector<std::size_t>>> partition_rounds(const Run& run) {
    std::vector<std::vector<std::size_t>> rounds(1);
    std::size_t cur = 0;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        std::size_t s = run.steps[i].second;
        if (s < cur) rounds.emplace_back();
        cur = s;
        rounds.back().push_back(i);
    }
    return rounds;
}

// Replays the run with round-tagged stacks (initial material tagged 0, round
// numbers from 1) and checks each consumption against the scope bound.
inline bool validate_scope(const Run& run, unsigned zeta) {
    auto rounds = partition_rounds(run);
    if (!rounds) throw NotRoundPartitionable("run");
    if (run.configs.empty()) return true;
    std::vector<Stack> st;
    for (auto s : run.configs.front().stacks) st.push_back(erase_rounds(s));
    for (std::size_t z = 0; z < rounds->size(); ++z) {
        std::uint32_t round = static_cast<std::uint32_t>(z + 1);
        for (std::size_t i : (*rounds)[z]) {
            auto& [r, s] = run.steps[i];
            if (r.consuming()) {
                auto t = consumed_round(r.op, st[s]);
                if (!t || round > *t + zeta) return false;
            }
            auto w = try_apply(r.op, st[s], round);
            if (!w) return false;
            st[s] = *w;
        }
    }
    return true;
}

// minimal number of phases; each phase consumes from one stack only
inline std::size_t min_phases(const Run& run) {
    std::size_t phases = 1;
    std::optional<std::size_t> cur;
    for (auto& [r, s] : run.steps) {
        if (!r.consuming()) continue;
        if (cur && *cur != s) ++phases;
        cur = s;
    }
    return phases;
}

inline bool validate_phase(const Run& run, unsigned z) { return min_phases(run) <= z; }

}
