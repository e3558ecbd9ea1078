#pragma once

// Extended CPDS: rules that apply a whole word of generating rules in one
// step, and the saturation that handles them through transition automata.

#include <hocpds/oracle.hpp>
#include <hocpds/saturate.hpp>

#include <memory>

namespace hocpds {

class Language;

struct ExtRule {
    Control src = 0;
    Letter letter = kBottom;
    std::shared_ptr<const Language> lang;
    Control dst = 0;
};

// Edges into t2 of the transition automaton T(A): every (r, t1) with
// t1 in auxsat_r(t2, A), over all generating rules of the given controls and
// alphabet. The rule's letter and target head are forced by t2.
inline std::vector<std::pair<Rule, LongForm>> ta_successors(const LongForm& t2, const StackAutomaton& a,
                                                            const std::vector<State>& head,
                                                            const Alphabet& al) {
    std::vector<std::pair<Rule, LongForm>> out;
    auto dst = std::find(head.begin(), head.end(), t2.head);
    if (dst == head.end()) return out;
    const Control q2 = static_cast<Control>(dst - head.begin());
    const Letter b = t2.letter;
    const int n = a.order();
    std::vector<std::pair<Letter, StackOp>> ops;
    for (Letter x : al.letters()) {
        if (x != kBottom && b != kBottom) ops.push_back({x, StackOp::rew(b)});
        if (b != kBottom)
            for (int k = 1; k <= n; ++k) ops.push_back({x, StackOp::push(b, k)});
    }
    ops.push_back({b, StackOp::noop()});
    if (b == kBottom) ops.push_back({b, StackOp::rew(b)});
    for (int k = 2; k <= n; ++k) ops.push_back({b, StackOp::copy(k)});
    for (Control q = 0; q < head.size(); ++q)
        for (auto& [x, op] : ops) {
            Rule r{q, x, op, q2};
            for (auto& t1 : auxsat_generating(r, t2, a, head)) out.push_back({r, t1});
        }
    return out;
}

// A language of words over generating rules, as used by extended rules. The
// decision capability is batched: for a target t' it returns every t with
// the rule's control and letter such that L meets L(T(A, t, t')).
class Language {
public:
    virtual ~Language() = default;
    virtual std::string name() const = 0;
    virtual std::vector<LongForm> sources(const ExtRule& r, const LongForm& target, const StackAutomaton& a,
                                          const std::vector<State>& head) const = 0;
    // sources of every transition from the head of r's target control
    virtual std::vector<LongForm> sources_all(const ExtRule& r, const StackAutomaton& a,
                                              const std::vector<State>& head) const;
    // the words, when the language is finite and listed
    virtual const std::vector<std::vector<Rule>>* words() const { return nullptr; }

    bool intersects(const ExtRule& r, const LongForm& t, const LongForm& target, const StackAutomaton& a,
                    const std::vector<State>& head) const {
        auto v = sources(r, target, a, head);
        return std::find(v.begin(), v.end(), t) != v.end();
    }
};

// Finite explicit language: runs each word backwards through T(A).
class FiniteLanguage : public Language {
public:
    FiniteLanguage(std::string name, std::vector<std::vector<Rule>> words)
        : name_(std::move(name)), words_(std::move(words)) {
        for (auto& w : words_)
            for (auto& r : w)
                if (r.consuming()) throw PreconditionViolation("language '" + name_ + "' uses a consuming rule");
    }

    std::string name() const override { return name_; }
    const std::vector<std::vector<Rule>>* words() const override { return &words_; }

    std::vector<LongForm> sources(const ExtRule& r, const LongForm& target, const StackAutomaton& a,
                                  const std::vector<State>& head) const override {
        std::set<LongForm> out;
        for (auto& w : words_) {
            if (w.empty()) {
                if (r.src == r.dst && target.letter == r.letter) out.insert(target);
                continue;
            }
            if (w.front().src != r.src || w.front().letter != r.letter || w.back().dst != r.dst) continue;
            std::set<LongForm> cur{target};
            for (std::size_t i = w.size(); i-- > 0 && !cur.empty();) {
                const Rule& x = w[i];
                if (x.src >= head.size() || x.dst >= head.size()) throw UnknownControl("language rule control");
                std::set<LongForm> prev;
                for (auto& t2 : cur) {
                    if (t2.head != head[x.dst] || t2.letter != trigger_letter(x)) continue;
                    for (auto& t1 : auxsat_generating(x, t2, a, head)) prev.insert(t1);
                }
                cur = std::move(prev);
            }
            out.insert(cur.begin(), cur.end());
        }
        return {out.begin(), out.end()};
    }

private:
    std::string name_;
    std::vector<std::vector<Rule>> words_;
};

struct Ecpds {
    Mcpds sys;  // one stack; its rules are the plain rules
    std::vector<ExtRule> ext;

    void validate() const {
        sys.validate();
        if (sys.num_stacks() != 1) throw Error("extended system must have one stack");
        for (auto& r : ext) {
            if (r.src >= sys.num_controls() || r.dst >= sys.num_controls()) throw UnknownControl("rule control");
            if (!r.lang) throw LanguageQueryFailure("extended rule without a language");
        }
    }
};

// Applies a word of rules from c: controls chain from the extended rule's
// source to its target and each rule reads the current top letter.
inline std::optional<Stack> apply_word(const ExtRule& e, const std::vector<Rule>& word, const Config& c) {
    Control q = c.control;
    Stack w = c.stacks[0];
    if (word.empty()) return e.src == e.dst ? std::optional<Stack>(w) : std::nullopt;
    for (auto& r : word) {
        auto tc = try_top_char(w);
        if (r.src != q || !tc || tc->letter != r.letter) return std::nullopt;
        auto v = try_apply(r.op, w);
        if (!v) return std::nullopt;
        w = *v;
        q = r.dst;
    }
    if (q != e.dst) return std::nullopt;
    return w;
}

inline std::vector<Config> ecpds_step(const Ecpds& e, const Config& c) {
    std::vector<Config> out;
    for (auto& s : step(e.sys, c)) out.push_back(std::move(s.config));
    auto tc = try_top_char(c.stacks[0]);
    if (!tc) return out;
    for (auto& r : e.ext) {
        if (r.src != c.control || r.letter != tc->letter) continue;
        auto ws = r.lang->words();
        if (!ws) throw LanguageQueryFailure("language '" + r.lang->name() + "' has no explicit words");
        for (auto& word : *ws)
            if (auto w = apply_word(r, word, c)) out.push_back(Config{r.dst, {*w}});
    }
    return out;
}

inline std::vector<LongForm> Language::sources_all(const ExtRule& r, const StackAutomaton& a,
                                                   const std::vector<State>& head) const {
    std::set<LongForm> out;
    for (auto& t2 : a.long_forms(head.at(r.dst))) {
        auto v = sources(r, t2, a, head);
        out.insert(v.begin(), v.end());
    }
    return {out.begin(), out.end()};
}

// The long forms contributed by one extended rule.
inline ExtraRule extended_rule_step(const ExtRule& r) {
    return [r](const StackAutomaton& a, const std::vector<State>& head) {
        auto out = r.lang->sources_all(r, a, head);
        for (auto& t : out)
            invariant(t.head == head.at(r.src) && t.letter == r.letter, "extended source has rule control and letter");
        return out;
    };
}

inline PAutomaton prestar_extended(const Ecpds& e, const PAutomaton& a0, const SaturationOptions& opt = {},
                                   SaturationStats* stats = nullptr) {
    e.validate();
    if (a0.order() != e.sys.order) throw OrderMismatch("automaton order differs from system order");
    if (a0.head.size() != e.sys.num_controls()) throw UnknownControl("automaton heads do not cover controls");
    std::vector<ExtraRule> extra;
    for (auto& r : e.ext) extra.push_back(extended_rule_step(r));
    PAutomaton a = a0;
    auto st = saturate(e.sys.stacks[0], a.aut, a.head, e.sys.alphabet.size(), opt, extra);
    if (stats) *stats = st;
    return a;
}

inline std::vector<Tri> prestar_extended_oracle(const Ecpds& e, const PAutomaton& a0,
                                                const std::vector<Config>& configs, const ExploreBounds& b = {}) {
    return prestar_oracle([&](const Config& c) { return ecpds_step(e, c); }, a0, configs, b);
}

// Every generating rule becomes an extended rule with the singleton language
// of itself.
inline Ecpds singleton_extension(const Mcpds& sys) {
    Ecpds e;
    e.sys = sys;
    e.sys.stacks = {{}};
    std::size_t i = 0;
    for (auto& r : sys.stacks.at(0)) {
        if (r.consuming()) {
            e.sys.stacks[0].push_back(r);
            continue;
        }
        auto l = std::make_shared<FiniteLanguage>("s" + std::to_string(i++), std::vector<std::vector<Rule>>{{r}});
        e.ext.push_back(ExtRule{r.src, r.letter, l, r.dst});
    }
    return e;
}

// Random closed ECPDS: a random CPDS plus extended rules whose words have
// length `word_len`. Each extended rule raises the control index, and its
// words chain through arbitrary intermediate controls.
inline Ecpds gen_random_ecpds(std::uint64_t seed, const RandomProfile& p, std::size_t ext_rules, std::size_t word_len,
                              std::size_t words_per_lang = 2) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Ecpds e;
    e.sys = gen_random_system(seed, p);
    const std::size_t nc = e.sys.num_controls();
    auto letter = [&](bool with_bottom) {
        return static_cast<Letter>(with_bottom ? rng() % (p.letters + 1) : 1 + rng() % p.letters);
    };
    auto gen_op = [&](Letter a) {
        switch (rng() % 4) {
        case 0: return StackOp::push(letter(false), 1 + static_cast<int>(rng() % p.order));
        case 1: return p.order >= 2 ? StackOp::copy(2 + static_cast<int>(rng() % (p.order - 1))) : StackOp::noop();
        case 2: return a == kBottom ? StackOp::noop() : StackOp::rew(letter(false));
        default: return StackOp::noop();
        }
    };
    for (std::size_t i = 0; i < ext_rules && nc >= 2; ++i) {
        Control q = static_cast<Control>(rng() % (nc - 1));
        Control q2 = static_cast<Control>(q + 1 + rng() % (nc - 1 - q));
        Letter a = letter(true);
        std::vector<std::vector<Rule>> words;
        for (std::size_t j = 0; j < words_per_lang; ++j) {
            std::vector<Rule> w;
            Control cur = q;
            Letter top = a;
            for (std::size_t m = 0; m < word_len; ++m) {
                Control nxt = m + 1 == word_len ? q2 : static_cast<Control>(rng() % nc);
                // usually follow the letter the previous op leaves on top
                Letter x = (m == 0 || rng() % 4 != 0) ? top : letter(true);
                StackOp op = gen_op(x);
                w.push_back(Rule{cur, x, op, nxt});
                if (op.kind == OpKind::Push || op.kind == OpKind::Rew) top = op.letter;
                else top = x;
                cur = nxt;
            }
            words.push_back(std::move(w));
        }
        e.ext.push_back(ExtRule{q, a, std::make_shared<FiniteLanguage>("L" + std::to_string(i), words), q2});
    }
    return e;
}

}
