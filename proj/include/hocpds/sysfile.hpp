#pragma once

// Line-based system description files.
//
//   file     = { line } ;
//   line     = [ item ] [ "//" { any } ] newline ;
//   item     = "order" nat
//            | "stacks" nat
//            | "mode" ( "single" | "ordered" | "phase" nat | "scope" nat )
//            | "letters" name { name }
//            | "controls" name { name }
//            | "stack" nat                      (1-based; later rules go there)
//            | rule
//            | "language" name                  (later word lines go there)
//            | "word" ( "eps" | rule { ";" rule } )
//            | "ext" name letter name name      (src letter language dst)
//            | "target" name ( "any" | "bottom" | "top" letter )
//            | "query" name name ;              (default --from and --to)
//   rule     = name letter op name ;
//   op       = "pop" nat | "copy" nat | "collapse" nat | "push" letter nat
//            | "rew" letter | "noop" ;
//   letter   = "#" | name ;                     ("#" is the bottom symbol)
//
// Header items (order, stacks, mode, letters, controls) come before any rule.
// Every error carries the line and column of the offending token.

#include <hocpds/ecpds.hpp>

#include <fstream>
#include <sstream>

namespace hocpds {

struct TargetSpec {
    enum class Kind { Any, Bottom, Top } kind = Kind::Any;
    Control control = 0;
    Letter letter = kBottom;
};

struct SystemFile {
    Mcpds sys;
    std::vector<ExtRule> ext;
    std::vector<std::pair<std::string, std::shared_ptr<const FiniteLanguage>>> languages;
    std::vector<TargetSpec> targets;
    std::optional<std::pair<Control, Control>> query;

    Ecpds ecpds() const { return Ecpds{sys, ext}; }

    // accepted configurations of the single stack, from the target lines
    PAutomaton target_automaton() const {
        const int n = sys.order;
        PAutomaton a(n, sys.num_controls());
        for (auto& t : targets) {
            switch (t.kind) {
            case TargetSpec::Kind::Any: a.accept_all(t.control, sys.alphabet); break;
            case TargetSpec::Kind::Top:
                a.aut.add_long_form(LongForm{a.head[t.control], t.letter, {}, std::vector<StateSet>(n)});
                break;
            case TargetSpec::Kind::Bottom: {
                LongForm lf{a.head[t.control], kBottom, {}, std::vector<StateSet>(n)};
                for (int k = 1; k <= n; ++k) lf.to[k - 1] = {a.aut.add_state(k, true)};
                a.aut.add_long_form(lf);
                break;
            }
            }
        }
        return a;
    }
};

inline PAutomaton control_target(const Mcpds& sys, Control q) {
    PAutomaton a(sys.order, sys.num_controls());
    a.accept_all(q, sys.alphabet);
    return a;
}

namespace detail {

struct Token {
    std::string text;
    std::size_t col;
};

inline std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line.compare(i, 2, "//") == 0) break;
        if (line[i] == ';') {
            out.push_back({";", i + 1});
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ';') ++i;
        out.push_back({line.substr(b, i - b), b + 1});
    }
    return out;
}

class SysParser {
public:
    SystemFile parse(std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            ++lineno_;
            toks_ = tokenize(line);
            pos_ = 0;
            if (toks_.empty()) continue;
            item();
            if (pos_ < toks_.size()) fail("unexpected '" + toks_[pos_].text + "'");
        }
        finish();
        return std::move(f_);
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t col = pos_ < toks_.size() ? toks_[pos_].col : (toks_.empty() ? 1 : toks_.back().col + toks_.back().text.size());
        throw ParseError(msg, lineno_, col);
    }
    bool more() const { return pos_ < toks_.size(); }
    const std::string& peek() const {
        static const std::string none;
        return more() ? toks_[pos_].text : none;
    }
    std::string next(const char* what) {
        if (!more()) fail(std::string("expected ") + what);
        return toks_[pos_++].text;
    }
    std::uint32_t nat(const char* what) {
        if (!more()) fail(std::string("expected ") + what);
        const std::string& t = peek();
        if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
            fail(std::string("expected ") + what);
        ++pos_;
        return static_cast<std::uint32_t>(std::stoul(t));
    }
    static bool keyword(const std::string& s) {
        static const std::set<std::string> kw{"order", "stacks", "mode", "letters", "controls", "stack", "language",
                                              "word", "ext", "target", "query", "eps"};
        return kw.count(s) > 0;
    }
    std::string name(const char* what) {
        if (!more()) fail(std::string("expected ") + what);
        const std::string& t = peek();
        bool ok = !t.empty() && !keyword(t) && t != "#" &&
                  std::all_of(t.begin(), t.end(), [](char c) {
                      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '$';
                  });
        if (!ok) fail(std::string("expected ") + what);
        ++pos_;
        return t;
    }
    Control control() {
        std::size_t at = pos_;
        std::string n = name("control name");
        auto c = f_.sys.find_control(n);
        if (!c) {
            pos_ = at;
            fail("unknown control '" + n + "'");
        }
        return *c;
    }
    Letter letter() {
        std::size_t at = pos_;
        std::string n = next("letter");
        auto l = f_.sys.alphabet.find(n);
        if (!l) {
            pos_ = at;
            fail("unknown letter '" + n + "'");
        }
        return *l;
    }
    void need_header() {
        if (!header_done_) {
            if (!have_order_) fail("missing 'order' before rules");
            if (f_.sys.controls.empty()) fail("missing 'controls' before rules");
            header_done_ = true;
            f_.sys.stacks.assign(stacks_, {});
        }
    }
    int order_arg() {
        std::size_t at = pos_;
        int k = static_cast<int>(nat("order"));
        if (k < 1 || k > f_.sys.order) {
            pos_ = at;
            fail("order " + std::to_string(k) + " outside 1.." + std::to_string(f_.sys.order));
        }
        return k;
    }
    Rule rule() {
        Rule r;
        r.src = control();
        r.letter = letter();
        std::size_t at = pos_;
        std::string op = next("operation");
        if (op == "pop") r.op = StackOp::pop(order_arg());
        else if (op == "copy") r.op = StackOp::copy(order_arg());
        else if (op == "collapse") r.op = StackOp::collapse(order_arg());
        else if (op == "push") {
            Letter b = letter();
            r.op = StackOp::push(b, order_arg());
        } else if (op == "rew") r.op = StackOp::rew(letter());
        else if (op == "noop") r.op = StackOp::noop();
        else {
            pos_ = at;
            fail("unknown operation '" + op + "'");
        }
        if (!op_valid_for_order(r.op, f_.sys.order)) {
            pos_ = at;
            fail("operation not allowed at order " + std::to_string(f_.sys.order));
        }
        r.dst = control();
        return r;
    }
    void header_only(const std::string& kw) {
        if (header_done_) {
            --pos_;
            fail("'" + kw + "' must come before rules");
        }
    }

    void item() {
        const std::string kw = peek();
        if (kw == "order") {
            ++pos_;
            header_only(kw);
            f_.sys.order = static_cast<int>(nat("order"));
            if (f_.sys.order < 1) {
                --pos_;
                fail("order must be positive");
            }
            have_order_ = true;
        } else if (kw == "stacks") {
            ++pos_;
            header_only(kw);
            stacks_ = nat("stack count");
            if (stacks_ < 1) {
                --pos_;
                fail("need at least one stack");
            }
        } else if (kw == "mode") {
            ++pos_;
            header_only(kw);
            std::string m = next("mode");
            if (m == "single") f_.sys.mode = Mode::Single;
            else if (m == "ordered") f_.sys.mode = Mode::Ordered;
            else if (m == "phase" || m == "scope") {
                f_.sys.mode = m == "phase" ? Mode::Phase : Mode::Scope;
                f_.sys.bound = nat("bound");
            } else {
                --pos_;
                fail("unknown mode '" + m + "'");
            }
        } else if (kw == "letters") {
            ++pos_;
            header_only(kw);
            if (!more()) fail("expected letter names");
            while (more()) f_.sys.alphabet.add(name("letter name"));
        } else if (kw == "controls") {
            ++pos_;
            header_only(kw);
            if (!more()) fail("expected control names");
            while (more()) {
                std::size_t at = pos_;
                std::string n = name("control name");
                if (f_.sys.find_control(n)) {
                    pos_ = at;
                    fail("duplicate control '" + n + "'");
                }
                f_.sys.add_control(n);
            }
        } else if (kw == "stack") {
            ++pos_;
            need_header();
            std::size_t at = pos_;
            std::uint32_t i = nat("stack number");
            if (i < 1 || i > stacks_) {
                pos_ = at;
                fail("stack " + std::to_string(i) + " outside 1.." + std::to_string(stacks_));
            }
            cur_stack_ = i - 1;
            cur_lang_.reset();
        } else if (kw == "language") {
            ++pos_;
            need_header();
            std::size_t at = pos_;
            std::string n = name("language name");
            for (auto& [ln, w] : lang_words_)
                if (ln == n) {
                    pos_ = at;
                    fail("duplicate language '" + n + "'");
                }
            lang_words_.push_back({n, {}});
            cur_lang_ = lang_words_.size() - 1;
        } else if (kw == "word") {
            ++pos_;
            need_header();
            if (!cur_lang_) {
                --pos_;
                fail("'word' outside a language block");
            }
            std::vector<Rule> w;
            if (peek() == "eps") ++pos_;
            else {
                for (;;) {
                    std::size_t at = pos_;
                    Rule r = rule();
                    if (r.consuming()) {
                        pos_ = at;
                        fail("languages may only use generating rules");
                    }
                    if (!w.empty() && w.back().dst != r.src) {
                        pos_ = at;
                        fail("word rules must chain controls");
                    }
                    w.push_back(r);
                    if (peek() != ";") break;
                    ++pos_;
                }
            }
            lang_words_[*cur_lang_].second.push_back(std::move(w));
        } else if (kw == "ext") {
            ++pos_;
            need_header();
            ExtRule e;
            e.src = control();
            e.letter = letter();
            std::size_t at = pos_;
            std::string ln = name("language name");
            ext_lang_.push_back({ln, {lineno_, toks_[at].col}});
            e.dst = control();
            f_.ext.push_back(e);
        } else if (kw == "target") {
            ++pos_;
            need_header();
            TargetSpec t;
            t.control = control();
            std::size_t at = pos_;
            std::string k = next("'any', 'bottom' or 'top'");
            if (k == "any") t.kind = TargetSpec::Kind::Any;
            else if (k == "bottom") t.kind = TargetSpec::Kind::Bottom;
            else if (k == "top") {
                t.kind = TargetSpec::Kind::Top;
                t.letter = letter();
            } else {
                pos_ = at;
                fail("expected 'any', 'bottom' or 'top'");
            }
            f_.targets.push_back(t);
        } else if (kw == "query") {
            ++pos_;
            need_header();
            Control a = control();
            Control b = control();
            f_.query = {a, b};
        } else {
            need_header();
            if (!cur_stack_) fail("rule outside a 'stack' block");
            Rule r = rule();
            f_.sys.stacks[*cur_stack_].push_back(r);
        }
    }

    void finish() {
        if (!header_done_) {
            if (!have_order_) throw ParseError("missing 'order'", lineno_ + 1, 1);
            if (f_.sys.controls.empty()) throw ParseError("missing 'controls'", lineno_ + 1, 1);
            f_.sys.stacks.assign(stacks_, {});
        }
        if (stacks_ > 1 && f_.sys.mode == Mode::Single)
            throw ParseError("several stacks need mode ordered, phase or scope", 1, 1);
        if ((f_.sys.mode == Mode::Phase || f_.sys.mode == Mode::Scope) && f_.sys.bound == 0)
            throw ParseError("bound must be positive", 1, 1);
        for (auto& [n, ws] : lang_words_)
            f_.languages.push_back({n, std::make_shared<const FiniteLanguage>(n, ws)});
        for (std::size_t i = 0; i < f_.ext.size(); ++i) {
            auto& [ln, where] = ext_lang_[i];
            for (auto& [n, l] : f_.languages)
                if (n == ln) f_.ext[i].lang = l;
            if (!f_.ext[i].lang) throw ParseError("unknown language '" + ln + "'", where.first, where.second);
        }
        if (!f_.ext.empty() && stacks_ != 1) throw ParseError("extended rules need a single stack", 1, 1);
        f_.sys.validate();
    }

    SystemFile f_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0, lineno_ = 0;
    bool have_order_ = false, header_done_ = false;
    std::uint32_t stacks_ = 1;
    std::optional<std::size_t> cur_stack_, cur_lang_;
    std::vector<std::pair<std::string, std::vector<std::vector<Rule>>>> lang_words_;
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ext_lang_;
};

}

inline SystemFile parse_system(std::istream& in) { return detail::SysParser().parse(in); }

inline SystemFile parse_system(const std::string& text) {
    std::istringstream in(text);
    return parse_system(in);
}

inline SystemFile load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse_system(in);
}

inline std::string write_system(const SystemFile& f) {
    const Mcpds& s = f.sys;
    std::ostringstream o;
    auto rule = [&](const Rule& r) {
        return s.controls[r.src] + " " + s.alphabet.name(r.letter) + " " + op_to_string(r.op, s.alphabet) + " " +
               s.controls[r.dst];
    };
    o << "order " << s.order << "\nstacks " << s.num_stacks() << "\nmode " << mode_name(s.mode);
    if (s.mode == Mode::Phase || s.mode == Mode::Scope) o << " " << s.bound;
    o << "\n";
    if (s.alphabet.size() > 1) {
        o << "letters";
        for (Letter x = 1; x < s.alphabet.size(); ++x) o << " " << s.alphabet.name(x);
        o << "\n";
    }
    o << "controls";
    for (auto& c : s.controls) o << " " << c;
    o << "\n";
    for (std::size_t i = 0; i < s.num_stacks(); ++i) {
        o << "stack " << i + 1 << "\n";
        for (auto& r : s.stacks[i]) o << "  " << rule(r) << "\n";
    }
    for (auto& [n, l] : f.languages) {
        o << "language " << n << "\n";
        for (auto& w : *l->words()) {
            o << "  word";
            if (w.empty()) o << " eps";
            for (std::size_t i = 0; i < w.size(); ++i) o << (i ? " ; " : " ") << rule(w[i]);
            o << "\n";
        }
    }
    for (auto& e : f.ext) {
        std::string ln = e.lang ? e.lang->name() : "?";
        o << "ext " << s.controls[e.src] << " " << s.alphabet.name(e.letter) << " " << ln << " " << s.controls[e.dst]
          << "\n";
    }
    for (auto& t : f.targets) {
        o << "target " << s.controls[t.control] << " ";
        switch (t.kind) {
        case TargetSpec::Kind::Any: o << "any"; break;
        case TargetSpec::Kind::Bottom: o << "bottom"; break;
        case TargetSpec::Kind::Top: o << "top " << s.alphabet.name(t.letter); break;
        }
        o << "\n";
    }
    if (f.query) o << "query " << s.controls[f.query->first] << " " << s.controls[f.query->second] << "\n";
    return o.str();
}

// "p [[a #]1]2 [[#]1]2": a control followed by one bracketed stack per stack
inline Config parse_config(std::string_view text, const Mcpds& sys) {
    detail::Lexer lx(text);
    std::string c = lx.ident();
    auto q = sys.find_control(c);
    if (!q) throw ParseError("unknown control '" + c + "'", 1, 1);
    Config out{*q, {}};
    while (!lx.eof()) out.stacks.push_back(detail::parse_bracket(lx, sys.alphabet));
    for (auto& w : out.stacks)
        if (w.order() != sys.order) throw OrderMismatch("stack of order " + std::to_string(w.order()));
    return out;
}

}
