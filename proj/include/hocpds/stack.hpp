#pragma once

// Annotated (collapsible) higher-order stacks.
//
// Stacks are immutable and hash-consed: two stacks are equal iff they are the
// same node. Every node also carries the pop-round tag used by scope-bounding;
// plain stacks simply have every tag at 0. Elements are stored bottom-first,
// the public accessors index from the top.
//
// Textual form (format_stack / parse_stack) follows the usual bracket notation
// with order subscripts, top of stack leftmost:
//
//   stack  ::= "[" item* "]" order            items separated by blanks
//   item   ::= stack | char
//   char   ::= letter ( "^{" stack "}" )? tags?
//   letter ::= identifier | "#" | "⊥"         # and ⊥ both denote the bottom
//   tags   ::= "@" pr ":" cr   (chars)   |   "@" pr   (after "]k")
//
// e.g. [[c^{[[b]1]2} a]1 [b]1]2. Tags are printed only on request.
//
// The edge-word form (encode_tree / decode_tree) is the tree reading of a
// stack: the order-n brackets are dropped and each order-k element is wrapped
// in "<k" ... ">k". An annotation of order k is written a^k{...} with its own
// outer brackets dropped as well. ⊥_2 encodes as "<1 # >1".

#include <hocpds/errors.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hocpds {

using Letter = std::uint16_t;
inline constexpr Letter kBottom = 0;

class Alphabet {
public:
    Alphabet() { add("#"); }
    explicit Alphabet(std::initializer_list<std::string> names) : Alphabet() {
        for (auto& n : names) add(n);
    }

    Letter add(const std::string& name) {
        if (name == "⊥") return kBottom;
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        Letter l = static_cast<Letter>(names_.size());
        names_.push_back(name);
        index_.emplace(name, l);
        return l;
    }
    std::optional<Letter> find(std::string_view name) const {
        if (name == "⊥") return kBottom;
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    Letter at(std::string_view name) const {
        auto l = find(name);
        if (!l) throw Error("unknown letter '" + std::string(name) + "'");
        return *l;
    }
    const std::string& name(Letter l) const { return names_.at(l); }
    std::size_t size() const { return names_.size(); }
    std::vector<Letter> letters() const {
        std::vector<Letter> r(names_.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<Letter>(i);
        return r;
    }
    bool operator==(const Alphabet& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Letter> index_;
};

struct Node;

class Stack {
public:
    Stack() = default;
    explicit Stack(const Node* n) : n_(n) {}

    const Node* node() const { return n_; }
    bool valid() const { return n_ != nullptr; }
    explicit operator bool() const { return n_ != nullptr; }

    inline int order() const;
    inline std::size_t size() const;
    bool empty() const { return size() == 0; }
    inline std::uint32_t round() const;
    // i-th element from the top, order >= 2
    inline Stack elem(std::size_t i = 0) const;
    // i-th character from the top, order 1
    inline const struct Char& chr(std::size_t i = 0) const;

    inline Stack with_round(std::uint32_t pr) const;

    friend bool operator==(Stack a, Stack b) { return a.n_ == b.n_; }
    friend bool operator!=(Stack a, Stack b) { return a.n_ != b.n_; }
    friend bool operator<(Stack a, Stack b) { return std::less<const Node*>()(a.n_, b.n_); }

private:
    const Node* n_ = nullptr;
};

struct Char {
    Letter letter = kBottom;
    Stack annot;               // invalid when unannotated
    std::uint32_t pr = 0, cr = 0;

    bool operator==(const Char& o) const {
        return letter == o.letter && annot == o.annot && pr == o.pr && cr == o.cr;
    }
};

struct Node {
    int order;
    std::uint32_t pr;
    std::vector<const Node*> kids;  // order >= 2, bottom first
    std::vector<Char> chars;        // order 1, bottom first
    std::size_t hash;
};

namespace detail {

inline void hash_mix(std::size_t& h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

struct NodeHash {
    std::size_t operator()(const Node* n) const { return n->hash; }
};
struct NodeEq {
    bool operator()(const Node* a, const Node* b) const {
        return a->order == b->order && a->pr == b->pr && a->kids == b->kids && a->chars == b->chars;
    }
};

class Interner {
public:
    const Node* intern(Node&& n) {
        n.hash = std::hash<int>()(n.order);
        hash_mix(n.hash, n.pr);
        for (auto* k : n.kids) hash_mix(n.hash, std::hash<const void*>()(k));
        for (auto& c : n.chars) {
            hash_mix(n.hash, c.letter);
            hash_mix(n.hash, std::hash<const void*>()(c.annot.node()));
            hash_mix(n.hash, c.pr);
            hash_mix(n.hash, c.cr);
        }
        std::lock_guard<std::mutex> lock(mu_);
        auto it = table_.find(&n);
        if (it != table_.end()) return *it;
        store_.push_back(std::move(n));
        const Node* p = &store_.back();
        table_.insert(p);
        return p;
    }
    std::size_t size() {
        std::lock_guard<std::mutex> lock(mu_);
        return store_.size();
    }

private:
    std::mutex mu_;
    std::deque<Node> store_;
    std::unordered_set<const Node*, NodeHash, NodeEq> table_;
};

inline Interner& interner() {
    static Interner in;
    return in;
}

}

struct StackHash {
    std::size_t operator()(Stack s) const { return std::hash<const void*>()(s.node()); }
};

int Stack::order() const { return n_->order; }
std::size_t Stack::size() const { return n_->order == 1 ? n_->chars.size() : n_->kids.size(); }
std::uint32_t Stack::round() const { return n_->pr; }
Stack Stack::elem(std::size_t i) const { return Stack(n_->kids[n_->kids.size() - 1 - i]); }
const Char& Stack::chr(std::size_t i) const { return n_->chars[n_->chars.size() - 1 - i]; }

// bottom-first construction
inline Stack make_stack(int order, std::vector<Stack> elems_bottom_first, std::uint32_t pr = 0) {
    if (order < 2) throw OrderMismatch("make_stack: order must be >= 2");
    Node n{order, pr, {}, {}, 0};
    n.kids.reserve(elems_bottom_first.size());
    for (auto e : elems_bottom_first) {
        if (!e || e.order() != order - 1) throw OrderMismatch("make_stack: element order");
        n.kids.push_back(e.node());
    }
    return Stack(detail::interner().intern(std::move(n)));
}

inline Stack make_stack1(std::vector<Char> chars_bottom_first, std::uint32_t pr = 0) {
    Node n{1, pr, {}, std::move(chars_bottom_first), 0};
    return Stack(detail::interner().intern(std::move(n)));
}

inline Stack empty_stack(int order) {
    return order == 1 ? make_stack1({}) : make_stack(order, {});
}

Stack Stack::with_round(std::uint32_t pr) const {
    if (n_->pr == pr) return *this;
    Node n{n_->order, pr, n_->kids, n_->chars, 0};
    return Stack(detail::interner().intern(std::move(n)));
}

// ⊥_1 = [⊥]_1, ⊥_{k+1} = [⊥_k]_{k+1}
inline Stack bottom_stack(int order) {
    Stack s = make_stack1({Char{kBottom, {}, 0, 0}});
    for (int k = 2; k <= order; ++k) s = make_stack(k, {s});
    return s;
}

// top-first convenience constructors
inline Stack stack_of(int order, std::vector<Stack> elems_top_first, std::uint32_t pr = 0) {
    return make_stack(order, {elems_top_first.rbegin(), elems_top_first.rend()}, pr);
}
inline Stack stack1_of(std::vector<Char> chars_top_first, std::uint32_t pr = 0) {
    return make_stack1({chars_top_first.rbegin(), chars_top_first.rend()}, pr);
}

inline std::vector<Stack> elems_bottom_first(Stack s) {
    std::vector<Stack> r;
    for (auto* k : s.node()->kids) r.emplace_back(k);
    return r;
}

// top_k for 2 <= k <= n+1; returns an order-(k-1) stack
inline std::optional<Stack> try_top(Stack w, int k) {
    if (k < 2 || k > w.order() + 1) throw OrderMismatch("top: order out of range");
    while (w.order() >= k) {
        if (w.empty()) return std::nullopt;
        w = w.elem();
    }
    return w;
}

inline Stack top(Stack w, int k) {
    auto r = try_top(w, k);
    if (!r) throw UndefinedTop("top_" + std::to_string(k) + " undefined on empty stack");
    return *r;
}

inline std::optional<Char> try_top_char(Stack w) {
    while (w.order() > 1) {
        if (w.empty()) return std::nullopt;
        w = w.elem();
    }
    if (w.empty()) return std::nullopt;
    return w.chr();
}

inline Char top_char(Stack w) {
    auto r = try_top_char(w);
    if (!r) throw UndefinedTop("top_1 undefined on empty stack");
    return *r;
}

// u :_k v for order(u) = k-1 >= 1
inline Stack compose(Stack u, int k, Stack v) {
    if (u.order() != k - 1 || v.order() < k) throw OrderMismatch("compose: orders do not fit");
    if (v.order() == k) {
        auto e = elems_bottom_first(v);
        e.push_back(u);
        return make_stack(k, std::move(e), v.round());
    }
    if (v.empty()) throw UndefinedTop("compose: empty enclosing stack");
    auto e = elems_bottom_first(v);
    e.back() = compose(u, k, e.back());
    return make_stack(v.order(), std::move(e), v.round());
}

// c :_1 v
inline Stack compose(const Char& c, Stack v) {
    if (v.order() == 1) {
        auto cs = v.node()->chars;
        cs.push_back(c);
        return make_stack1(std::move(cs), v.round());
    }
    if (v.empty()) throw UndefinedTop("compose: empty enclosing stack");
    auto e = elems_bottom_first(v);
    e.back() = compose(c, e.back());
    return make_stack(v.order(), std::move(e), v.round());
}

enum class OpKind : std::uint8_t { Noop, Rew, Push, Copy, Pop, Collapse };

struct StackOp {
    OpKind kind = OpKind::Noop;
    int order = 0;
    Letter letter = kBottom;

    static StackOp noop() { return {OpKind::Noop, 0, kBottom}; }
    static StackOp rew(Letter b) { return {OpKind::Rew, 0, b}; }
    static StackOp push(Letter b, int k) { return {OpKind::Push, k, b}; }
    static StackOp copy(int k) { return {OpKind::Copy, k, kBottom}; }
    static StackOp pop(int k) { return {OpKind::Pop, k, kBottom}; }
    static StackOp collapse(int k) { return {OpKind::Collapse, k, kBottom}; }

    bool consuming() const { return kind == OpKind::Pop || kind == OpKind::Collapse; }
    bool generating() const { return !consuming(); }

    auto operator<=>(const StackOp&) const = default;
};

inline std::string op_to_string(const StackOp& o, const Alphabet& al) {
    switch (o.kind) {
    case OpKind::Noop: return "noop";
    case OpKind::Rew: return "rew " + al.name(o.letter);
    case OpKind::Push: return "push " + al.name(o.letter) + " " + std::to_string(o.order);
    case OpKind::Copy: return "copy " + std::to_string(o.order);
    case OpKind::Pop: return "pop " + std::to_string(o.order);
    case OpKind::Collapse: return "collapse " + std::to_string(o.order);
    }
    return "?";
}

// whether o is an operation of O_n (with the push^1 and collapse extensions)
inline bool op_valid_for_order(const StackOp& o, int n) {
    switch (o.kind) {
    case OpKind::Noop:
    case OpKind::Rew: return true;
    case OpKind::Push: return o.order >= 1 && o.order <= n && o.letter != kBottom;
    case OpKind::Copy: return o.order >= 2 && o.order <= n;
    case OpKind::Pop:
    case OpKind::Collapse: return o.order >= 1 && o.order <= n;
    }
    return false;
}

namespace detail {

// Rebuild w with its top order-k stack replaced by f(top order-k stack).
// The replaced stack keeps the tag of the original.
template <class F>
std::optional<Stack> modify_top(Stack w, int k, F&& f) {
    if (w.order() == k) {
        std::optional<Stack> r = f(w);
        if (!r) return std::nullopt;
        return r->with_round(w.round());
    }
    if (w.empty()) return std::nullopt;
    auto e = elems_bottom_first(w);
    auto r = modify_top(e.back(), k, f);
    if (!r) return std::nullopt;
    e.back() = *r;
    return make_stack(w.order(), std::move(e), w.round());
}

inline std::optional<Stack> push_char(Stack s, const Char& c) {
    return modify_top(s, 1, [&](Stack t) -> std::optional<Stack> {
        if (t.empty()) return std::nullopt;
        auto cs = t.node()->chars;
        cs.push_back(c);
        return make_stack1(std::move(cs));
    });
}

}

// Applies o in round z. Undefined results (nullopt): top_1 missing, popping
// the last element of a sequence, touching ⊥ other than by a ⊥-preserving
// rewrite, collapsing an unannotated char or onto an empty annotation.
inline std::optional<Stack> try_apply(const StackOp& o, Stack w, std::uint32_t z = 0) {
    const int n = w.order();
    if (!op_valid_for_order(o, n)) return std::nullopt;
    auto tc = try_top_char(w);
    if (!tc) return std::nullopt;
    switch (o.kind) {
    case OpKind::Noop: return w;
    case OpKind::Rew:
        if ((tc->letter == kBottom) != (o.letter == kBottom)) return std::nullopt;
        return detail::modify_top(w, 1, [&](Stack t) -> std::optional<Stack> {
            auto cs = t.node()->chars;
            cs.back().letter = o.letter;
            return make_stack1(std::move(cs));
        });
    case OpKind::Pop:
        if (o.order == 1 && tc->letter == kBottom) return std::nullopt;
        return detail::modify_top(w, o.order, [&](Stack s) -> std::optional<Stack> {
            if (s.size() <= 1) return std::nullopt;
            if (s.order() == 1) {
                auto cs = s.node()->chars;
                cs.pop_back();
                return make_stack1(std::move(cs));
            }
            auto e = elems_bottom_first(s);
            e.pop_back();
            return make_stack(s.order(), std::move(e));
        });
    case OpKind::Copy:
        return detail::modify_top(w, o.order, [&](Stack s) -> std::optional<Stack> {
            auto e = elems_bottom_first(s);
            e.push_back(e.back().with_round(z));
            return make_stack(s.order(), std::move(e));
        });
    case OpKind::Push:
        if (o.order == 1) return detail::push_char(w, Char{o.letter, {}, z, 0});
        return detail::modify_top(w, o.order, [&](Stack s) -> std::optional<Stack> {
            auto e = elems_bottom_first(s);
            Stack u = e.back();
            e.pop_back();
            Stack ann = make_stack(s.order(), e, o.order == n ? 0 : s.round());
            return detail::push_char(s, Char{o.letter, ann, z, u.round()});
        });
    case OpKind::Collapse: {
        Stack ann = tc->annot;
        if (!ann || ann.order() != o.order || ann.empty()) return std::nullopt;
        if (o.order == n) return ann.with_round(0);
        return detail::modify_top(w, o.order + 1, [&](Stack s) -> std::optional<Stack> {
            auto e = elems_bottom_first(s);
            e.back() = ann;
            return make_stack(s.order(), std::move(e));
        });
    }
    }
    return std::nullopt;
}

inline Stack apply_op(const StackOp& o, Stack w, std::uint32_t z = 0) {
    auto r = try_apply(o, w, z);
    if (!r) throw UndefinedOperation("operation not applicable");
    return *r;
}

// The round tag of the material a consuming operation removes: the pop-round
// of the popped stack/char for pop_k, the collapse-round for collapse_k.
inline std::optional<std::uint32_t> consumed_round(const StackOp& o, Stack w) {
    if (o.kind == OpKind::Pop) {
        if (o.order == 1) {
            auto c = try_top_char(w);
            if (!c) return std::nullopt;
            return c->pr;
        }
        auto t = try_top(w, o.order);
        if (!t) return std::nullopt;
        return t->round();
    }
    if (o.kind == OpKind::Collapse) {
        auto c = try_top_char(w);
        if (!c) return std::nullopt;
        return c->cr;
    }
    return std::nullopt;
}

inline Stack erase_rounds(Stack w) {
    if (w.order() == 1) {
        auto cs = w.node()->chars;
        for (auto& c : cs) {
            c.pr = c.cr = 0;
            if (c.annot) c.annot = erase_rounds(c.annot);
        }
        return make_stack1(std::move(cs));
    }
    auto e = elems_bottom_first(w);
    for (auto& x : e) x = erase_rounds(x);
    return make_stack(w.order(), std::move(e));
}

// Applies f to every round tag; the oracle uses it to keep tags relative to
// the current round.
template <class F>
Stack map_rounds(Stack w, F&& f) {
    if (w.order() == 1) {
        auto cs = w.node()->chars;
        for (auto& c : cs) {
            c.pr = f(c.pr);
            c.cr = f(c.cr);
            if (c.annot) c.annot = map_rounds(c.annot, f);
        }
        return make_stack1(std::move(cs), f(w.round()));
    }
    auto e = elems_bottom_first(w);
    for (auto& x : e) x = map_rounds(x, f);
    return make_stack(w.order(), std::move(e), f(w.round()));
}

inline std::size_t tree_size(Stack w) {
    std::size_t s = 1;
    if (w.order() == 1) {
        for (auto& c : w.node()->chars) s += 1 + (c.annot ? tree_size(c.annot) : 0);
    } else {
        for (auto* k : w.node()->kids) s += tree_size(Stack(k));
    }
    return s;
}

// every order-1 stack ends in exactly one ⊥; annotations may be empty stacks
inline bool well_formed(Stack w, int n) {
    if (w.order() > n) return false;
    if (w.empty()) return false;
    if (w.order() == 1) {
        auto& cs = w.node()->chars;
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if ((cs[i].letter == kBottom) != (i == 0)) return false;
            if (cs[i].letter == kBottom && cs[i].annot) return false;
            if (cs[i].annot && !cs[i].annot.empty() && !well_formed(cs[i].annot, n)) return false;
        }
        return true;
    }
    for (auto* k : w.node()->kids)
        if (!well_formed(Stack(k), n)) return false;
    return true;
}

inline void format_stack_to(std::ostream& os, Stack w, const Alphabet& al, bool rounds) {
    os << '[';
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) os << ' ';
        if (w.order() == 1) {
            const Char& c = w.chr(i);
            os << al.name(c.letter);
            if (c.annot) {
                os << "^{";
                format_stack_to(os, c.annot, al, rounds);
                os << '}';
            }
            if (rounds && (c.pr || c.cr)) os << '@' << c.pr << ':' << c.cr;
        } else {
            format_stack_to(os, w.elem(i), al, rounds);
        }
    }
    os << ']' << w.order();
    if (rounds && w.round()) os << '@' << w.round();
}

inline std::string format_stack(Stack w, const Alphabet& al, bool rounds = false) {
    std::ostringstream os;
    format_stack_to(os, w, al, rounds);
    return os.str();
}

namespace detail {

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    void skip() {
        while (p_ < s_.size() && (s_[p_] == ' ' || s_[p_] == '\t' || s_[p_] == '\n' || s_[p_] == '\r')) ++p_;
    }
    bool eof() { skip(); return p_ >= s_.size(); }
    bool peek(std::string_view t) {
        skip();
        return s_.substr(p_, t.size()) == t;
    }
    bool accept(std::string_view t) {
        if (!peek(t)) return false;
        p_ += t.size();
        return true;
    }
    void expect(std::string_view t) {
        if (!accept(t)) fail("expected '" + std::string(t) + "'");
    }
    std::uint32_t number() {
        skip();
        std::size_t b = p_;
        while (p_ < s_.size() && s_[p_] >= '0' && s_[p_] <= '9') ++p_;
        if (b == p_) fail("expected number");
        return static_cast<std::uint32_t>(std::stoul(std::string(s_.substr(b, p_ - b))));
    }
    std::string ident() {
        skip();
        if (s_.substr(p_, 1) == "#") { ++p_; return "#"; }
        if (s_.substr(p_, 3) == "⊥") { p_ += 3; return "⊥"; }
        std::size_t b = p_;
        while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_' || s_[p_] == '\''))
            ++p_;
        if (b == p_) fail("expected letter");
        return std::string(s_.substr(b, p_ - b));
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, p_ + 1); }
    std::size_t pos() const { return p_; }

private:
    std::string_view s_;
    std::size_t p_ = 0;
};

inline Stack parse_bracket(Lexer& lx, const Alphabet& al) {
    lx.expect("[");
    std::vector<Stack> kids;
    std::vector<Char> chars;
    while (!lx.peek("]")) {
        if (lx.eof()) lx.fail("unterminated stack");
        if (lx.peek("[")) {
            if (!chars.empty()) lx.fail("mixed characters and stacks");
            kids.push_back(parse_bracket(lx, al));
            if (kids.size() > 1 && kids.back().order() != kids.front().order())
                lx.fail("elements of different orders");
        } else {
            if (!kids.empty()) lx.fail("mixed characters and stacks");
            std::size_t at = lx.pos();
            auto name = lx.ident();
            auto l = al.find(name);
            if (!l) throw ParseError("unknown letter '" + name + "'", 1, at + 1);
            Char c{*l, {}, 0, 0};
            if (lx.accept("^{")) {
                c.annot = parse_bracket(lx, al);
                lx.expect("}");
            }
            if (lx.accept("@")) {
                c.pr = lx.number();
                lx.expect(":");
                c.cr = lx.number();
            }
            chars.push_back(c);
        }
    }
    lx.expect("]");
    std::size_t at = lx.pos();
    int k = static_cast<int>(lx.number());
    std::uint32_t pr = 0;
    if (lx.accept("@")) pr = lx.number();
    if (k < 1) throw ParseError("order must be positive", 1, at + 1);
    if (k == 1) {
        if (!kids.empty()) throw ParseError("order-1 stack holds characters only", 1, at + 1);
        std::reverse(chars.begin(), chars.end());
        return make_stack1(std::move(chars), pr);
    }
    if (!chars.empty()) throw ParseError("order mismatch: characters in order-" + std::to_string(k), 1, at + 1);
    if (!kids.empty() && kids.front().order() != k - 1)
        throw ParseError("order mismatch: elements of order " + std::to_string(kids.front().order()), 1, at + 1);
    std::reverse(kids.begin(), kids.end());
    return make_stack(k, std::move(kids), pr);
}

}

inline Stack parse_stack(std::string_view text, const Alphabet& al) {
    detail::Lexer lx(text);
    Stack s = detail::parse_bracket(lx, al);
    if (!lx.eof()) lx.fail("trailing input");
    return s;
}

namespace detail {

inline void encode_elems(std::ostream& os, Stack w, const Alphabet& al, bool& first);

inline void encode_item_char(std::ostream& os, const Char& c, const Alphabet& al) {
    os << al.name(c.letter);
    if (c.annot) {
        os << '^' << c.annot.order() << '{';
        bool first = true;
        encode_elems(os, c.annot, al, first);
        os << '}';
    }
}

inline void encode_elems(std::ostream& os, Stack w, const Alphabet& al, bool& first) {
    auto sep = [&] { if (!first) os << ' '; first = false; };
    for (std::size_t i = 0; i < w.size(); ++i) {
        sep();
        if (w.order() == 1) {
            encode_item_char(os, w.chr(i), al);
        } else {
            Stack e = w.elem(i);
            os << '<' << e.order();
            bool inner = false;
            encode_elems(os, e, al, inner);
            os << " >" << e.order();
        }
    }
}

inline Stack decode_elems(Lexer& lx, int order, const Alphabet& al, std::string_view close);

inline Stack decode_elems(Lexer& lx, int order, const Alphabet& al, std::string_view close) {
    if (order == 1) {
        std::vector<Char> cs;
        while (!lx.eof() && !lx.peek(close)) {
            std::size_t at = lx.pos();
            auto name = lx.ident();
            auto l = al.find(name);
            if (!l) throw ParseError("unknown letter '" + name + "'", 1, at + 1);
            Char c{*l, {}, 0, 0};
            if (lx.accept("^")) {
                int k = static_cast<int>(lx.number());
                if (k < 1) lx.fail("annotation order must be positive");
                lx.expect("{");
                c.annot = decode_elems(lx, k, al, "}");
                lx.expect("}");
            }
            cs.push_back(c);
        }
        std::reverse(cs.begin(), cs.end());
        return make_stack1(std::move(cs));
    }
    std::vector<Stack> kids;
    const std::string open = "<" + std::to_string(order - 1);
    const std::string shut = ">" + std::to_string(order - 1);
    while (!lx.eof() && !lx.peek(close)) {
        lx.expect(open);
        kids.push_back(decode_elems(lx, order - 1, al, shut));
        lx.expect(shut);
    }
    std::reverse(kids.begin(), kids.end());
    return make_stack(order, std::move(kids));
}

}

inline std::string encode_tree(Stack w, const Alphabet& al) {
    std::ostringstream os;
    bool first = true;
    detail::encode_elems(os, w, al, first);
    return os.str();
}

inline Stack decode_tree(std::string_view word, int order, const Alphabet& al) {
    detail::Lexer lx(word);
    Stack s = detail::decode_elems(lx, order, al, "\x01");
    if (!lx.eof()) lx.fail("trailing input");
    return s;
}

}
