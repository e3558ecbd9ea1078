#pragma once

// Alternating order-n stack automata.
//
// States are numbered globally; each state has an order. For k >= 2 the
// transitions of an order-k state q are a map from target sets Q to the unique
// label state q' (order k-1): q reads the top order-(k-1) element from q' and
// the rest from every state of Q. Order-1 transitions q -a,B-> Q read a
// character a whose annotation must be accepted from every state of B (B = {}
// accepts any annotation or none) and the rest from Q.
//
// An empty set of targets accepts any rest, including the empty one; a state
// without transitions accepts only the empty stack, and only if final.

#include <hocpds/invariants.hpp>
#include <hocpds/stack.hpp>

#include <atomic>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace hocpds {

using State = std::uint32_t;
using StateSet = std::vector<State>;  // sorted, duplicate free

inline StateSet set_union(const StateSet& a, const StateSet& b) {
    StateSet r;
    r.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

inline StateSet make_set(std::vector<State> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

struct StateSetHash {
    std::size_t operator()(const StateSet& s) const {
        std::size_t h = s.size();
        for (State q : s) detail::hash_mix(h, q);
        return h;
    }
};

// q -a,B-> (Q_1, ..., Q_k) for a head of order k; to[j-1] holds Q_j
struct LongForm {
    State head = 0;
    Letter letter = kBottom;
    StateSet branch;
    std::vector<StateSet> to;

    auto operator<=>(const LongForm&) const = default;
};

// the head-less variant produced from a set of states
struct SetForm {
    StateSet branch;
    std::vector<StateSet> to;

    auto operator<=>(const SetForm&) const = default;
};

struct Trans1 {
    Letter letter;
    StateSet branch;
    StateSet to;

    auto operator<=>(const Trans1&) const = default;
};

class StackAutomaton {
public:
    explicit StackAutomaton(int n = 1) : n_(n) {}

    int order() const { return n_; }
    std::size_t num_states() const { return order_.size(); }
    std::size_t num_transitions() const { return ntrans_; }
    // unique across all automata: equal versions mean equal contents
    std::uint64_t version() const { return version_; }

    State add_state(int k, bool final = false) {
        if (k < 1 || k > n_) throw OrderMismatch("state order out of range");
        order_.push_back(k);
        final_.push_back(final);
        hi_.emplace_back();
        lo_.emplace_back();
        version_ = next_version();
        return static_cast<State>(order_.size() - 1);
    }

    int state_order(State q) const { return order_.at(q); }
    bool is_final(State q) const { return final_.at(q); }
    void set_final(State q, bool f) {
        final_.at(q) = f;
        version_ = next_version();
    }

    const std::map<StateSet, State>& out_hi(State q) const { return hi_.at(q); }
    const std::set<Trans1>& out1(State q) const { return lo_.at(q); }

    std::optional<State> label(State q, const StateSet& Q) const {
        auto& m = hi_.at(q);
        auto it = m.find(Q);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    // δ_k transition; at most one label per (q, Q)
    void add_hi(State q, const StateSet& Q, State lab) {
        int k = order_.at(q);
        if (k < 2 || order_.at(lab) != k - 1) throw OrderMismatch("add_hi: orders");
        for (State s : Q)
            if (order_.at(s) != k) throw OrderMismatch("add_hi: target order");
        auto [it, fresh] = hi_[q].emplace(Q, lab);
        invariant(fresh || it->second == lab, "order>=2 determinism");
        if (fresh) {
            ++ntrans_;
            version_ = next_version();
        }
    }

    bool add1(State q, Letter a, StateSet br, StateSet to) {
        if (order_.at(q) != 1) throw OrderMismatch("add1: state order");
        for (State s : to)
            if (order_.at(s) != 1) throw OrderMismatch("add1: target order");
        for (State s : br)
            if (order_.at(s) != order_.at(br.front())) throw OrderMismatch("add1: branch not homogeneous");
        bool fresh = lo_[q].insert(Trans1{a, std::move(br), std::move(to)}).second;
        if (fresh) {
            ++ntrans_;
            version_ = next_version();
        }
        return fresh;
    }

    // Materializes the chain of t, reusing the label of an existing (q, Q_k)
    // and creating fresh labels otherwise. Returns whether anything was added.
    bool add_long_form(const LongForm& t) {
        int k = order_.at(t.head);
        if (static_cast<int>(t.to.size()) != k) throw OrderMismatch("long form arity");
        State cur = t.head;
        for (int j = k; j >= 2; --j) {
            auto lab = label(cur, t.to[j - 1]);
            if (!lab) {
                State f = add_state(j - 1);
                add_hi(cur, t.to[j - 1], f);
                lab = f;
            }
            cur = *lab;
        }
        return add1(cur, t.letter, t.branch, t.to[0]);
    }

    // all (q_j, [Q_{j+1}, ..., Q_k]) with q -q_{k-1}-> Q_k ... q_{j+1} -q_j-> Q_{j+1}
    std::vector<std::pair<State, std::vector<StateSet>>> prefix_chains(State q, int j) const {
        std::vector<std::pair<State, std::vector<StateSet>>> out;
        int k = order_.at(q);
        if (j == k) {
            out.push_back({q, {}});
            return out;
        }
        for (auto& [Q, lab] : hi_.at(q)) {
            for (auto& [qj, sets] : prefix_chains(lab, j)) {
                sets.push_back(Q);
                out.push_back({qj, std::move(sets)});
            }
        }
        return out;
    }

    std::vector<LongForm> long_forms(State head) const {
        std::vector<LongForm> out;
        for (auto& [q1, sets] : prefix_chains(head, 1)) {
            for (auto& t : lo_.at(q1)) {
                LongForm lf{head, t.letter, t.branch, {t.to}};
                lf.to.insert(lf.to.end(), sets.begin(), sets.end());
                out.push_back(std::move(lf));
            }
        }
        return out;
    }

    std::vector<LongForm> long_forms(State head, Letter a) const {
        auto all = long_forms(head);
        std::vector<LongForm> out;
        for (auto& t : all)
            if (t.letter == a) out.push_back(std::move(t));
        return out;
    }

    // Q -a-> (B, Q_1..Q_k) for a set Q of order-k states: one long form per
    // member, unioned; the empty set yields the all-empty form.
    std::vector<SetForm> set_forms(const StateSet& Q, int k, Letter a) const {
        std::set<SetForm> acc{SetForm{{}, std::vector<StateSet>(k)}};
        for (State q : Q) {
            auto lfs = long_forms(q, a);
            std::set<SetForm> next;
            for (auto& partial : acc) {
                for (auto& t : lfs) {
                    if (!partial.branch.empty() && !t.branch.empty() &&
                        order_[partial.branch.front()] != order_[t.branch.front()])
                        continue;
                    SetForm f{set_union(partial.branch, t.branch), partial.to};
                    for (int j = 0; j < k; ++j) f.to[j] = set_union(f.to[j], t.to[j]);
                    next.insert(std::move(f));
                }
            }
            acc = std::move(next);
            if (acc.empty()) break;
        }
        return {acc.begin(), acc.end()};
    }

    // Checks orders, branch homogeneity and (by construction) determinism.
    void check_structure() const {
        for (State q = 0; q < num_states(); ++q) {
            int k = order_[q];
            if (k >= 2) {
                invariant(lo_[q].empty(), "no order-1 transitions on higher states");
                for (auto& [Q, lab] : hi_[q]) {
                    invariant(order_[lab] == k - 1, "label order");
                    for (State s : Q) invariant(order_[s] == k, "target order");
                }
            } else {
                invariant(hi_[q].empty(), "no higher transitions on order-1 states");
                for (auto& t : lo_[q]) {
                    for (State s : t.to) invariant(order_[s] == 1, "target order");
                    for (State s : t.branch) invariant(order_[s] == order_[t.branch.front()], "branch homogeneity");
                }
            }
        }
    }

    std::string to_dot(const std::map<State, std::string>& names = {}, const Alphabet* al = nullptr) const {
        std::ostringstream os;
        auto nm = [&](State q) {
            auto it = names.find(q);
            return it != names.end() ? it->second : "s" + std::to_string(q);
        };
        os << "digraph stackautomaton {\n  rankdir=LR;\n";
        for (int k = n_; k >= 1; --k) {
            os << "  subgraph cluster_" << k << " {\n    label=\"order " << k << "\";\n";
            for (State q = 0; q < num_states(); ++q)
                if (order_[q] == k)
                    os << "    " << q << " [label=\"" << nm(q) << "\"" << (final_[q] ? ",shape=doublecircle" : "") << "];\n";
            os << "  }\n";
        }
        std::size_t hub = 0;
        auto edges = [&](State from, const std::string& lab, const StateSet& to, const StateSet& br) {
            std::string h = "h" + std::to_string(hub++);
            os << "  " << h << " [shape=point];\n  " << from << " -> " << h << " [label=\"" << lab << "\",arrowhead=none];\n";
            for (State s : to) os << "  " << h << " -> " << s << ";\n";
            for (State s : br) os << "  " << h << " -> " << s << " [style=dashed];\n";
        };
        for (State q = 0; q < num_states(); ++q) {
            for (auto& [Q, lab] : hi_[q]) edges(q, nm(lab), Q, {});
            for (auto& t : lo_[q]) edges(q, al ? al->name(t.letter) : std::to_string(t.letter), t.to, t.branch);
        }
        os << "}\n";
        return os.str();
    }

private:
    int n_;
    std::vector<int> order_;
    std::vector<bool> final_;
    std::vector<std::map<StateSet, State>> hi_;
    std::vector<std::set<Trans1>> lo_;
    std::size_t ntrans_ = 0;
    static std::uint64_t next_version() {
        static std::atomic<std::uint64_t> counter{1};
        return counter++;
    }

    std::uint64_t version_ = 0;
};

// Entries an Acceptor memo may hold before it is flushed. HOCPDS_MEMO_CACHE
// overrides the default.
inline std::size_t memo_cache_limit() {
    static const std::size_t limit = [] {
        const char* v = std::getenv("HOCPDS_MEMO_CACHE");
        if (v && *v) {
            char* end = nullptr;
            unsigned long long n = std::strtoull(v, &end, 10);
            if (end && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
        }
        return std::size_t(1) << 22;
    }();
    return limit;
}

// Membership with a memo over (state, substack, depth). The memo is tied to
// one automaton version.
class Acceptor {
public:
    explicit Acceptor(const StackAutomaton& a) : a_(a), version_(a.version()) {}

    bool accepts(State q, Stack w) {
        if (a_.version() != version_) {
            memo_.clear();
            version_ = a_.version();
        }
        if (a_.state_order(q) != w.order()) return false;
        return acc(q, w, 0);
    }

    bool accepts_all(const StateSet& Q, Stack w) {
        for (State q : Q)
            if (!accepts(q, w)) return false;
        return true;
    }

private:
    struct Key {
        State q;
        const Node* w;
        std::size_t pos;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = k.q;
            detail::hash_mix(h, std::hash<const void*>()(k.w));
            detail::hash_mix(h, k.pos);
            return h;
        }
    };

    bool acc_all(const StateSet& Q, Stack w, std::size_t pos) {
        for (State q : Q)
            if (!acc(q, w, pos)) return false;
        return true;
    }

    bool acc(State q, Stack w, std::size_t pos) {
        Key key{q, w.node(), pos};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool r = false;
        if (pos == w.size()) {
            r = a_.is_final(q);
        } else if (w.order() == 1) {
            const Char& c = w.chr(pos);
            for (auto& t : a_.out1(q)) {
                if (t.letter != c.letter) continue;
                if (!t.branch.empty()) {
                    if (!c.annot || c.annot.order() != a_.state_order(t.branch.front())) continue;
                    if (!acc_all(t.branch, c.annot, 0)) continue;
                }
                if (acc_all(t.to, w, pos + 1)) {
                    r = true;
                    break;
                }
            }
        } else {
            Stack e = w.elem(pos);
            for (auto& [Q, lab] : a_.out_hi(q)) {
                if (acc(lab, e, 0) && acc_all(Q, w, pos + 1)) {
                    r = true;
                    break;
                }
            }
        }
        if (memo_.size() >= memo_cache_limit()) memo_.clear();
        memo_.emplace(key, r);
        return r;
    }

    const StackAutomaton& a_;
    std::uint64_t version_;
    std::unordered_map<Key, bool, KeyHash> memo_;
};

inline bool accepts(const StackAutomaton& a, State q, Stack w) {
    Acceptor acc(a);
    return acc.accepts(q, w);
}

// Emptiness of conjunctions of states over well-formed stacks. A set S is
// nonempty iff some well-formed stack is accepted from every member; for
// alternating automata this is a question about sets, not single states, so
// the fixpoint runs over the (set, shape) pairs reachable from the query.
// Shapes: a nonempty well-formed stack, that or the empty stack (tails of
// order >= 2 and annotations), or the empty stack alone (after ⊥).
// Witnesses are read off the recorded choices.
class Emptiness {
public:
    explicit Emptiness(const StackAutomaton& a) : a_(a) {}

    bool nonempty(const StateSet& S) {
        if (S.empty()) return true;
        return solve(Node{S, Shape::Full});
    }

    bool nonempty(State q) { return nonempty(StateSet{q}); }

    // a well-formed stack of the given order accepted from every state of S
    std::optional<Stack> witness(const StateSet& S, int order) {
        if (S.empty()) return bottom_stack(order);
        if (!nonempty(S)) return std::nullopt;
        return build(ids_.at(Node{S, Shape::Full}));
    }

private:
    enum class Shape { Full, MaybeEmpty, Empty };
    struct Node {
        StateSet S;
        Shape shape;
        auto operator<=>(const Node&) const = default;
    };
    static constexpr int kUnknown = -1;
    static constexpr int kEmptyStack = -2;

    struct Combo {
        Letter letter = kBottom;  // order 1
        int top = -1;             // order >= 2: node of the labels
        int branch = -1;          // order 1: node of the annotation
        int rest = -1;
    };

    // -1 encodes the empty set, which accepts everything
    int intern(const StateSet& S, Shape sh, std::vector<std::size_t>& todo) {
        if (S.empty()) return -1;
        auto [it, fresh] = ids_.emplace(Node{S, sh}, nodes_.size());
        if (fresh) {
            nodes_.push_back(Node{S, sh});
            combos_.emplace_back();
            chosen_.push_back(kUnknown);
            stamp_.push_back(0);
            todo.push_back(it->second);
        }
        return static_cast<int>(it->second);
    }

    void expand(std::size_t id, std::vector<std::size_t>& todo) {
        const Node nd = nodes_[id];
        const StateSet& S = nd.S;
        int k = a_.state_order(S.front());
        bool all_final = true;
        for (State s : S) all_final = all_final && a_.is_final(s);
        if (nd.shape != Shape::Full && all_final) chosen_[id] = kEmptyStack;
        if (nd.shape == Shape::Empty) return;
        std::vector<Combo> out;
        if (nd.shape == Shape::MaybeEmpty) {
            out.push_back(Combo{kBottom, -1, -1, intern(S, Shape::Full, todo)});
            combos_[id] = std::move(out);
            return;
        }
        if (k >= 2) {
            std::vector<std::pair<StateSet, StateSet>> acc{{{}, {}}};
            for (State s : S) {
                std::vector<std::pair<StateSet, StateSet>> next;
                for (auto& [top, rest] : acc)
                    for (auto& [Q, lab] : a_.out_hi(s)) next.emplace_back(set_union(top, {lab}), set_union(rest, Q));
                acc = std::move(next);
            }
            for (auto& [top, rest] : acc)
                out.push_back(Combo{kBottom, intern(top, Shape::Full, todo), -1, intern(rest, Shape::MaybeEmpty, todo)});
        } else {
            std::set<Letter> letters;
            for (auto& t : a_.out1(S.front())) letters.insert(t.letter);
            for (Letter a : letters) {
                std::vector<std::pair<StateSet, StateSet>> part{{{}, {}}};
                for (State s : S) {
                    std::vector<std::pair<StateSet, StateSet>> next;
                    for (auto& [br, rest] : part)
                        for (auto& t : a_.out1(s)) {
                            if (t.letter != a) continue;
                            if (!br.empty() && !t.branch.empty() &&
                                a_.state_order(br.front()) != a_.state_order(t.branch.front()))
                                continue;
                            next.emplace_back(set_union(br, t.branch), set_union(rest, t.to));
                        }
                    part = std::move(next);
                }
                for (auto& [br, rest] : part) {
                    if (a == kBottom) {
                        // ⊥ carries no annotation and ends the order-1 stack
                        if (!br.empty()) continue;
                        out.push_back(Combo{a, -1, -1, intern(rest, Shape::Empty, todo)});
                    } else {
                        out.push_back(
                            Combo{a, -1, intern(br, Shape::MaybeEmpty, todo), intern(rest, Shape::Full, todo)});
                    }
                }
            }
        }
        combos_[id] = std::move(out);
    }

    bool known(int id, std::uint64_t before) const {
        return id < 0 || (chosen_[id] != kUnknown && stamp_[id] < before);
    }

    bool solve(const Node& start) {
        auto f = ids_.find(start);
        if (f != ids_.end() && chosen_[f->second] != kUnknown) return true;
        std::vector<std::size_t> todo;
        std::size_t root = static_cast<std::size_t>(intern(start.S, start.shape, todo));
        while (!todo.empty()) {
            std::size_t id = todo.back();
            todo.pop_back();
            expand(id, todo);
            if (chosen_[id] == kEmptyStack) stamp_[id] = clock_++;
        }
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t id = 0; id < nodes_.size(); ++id) {
                if (chosen_[id] != kUnknown) continue;
                std::uint64_t now = clock_;
                for (std::size_t c = 0; c < combos_[id].size(); ++c) {
                    auto& cb = combos_[id][c];
                    if (known(cb.top, now) && known(cb.branch, now) && known(cb.rest, now)) {
                        chosen_[id] = static_cast<int>(c);
                        stamp_[id] = clock_++;
                        changed = true;
                        break;
                    }
                }
            }
        }
        return chosen_[root] != kUnknown;
    }

    // a stack for node id; -1 (empty set) yields the least stack of the shape
    Stack build_or(int id, int k, Shape sh) {
        if (id >= 0) return build(static_cast<std::size_t>(id));
        return sh == Shape::Full ? bottom_stack(k) : empty_stack(k);
    }

    Stack build(std::size_t id) {
        const Node& nd = nodes_[id];
        int k = a_.state_order(nd.S.front());
        if (chosen_[id] == kEmptyStack) return empty_stack(k);
        const Combo& cb = combos_[id][chosen_[id]];
        if (nd.shape == Shape::MaybeEmpty) return build(static_cast<std::size_t>(cb.rest));
        if (k >= 2) return compose(build_or(cb.top, k - 1, Shape::Full), k, build_or(cb.rest, k, Shape::MaybeEmpty));
        Char c{cb.letter, {}, 0, 0};
        if (cb.letter == kBottom) return compose(c, empty_stack(1));
        if (cb.branch >= 0) c.annot = build(static_cast<std::size_t>(cb.branch));
        return compose(c, build_or(cb.rest, 1, Shape::Full));
    }

    const StackAutomaton& a_;
    std::map<Node, std::size_t> ids_;
    std::vector<Node> nodes_;
    std::vector<std::vector<Combo>> combos_;
    std::vector<int> chosen_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t clock_ = 1;
};

// per-order sets of states with nonempty language
inline std::vector<std::set<State>> nonempty_states(const StackAutomaton& a) {
    std::vector<std::set<State>> out(a.order() + 1);
    Emptiness e(a);
    for (State q = 0; q < a.num_states(); ++q)
        if (e.nonempty(q)) out[a.state_order(q)].insert(q);
    return out;
}

// Copies every state and transition of src into dst; returns the renaming.
inline std::vector<State> import_automaton(StackAutomaton& dst, const StackAutomaton& src) {
    if (dst.order() != src.order()) throw OrderMismatch("import: orders differ");
    std::vector<State> ren(src.num_states());
    for (State q = 0; q < src.num_states(); ++q) ren[q] = dst.add_state(src.state_order(q), src.is_final(q));
    auto map = [&](const StateSet& s) {
        StateSet r;
        for (State q : s) r.push_back(ren[q]);
        return make_set(std::move(r));
    };
    for (State q = 0; q < src.num_states(); ++q) {
        for (auto& [Q, lab] : src.out_hi(q)) dst.add_hi(ren[q], map(Q), ren[lab]);
        for (auto& t : src.out1(q)) dst.add1(ren[q], t.letter, map(t.branch), map(t.to));
    }
    return ren;
}

// A fresh state with the language of q: labels are cloned so that the copy
// can be extended independently of q.
inline State clone_state(StackAutomaton& a, State q) {
    State r = a.add_state(a.state_order(q), a.is_final(q));
    if (a.state_order(q) == 1) {
        auto ts = a.out1(q);
        for (auto& t : ts) a.add1(r, t.letter, t.branch, t.to);
        return r;
    }
    auto hs = a.out_hi(q);
    for (auto& [Q, lab] : hs) a.add_hi(r, Q, clone_state(a, lab));
    return r;
}

// fresh state accepting L(p) ∪ L(q)
inline State union_states(StackAutomaton& a, State p, State q) {
    if (a.state_order(p) != a.state_order(q)) throw OrderMismatch("union: orders differ");
    State r = a.add_state(a.state_order(p), a.is_final(p) || a.is_final(q));
    if (a.state_order(p) == 1) {
        auto tp = a.out1(p);
        auto tq = a.out1(q);
        for (auto& t : tp) a.add1(r, t.letter, t.branch, t.to);
        for (auto& t : tq) a.add1(r, t.letter, t.branch, t.to);
        return r;
    }
    auto hp = a.out_hi(p);
    auto hq = a.out_hi(q);
    for (auto& [Q, lab] : hp) {
        auto it = hq.find(Q);
        a.add_hi(r, Q, it == hq.end() ? clone_state(a, lab) : union_states(a, lab, it->second));
    }
    for (auto& [Q, lab] : hq)
        if (!hp.count(Q)) a.add_hi(r, Q, clone_state(a, lab));
    return r;
}

// fresh state accepting L(p) ∩ L(q)
inline State intersect_states(StackAutomaton& a, State p, State q) {
    int k = a.state_order(p);
    if (k != a.state_order(q)) throw OrderMismatch("intersect: orders differ");
    State r = a.add_state(k, a.is_final(p) && a.is_final(q));
    if (k == 1) {
        auto tp = a.out1(p);
        auto tq = a.out1(q);
        for (auto& x : tp)
            for (auto& y : tq) {
                if (x.letter != y.letter) continue;
                if (!x.branch.empty() && !y.branch.empty() &&
                    a.state_order(x.branch.front()) != a.state_order(y.branch.front()))
                    continue;
                a.add1(r, x.letter, set_union(x.branch, y.branch), set_union(x.to, y.to));
            }
        return r;
    }
    auto hp = a.out_hi(p);
    auto hq = a.out_hi(q);
    std::map<StateSet, std::vector<State>> by_target;
    for (auto& [P, lp] : hp)
        for (auto& [Q, lq] : hq) by_target[set_union(P, Q)].push_back(intersect_states(a, lp, lq));
    for (auto& [U, labs] : by_target) {
        State lab = labs.front();
        for (std::size_t i = 1; i < labs.size(); ++i) lab = union_states(a, lab, labs[i]);
        a.add_hi(r, U, lab);
    }
    return r;
}

// P-automaton: a stack automaton with one order-n head state per control
struct PAutomaton {
    StackAutomaton aut;
    std::vector<State> head;  // indexed by control

    PAutomaton() = default;
    PAutomaton(int n, std::size_t controls) : aut(n) {
        for (std::size_t i = 0; i < controls; ++i) head.push_back(aut.add_state(n));
    }

    int order() const { return aut.order(); }

    bool member(std::size_t control, Stack w) const {
        if (control >= head.size()) throw UnknownControl("control " + std::to_string(control));
        return accepts(aut, head[control], w);
    }

    // accept every stack from the head of the control
    void accept_all(std::size_t control, const Alphabet& al) {
        for (Letter x : al.letters())
            aut.add_long_form(LongForm{head[control], x, {}, std::vector<StateSet>(aut.order())});
    }
};

// The heads and the labels hanging below them (the states saturation adds
// transitions to) must be non-final, must not occur in any target or branch
// set, and each such label must label exactly one transition.
inline void check_initial_states(const StackAutomaton& a, const std::vector<State>& heads) {
    std::vector<int> initial(a.num_states(), 0);
    std::vector<int> labels(a.num_states(), 0);
    for (State q = 0; q < a.num_states(); ++q)
        for (auto& [Q, lab] : a.out_hi(q)) ++labels[lab];
    std::vector<State> todo;
    for (State h : heads) {
        if (a.state_order(h) != a.order()) throw PreconditionViolation("head state must have order n");
        if (labels[h]) throw PreconditionViolation("head state used as a label");
        if (!initial[h]) todo.push_back(h);
        initial[h] = 1;
    }
    while (!todo.empty()) {
        State q = todo.back();
        todo.pop_back();
        for (auto& [Q, lab] : a.out_hi(q)) {
            if (labels[lab] > 1) throw PreconditionViolation("state labels more than one transition");
            if (!initial[lab]) todo.push_back(lab);
            initial[lab] = 1;
        }
    }
    for (State q = 0; q < a.num_states(); ++q) {
        if (initial[q] && a.is_final(q)) throw PreconditionViolation("initial state is final");
        auto touch = [&](const StateSet& s) {
            for (State x : s)
                if (initial[x]) throw PreconditionViolation("initial state has an incoming transition");
        };
        for (auto& [Q, lab] : a.out_hi(q)) touch(Q);
        for (auto& t : a.out1(q)) {
            touch(t.to);
            touch(t.branch);
        }
    }
}

}
