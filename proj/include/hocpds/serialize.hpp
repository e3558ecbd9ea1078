#pragma once

// JSON for stack automata, regular configuration sets and witness runs.

#include <hocpds/regconf.hpp>

#include <json.hpp>

namespace hocpds {

using json = nlohmann::ordered_json;

inline constexpr const char* kResultSchema = "hocpds-result/1";

inline json automaton_to_json(const StackAutomaton& a, const Alphabet& al) {
    json states = json::array(), fin = json::array(), hi = json::array(), lo = json::array();
    for (State q = 0; q < a.num_states(); ++q) {
        states.push_back(a.state_order(q));
        if (a.is_final(q)) fin.push_back(q);
    }
    for (State q = 0; q < a.num_states(); ++q) {
        if (a.state_order(q) >= 2)
            for (auto& [Q, lab] : a.out_hi(q)) hi.push_back(json::array({q, Q, lab}));
        else
            for (auto& t : a.out1(q)) lo.push_back(json::array({q, al.name(t.letter), t.branch, t.to}));
    }
    return json{{"order", a.order()}, {"states", states}, {"final", fin}, {"hi", hi}, {"lo", lo}};
}

inline StackAutomaton automaton_from_json(const json& j, const Alphabet& al) {
    StackAutomaton a(j.at("order").get<int>());
    std::set<State> fin;
    for (auto& f : j.at("final")) fin.insert(f.get<State>());
    auto& st = j.at("states");
    for (std::size_t q = 0; q < st.size(); ++q) {
        int k = st[q].get<int>();
        if (k < 1 || k > a.order()) throw Error("state order out of range");
        a.add_state(k, fin.count(static_cast<State>(q)) > 0);
    }
    auto set = [&](const json& v) {
        std::vector<State> s = v.get<std::vector<State>>();
        for (State x : s)
            if (x >= a.num_states()) throw Error("state out of range");
        return make_set(std::move(s));
    };
    for (auto& e : j.at("hi")) {
        State q = e.at(0).get<State>(), lab = e.at(2).get<State>();
        if (q >= a.num_states() || lab >= a.num_states()) throw Error("state out of range");
        a.add_hi(q, set(e.at(1)), lab);
    }
    for (auto& e : j.at("lo")) {
        State q = e.at(0).get<State>();
        if (q >= a.num_states()) throw Error("state out of range");
        a.add1(q, al.at(e.at(1).get<std::string>()), set(e.at(2)), set(e.at(3)));
    }
    a.check_structure();
    return a;
}

// Tuples are listed in a canonical order and automata are shared by content,
// so equal sets built along different paths serialize identically.
inline json set_to_json(const RegularConfigSet& s, const Mcpds& sys) {
    std::vector<std::pair<std::string, std::pair<json, json>>> rows;
    std::map<const StackAutomaton*, json> done;
    for (auto& t : s.tuples()) {
        json auts = json::array(), init = json::array();
        for (std::size_t i = 0; i < t.auts.size(); ++i) {
            auto it = done.find(t.auts[i].get());
            if (it == done.end()) it = done.emplace(t.auts[i].get(), automaton_to_json(*t.auts[i], sys.alphabet)).first;
            auts.push_back(it->second);
            init.push_back(t.init[i]);
        }
        json key = json::array({sys.controls.at(t.control), auts, init});
        rows.push_back({key.dump(), {std::move(auts), std::move(init)}});
    }
    std::sort(rows.begin(), rows.end(), [](auto& x, auto& y) { return x.first < y.first; });
    rows.erase(std::unique(rows.begin(), rows.end(), [](auto& x, auto& y) { return x.first == y.first; }), rows.end());
    std::map<std::string, std::size_t> aid;
    json automata = json::array(), tuples = json::array();
    for (auto& [key, v] : rows) {
        json k = json::parse(key);
        json refs = json::array();
        for (auto& a : v.first) {
            auto d = a.dump();
            auto [it, fresh] = aid.emplace(d, automata.size());
            if (fresh) automata.push_back(a);
            refs.push_back(it->second);
        }
        tuples.push_back(json{{"control", k[0]}, {"automata", refs}, {"init", v.second}});
    }
    json letters = json::array(), controls = json::array();
    for (Letter x = 1; x < sys.alphabet.size(); ++x) letters.push_back(sys.alphabet.name(x));
    for (auto& c : sys.controls) controls.push_back(c);
    return json{{"order", s.order()},   {"stacks", s.num_stacks()}, {"letters", letters},
                {"controls", controls}, {"automata", automata},     {"tuples", tuples}};
}

// the set plus a system skeleton (order, letters, controls) to parse against
inline std::pair<RegularConfigSet, Mcpds> set_from_json(const json& j) {
    Mcpds sys;
    sys.order = j.at("order").get<int>();
    for (auto& l : j.at("letters")) sys.alphabet.add(l.get<std::string>());
    for (auto& c : j.at("controls")) sys.add_control(c.get<std::string>());
    const std::size_t m = j.at("stacks").get<std::size_t>();
    sys.stacks.assign(m, {});
    std::vector<std::shared_ptr<const StackAutomaton>> auts;
    for (auto& a : j.at("automata")) auts.push_back(std::make_shared<const StackAutomaton>(automaton_from_json(a, sys.alphabet)));
    RegularConfigSet s(sys.order, m);
    for (auto& t : j.at("tuples")) {
        ConfigTuple ct{sys.control(t.at("control").get<std::string>()), {}, {}};
        for (auto& r : t.at("automata")) ct.auts.push_back(auts.at(r.get<std::size_t>()));
        for (auto& q : t.at("init")) ct.init.push_back(q.get<State>());
        for (std::size_t i = 0; i < ct.init.size() && i < ct.auts.size(); ++i)
            if (ct.init[i] >= ct.auts[i]->num_states()) throw Error("initial state out of range");
        s.add(std::move(ct));
    }
    return {std::move(s), std::move(sys)};
}

inline json run_to_json(const Run& run, const Mcpds& sys) {
    json steps = json::array();
    for (std::size_t i = 0; i < run.configs.size(); ++i) {
        json s{{"config", config_to_string(run.configs[i], sys)}};
        if (i) {
            auto& [r, st] = run.steps[i - 1];
            s["stack"] = st + 1;
            s["rule"] = rule_to_string(r, sys);
        }
        steps.push_back(std::move(s));
    }
    return steps;
}

}
