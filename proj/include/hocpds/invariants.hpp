#pragma once

// Process-wide tally of structural invariant checks. Every construction that
// produces an automaton runs its checks through here, so a test run can assert
// that checks actually happened and none failed.

#include <hocpds/errors.hpp>

#include <atomic>
#include <map>
#include <mutex>
#include <string>

namespace hocpds {

class InvariantLedger {
public:
    static InvariantLedger& get() {
        static InvariantLedger l;
        return l;
    }

    void check(bool ok, const char* what) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto& e = counts_[what];
            ++e.first;
            if (!ok) ++e.second;
        }
        if (!ok) throw InvariantViolation(what);
    }

    // (checks, violations) per invariant name
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> snapshot() {
        std::lock_guard<std::mutex> lock(mu_);
        return counts_;
    }

    void reset() {
        std::lock_guard<std::mutex> lock(mu_);
        counts_.clear();
    }

private:
    std::mutex mu_;
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> counts_;
};

inline void invariant(bool ok, const char* what) { InvariantLedger::get().check(ok, what); }

}
