#pragma once

#include <stdexcept>
#include <string>

namespace hocpds {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndefinedTop : Error { using Error::Error; };
struct UndefinedOperation : Error { using Error::Error; };
struct OrderMismatch : Error { using Error::Error; };
struct UnknownControl : Error { using Error::Error; };
struct PreconditionViolation : Error { using Error::Error; };
struct LanguageQueryFailure : Error { using Error::Error; };
struct NotRoundPartitionable : Error { using Error::Error; };
struct ArityMismatch : Error { using Error::Error; };
struct NotSupported : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct VertexBudgetExceeded : BudgetExceeded { using BudgetExceeded::BudgetExceeded; };
struct InvariantViolation : Error { using Error::Error; };
struct RecursionDepthExceeded : Error { using Error::Error; };

struct ParseError : Error {
    std::size_t line, column;
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line(line), column(column) {}
};

}
