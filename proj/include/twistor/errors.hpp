#pragma once

#include <stdexcept>
#include <string>

namespace twistor {

// Direction left the single stereographic chart (south pole, or numerically
// indistinguishable from it).
class ChartEscape : public std::domain_error {
public:
    explicit ChartEscape(const std::string& what) : std::domain_error(what) {}
};

class NotIntegrable : public std::runtime_error {
public:
    explicit NotIntegrable(const std::string& what) : std::runtime_error(what) {}
};

class PathMismatch : public std::runtime_error {
public:
    PathMismatch(const std::string& what, double discrepancy)
        : std::runtime_error(what), discrepancy(discrepancy) {}
    double discrepancy;
};

class NoIntersection : public std::runtime_error {
public:
    explicit NoIntersection(const std::string& what) : std::runtime_error(what) {}
};

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

class BranchUndefined : public std::runtime_error {
public:
    explicit BranchUndefined(const std::string& what) : std::runtime_error(what) {}
};

class DegenerateFocus : public std::runtime_error {
public:
    explicit DegenerateFocus(const std::string& what) : std::runtime_error(what) {}
};

class InvalidParams : public std::invalid_argument {
public:
    explicit InvalidParams(const std::string& what) : std::invalid_argument(what) {}
};

class UnknownCase : public std::invalid_argument {
public:
    explicit UnknownCase(const std::string& what) : std::invalid_argument(what) {}
};

class DerivativeMismatch : public std::runtime_error {
public:
    DerivativeMismatch(const std::string& what, double mismatch)
        : std::runtime_error(what), mismatch(mismatch) {}
    double mismatch;
};

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          line(line), message(message) {}
    int line;
    std::string message;
};

class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field(field), message(message) {}
    std::string field;
    std::string message;
};

}  // namespace twistor
