#pragma once

#include <stdexcept>
#include <string>

namespace cgn {

// Caller broke a documented precondition (dimension mismatch, lambda <= 0, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine exhausted its iteration budget or hit an unrecoverable
// floating-point state.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

// Initial cluster creation could not find an evaluable point for some column.
class InitializationFailure : public std::runtime_error {
public:
    InitializationFailure(const std::string& what, int column)
        : std::runtime_error(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

} // namespace cgn
