#pragma once

#include <stdexcept>
#include <string>

namespace jkit {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operands live on different charts, have mismatched kinds, or are otherwise
/// structurally incompatible.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A degree constraint was violated (wrong tensor degree for an operation).
class DegreeError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be invertible is singular.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Input is outside the supported fragment (e.g. non-constant coefficients
/// where constants are required).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A computation exceeded the configured resource budget (term count).
class ResourceError : public Error {
public:
    using Error::Error;
};

/// The caller invoked an operation with unusable arguments (e.g. an empty
/// test set for a property check).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Source-file parse failure; carries 1-based line/column.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(what + " at line " + std::to_string(line) + ", column " +
                std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

/// Term budget for polynomial/tensor maps; configured by JKIT_MAX_TERMS
/// (default 1000000). Exceeding it raises ResourceError.
std::size_t max_terms();

inline void guard_terms(std::size_t n) {
    if (n > max_terms())
        throw ResourceError("term count " + std::to_string(n) +
                            " exceeds JKIT_MAX_TERMS budget " +
                            std::to_string(max_terms()));
}

}  // namespace jkit
