#pragma once

#include <stdexcept>
#include <string>

namespace mmreach {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// used in CLI messages and JSON reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

#define MMREACH_DEFINE_ERROR(Name, tag)                                        \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        const char* kind() const noexcept override { return tag; }             \
    }

MMREACH_DEFINE_ERROR(DimensionError, "dimension");
MMREACH_DEFINE_ERROR(GeometryError, "geometry");
MMREACH_DEFINE_ERROR(NumericError, "numeric");
MMREACH_DEFINE_ERROR(OrderError, "order");
MMREACH_DEFINE_ERROR(IndefiniteError, "indefinite");
MMREACH_DEFINE_ERROR(MonotonicityError, "monotonicity");
MMREACH_DEFINE_ERROR(DivergenceError, "divergence");
MMREACH_DEFINE_ERROR(IntegratorStepError, "integrator-step");
MMREACH_DEFINE_ERROR(IntegrityError, "integrity");
MMREACH_DEFINE_ERROR(SizeError, "size");
MMREACH_DEFINE_ERROR(ConfigError, "config");
MMREACH_DEFINE_ERROR(MismatchError, "mismatch");
MMREACH_DEFINE_ERROR(ExpressionError, "expression");

#undef MMREACH_DEFINE_ERROR

/// Expression syntax error. Carries the source, the 1-based column, and the
/// set of tokens that would have been accepted there.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string source, int column, std::string expected);

    const char* kind() const noexcept override { return "parse"; }
    const std::string& source() const noexcept { return source_; }
    int column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::string source_;
    int column_;
    std::string expected_;
};

} // namespace mmreach
