#pragma once

#include <stdexcept>
#include <string>

namespace lstrack {

enum class ErrorKind {
    InvalidArgument,
    OutOfDomain,
    MissingData,
    UnsupportedConfiguration,
    NumericalFailure,
    NonConvergence,
    DegenerateGeometry,
    EmptyRegion,
    RankZero,
    NoNullSpace,
    UndefinedMetric,
    ConfigError,
};

const char* to_string(ErrorKind kind);

// All library failures derive from this; `kind()` drives the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::OutOfDomain: return "out-of-domain";
        case ErrorKind::MissingData: return "missing-data";
        case ErrorKind::UnsupportedConfiguration: return "unsupported-configuration";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::NonConvergence: return "non-convergence";
        case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
        case ErrorKind::EmptyRegion: return "empty-region";
        case ErrorKind::RankZero: return "rank-zero";
        case ErrorKind::NoNullSpace: return "no-null-space";
        case ErrorKind::UndefinedMetric: return "undefined-metric";
        case ErrorKind::ConfigError: return "config-error";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace lstrack
