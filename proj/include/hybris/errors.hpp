#pragma once

#include <stdexcept>
#include <string>

namespace hybris {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct SingularMatrixError : Error {
    using Error::Error;
};

struct NotHurwitzError : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct MaxIterError : Error {
    using Error::Error;
};

struct InfeasibleParamsError : Error {
    using Error::Error;
};

struct InfeasibleKappaError : Error {
    using Error::Error;
};

struct JumpNotEnabledError : Error {
    using Error::Error;
};

struct FlowExitsBoxError : Error {
    using Error::Error;
};

struct UnknownModeError : Error {
    using Error::Error;
};

struct IntervalError : Error {
    using Error::Error;
};

struct XiNotPDError : Error {
    using Error::Error;
};

struct ZeroRowSumError : Error {
    using Error::Error;
};

struct AverageModeError : Error {
    using Error::Error;
};

/// Scenario/config parsing failure; `path` identifies the offending field.
struct ConfigError : Error {
    explicit ConfigError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), field_path(path) {}
    std::string field_path;
};

}  // namespace hybris
