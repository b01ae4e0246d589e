#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace voltgrid {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input row; carries the 1-based row index.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t row)
        : Error(what + " (row " + std::to_string(row) + ")"), row_index(row) {}
    std::size_t row_index;
};

/// Domain invariant violated (OHLC ordering, negative volume, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Series has holes; carries the missing timestamps.
struct GapError : Error {
    GapError(const std::string& what, std::vector<long long> missing_ts)
        : Error(what), missing(std::move(missing_ts)) {}
    std::vector<long long> missing;
};

/// Look-back window not fully covered by the series.
struct InsufficientDataError : Error {
    using Error::Error;
};

/// Unknown name in a registry lookup.
struct LookupError : Error {
    using Error::Error;
};

/// Volatility makes a formula degenerate (e.g. buy grid with phi >= 1).
struct DegenerateVolatilityError : Error {
    using Error::Error;
};

struct StaleSnapshotError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

/// A metric that cannot be computed from the given inputs.
struct UndefinedMetricError : Error {
    using Error::Error;
};

/// Feedback record references logs that do not line up.
struct IntegrityError : Error {
    using Error::Error;
};

/// Scenario quantities outside the domain of a constraint formula.
struct DegenerateScenarioError : Error {
    using Error::Error;
};

enum class FaultKind { rate_limit, timeout, disconnect };

/// Injected connectivity fault. Retryable by contract.
struct FaultError : Error {
    FaultError(FaultKind k, const std::string& what) : Error(what), kind(k) {}
    FaultKind kind;
};

} // namespace voltgrid
