#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repvar {

/// Error classes. The numeric value doubles as the CLI exit code.
enum class ErrorCode : int {
    InvalidSample = 10,
    UnconstructibleOrder = 11,
    InsufficientBalancedColumns = 12,
    TooFewZones = 13,
    DimensionMismatch = 14,
    EpsilonOutOfRange = 15,
    OddReplicateCount = 16,
    DegenerateContrasts = 17,
    InvalidProbability = 18,
    SchemeMismatch = 19,
    ParseError = 20,
    MissingPair = 21,
    DuplicatePsu = 22,
    NonPositiveWeight = 23,
    ConfigError = 24,
    IoError = 25,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

} // namespace repvar
