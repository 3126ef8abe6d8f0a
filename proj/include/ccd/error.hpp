#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccd {

enum class ErrorKind {
    Io,
    Parse,
    DimensionMismatch,
    UnknownChannel,
    OutOfRange,
    EmptyCloud,
    Degenerate,
    TooFewPoints,
    FitFailed,
    MissingChannel,
    InvalidArgument,
    NotFound,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::UnknownChannel: return "unknown_channel";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::EmptyCloud: return "empty_cloud";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::TooFewPoints: return "too_few_points";
    case ErrorKind::FitFailed: return "fit_failed";
    case ErrorKind::MissingChannel: return "missing_channel";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::NotFound: return "not_found";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// RANSAC could not find a consensus set large enough; carries the best count seen.
class FitFailedError : public Error {
public:
    FitFailedError(const std::string& message, std::size_t best_count)
        : Error(ErrorKind::FitFailed, message), best_count_(best_count) {}

    std::size_t best_count() const noexcept { return best_count_; }

private:
    std::size_t best_count_;
};

} // namespace ccd
