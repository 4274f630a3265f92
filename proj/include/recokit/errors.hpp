#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recokit {

/// Base class for every error the toolkit raises.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// ---- data ingestion -------------------------------------------------------

class FileNotFoundError : public Error {
public:
    explicit FileNotFoundError(const std::string& path)
        : Error("file not found: " + path) {}
};

/// A header is present but required columns are missing or duplicated.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Raised with the 1-based data-row number (header excluded).
class MalformedRowError : public Error {
public:
    MalformedRowError(std::size_t row, const std::string& detail)
        : Error("malformed row " + std::to_string(row) + ": " + detail), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

// ---- splitting ------------------------------------------------------------

class TooFewInteractionsError : public Error {
public:
    using Error::Error;
};

// ---- evaluation -----------------------------------------------------------

class EmptyJoinError : public Error {
public:
    using Error::Error;
};

class InvalidCutoffError : public Error {
public:
    using Error::Error;
};

class NoEvaluableUsersError : public Error {
public:
    using Error::Error;
};

// ---- models ---------------------------------------------------------------

class InvalidReferenceTimeError : public Error {
public:
    using Error::Error;
};

/// A training parameter became non-finite; usually the learning rate is too high.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, const std::string& detail)
        : Error("training diverged at epoch " + std::to_string(epoch) + ": " + detail),
          epoch_(epoch) {}
    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// ---- tuning ---------------------------------------------------------------

class ContinuousAxisError : public Error {
public:
    using Error::Error;
};

class BudgetExceededError : public Error {
public:
    using Error::Error;
};

class NoSuccessfulTrialsError : public Error {
public:
    using Error::Error;
};

// ---- configuration & I/O --------------------------------------------------

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace recokit
