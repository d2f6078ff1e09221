#pragma once

#include <stdexcept>
#include <string>

namespace prodbar {

/// Base of every error raised by the library. `kind()` is a stable token used
/// by the CLI for machine-parsable diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& what) : Error("index", what) {}
};

class IllConditionedError : public Error {
public:
    IllConditionedError(const std::string& what, double condition)
        : Error("ill_conditioned", what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class SpectralGapError : public Error {
public:
    explicit SpectralGapError(const std::string& what) : Error("spectral_gap", what) {}
};

class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error("capacity", what) {}
};

class OrderError : public Error {
public:
    explicit OrderError(const std::string& what) : Error("order", what) {}
};

class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

}  // namespace prodbar
