#pragma once

#include <stdexcept>
#include <string>

namespace chemosched {

// Base for all domain errors so callers can catch one type at the CLI boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A first-stage schedule violates structural rules (permutation, bounds, precedence).
class InfeasibleSchedule : public Error {
public:
    explicit InfeasibleSchedule(const std::string& what) : Error(what) {}
};

// A nurse exceeds the overtime cap in strict evaluation mode.
class OvertimeLimitExceeded : public Error {
public:
    explicit OvertimeLimitExceeded(const std::string& what) : Error(what) {}
};

// Exhaustive routines refuse inputs past their guard sizes.
class InstanceTooLarge : public Error {
public:
    explicit InstanceTooLarge(const std::string& what) : Error(what) {}
};

// No schedule can satisfy the overtime cap (or no candidate was feasible).
class Infeasible : public Error {
public:
    explicit Infeasible(const std::string& what) : Error(what) {}
};

// Instance generation ran out of resampling attempts for a target.
class GenerationExhausted : public Error {
public:
    explicit GenerationExhausted(const std::string& what) : Error(what) {}
};

// Not enough samples to form a valid goodness-of-fit test.
class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& what) : Error(what) {}
};

// MAPE is undefined when an actual value is zero.
class ZeroActual : public Error {
public:
    explicit ZeroActual(const std::string& what) : Error(what) {}
};

// Malformed input file or JSON payload.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

} // namespace chemosched
