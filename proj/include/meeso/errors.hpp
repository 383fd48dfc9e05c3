#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meeso {

/// Precondition broken by the caller (wrong dimensionality, untrained model, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The constrained search space admits fewer distinct candidates than requested.
class ExhaustedSpace : public std::runtime_error {
public:
    ExhaustedSpace(std::size_t requested, std::size_t admissible)
        : std::runtime_error("search space exhausted: requested " + std::to_string(requested) +
                             " candidates but only " + std::to_string(admissible) + " are admissible"),
          requested_(requested), admissible_(admissible) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t admissible() const noexcept { return admissible_; }

private:
    std::size_t requested_;
    std::size_t admissible_;
};

class InsufficientHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Acquisition found no unevaluated candidate in the pool.
class EmptySpace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int epoch)
        : std::runtime_error("training diverged (non-finite loss) in epoch " + std::to_string(epoch)),
          epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

class NotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (history, checkpoint, dataset, candidate).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}

    /// 1-based line number, 0 when not line-oriented.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace meeso
