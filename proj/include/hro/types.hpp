// Common dense types, error classes and seeded random streams.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hro {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Sequence of discrete state or symbol indices (0-based).
using StateSequence = std::vector<int>;

/// Precondition or shape violation on user-supplied inputs.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Problem too large for the exact desk-scale algorithms.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Raw record cannot be mapped onto a feature schema.
class EncodingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input text; `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

/// Purpose tags for independent random sub-streams derived from one seed.
enum class Stream : std::uint32_t {
    StatePath = 1,
    Labels = 2,
    Covariates = 3,
    Noise = 4,
    Restarts = 5,
    Drift = 6,
    Categorical = 7,
};

/// Engine for one (seed, purpose) pair; streams never share state, so changing
/// how many draws one purpose consumes does not perturb the others.
inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint32_t salt = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), salt};
    return std::mt19937_64(seq);
}

} // namespace hro
