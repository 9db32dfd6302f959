// Discrete hidden Markov models: sampling, scaled forward/backward inference,
// Viterbi decoding, Baum-Welch learning and factorial flattening.
#pragma once

#include "hro/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace hro {

/// Hidden chain with a discrete emission alphabet.
///
/// Rows of `transition` (n_hidden x n_hidden) and `emission`
/// (n_hidden x n_observed) are probability distributions, as is `initial`.
struct HmmSpec {
    Vector initial;
    Matrix transition;
    Matrix emission;

    int n_hidden() const { return static_cast<int>(initial.size()); }
    int n_observed() const { return static_cast<int>(emission.cols()); }

    /// Throws ValidationError unless every distribution sums to 1 within 1e-12
    /// and all entries are non-negative.
    void validate() const;

    static HmmSpec uniform(int n_hidden, int n_observed);
};

/// Scalar Gaussian emission per hidden state.
struct GaussianEmissionSpec {
    static constexpr double variance_floor = 1e-8;

    Vector mean;
    Vector variance;

    GaussianEmissionSpec() = default;
    GaussianEmissionSpec(Vector mean, Vector variance);

    int n_hidden() const { return static_cast<int>(mean.size()); }

    /// T x n_hidden matrix of densities p(value_t | state).
    Matrix likelihoods(const Vector& values) const;
};

/// Output of forward (filtered) and forward-backward (smoothed) passes.
struct StatePosterior {
    Matrix filtered;
    Matrix smoothed;
    /// -infinity when the observations have zero probability under the model;
    /// the posterior matrices are then left empty.
    double log_likelihood = 0.0;

    bool impossible() const { return log_likelihood == -std::numeric_limits<double>::infinity(); }
};

StateSequence sample_state_path(const HmmSpec& spec, int length, std::uint64_t seed);

StateSequence emit_labels(const HmmSpec& spec, const StateSequence& hidden_path, std::uint64_t seed);

/// Emission likelihood matrix (T x n_hidden) for a discrete observation sequence.
Matrix emission_likelihoods(const HmmSpec& spec, const StateSequence& observations);

/// Scaled forward pass over precomputed emission likelihoods. Only
/// `initial` and `transition` of the chain are used.
StatePosterior forward(const HmmSpec& spec, const Matrix& likelihoods);
StatePosterior forward(const HmmSpec& spec, const StateSequence& observations);

/// Forward-backward; fills both `filtered` and `smoothed`.
StatePosterior backward_smooth(const HmmSpec& spec, const Matrix& likelihoods);
StatePosterior backward_smooth(const HmmSpec& spec, const StateSequence& observations);

/// Most probable hidden path; among equally probable paths the
/// lexicographically smallest (lowest state index first) wins.
StateSequence viterbi(const HmmSpec& spec, const StateSequence& observations);

/// One-step-ahead hidden distribution: filtered_last^T * transition.
Vector predict_next_state_probs(const HmmSpec& spec, const Vector& filtered_last);

struct BaumWelchOptions {
    int restarts = 5;
    int max_iter = 500;
    double tol = 1e-8;
    std::uint64_t seed = 0;
};

struct BaumWelchResult {
    HmmSpec spec;
    double log_likelihood = 0.0;
    /// Log-likelihood before each EM update of the winning restart, plus the final value.
    std::vector<double> trace;
    int restart = 0;
    bool converged = false;
};

/// Best-of-restarts EM. Every restart starts from random stochastic matrices
/// perturbed around the uniform model; the winner is chosen by
/// (final likelihood, lowest restart index).
BaumWelchResult baum_welch(const StateSequence& observations, int n_hidden, int n_observed,
                           const BaumWelchOptions& options = {});

/// Single EM run from a given starting point.
BaumWelchResult baum_welch_from(const StateSequence& observations, HmmSpec start, int max_iter,
                                double tol);

/// Product-chain spec for independent factorial chains. Transition and initial
/// are Kronecker products; the product state index is row-major over chains
/// (last chain fastest). The emission of the product state (s_1, ..., s_K)
/// is the product of per-chain emissions over the joint symbol
/// (o_1, ..., o_K), indexed the same way.
HmmSpec flatten_factorial(const std::vector<HmmSpec>& chains);

/// Largest product state space accepted by flatten_factorial.
inline constexpr int kMaxProductStates = 4096;

/// Stationary distribution of a row-stochastic matrix (left eigenvector).
Vector stationary_distribution(const Matrix& transition);

} // namespace hro
