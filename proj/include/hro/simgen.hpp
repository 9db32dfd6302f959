// Seeded Monte Carlo benchmark: hidden-Markov population labels driving
// per-population linear responses, plus a drifting high-dimensional stream
// for the rolling-window harness.
#pragma once

#include "hro/dataset.hpp"
#include "hro/hmm.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hro {

struct PopulationSpec {
    double x_mean = 0.0;
    double x_sigma = 1.0;
    double slope = 1.0;
    double intercept = 0.0;
    double noise_sigma = 0.1;

    void validate() const;
};

struct SimConfig {
    HmmSpec hmm;
    std::vector<PopulationSpec> populations;
    int length = 1000;
    int train_len = 500;
    double hit_half_width = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// The benchmark's hidden chain: fixed three-state transition and emission
/// matrices with a uniform initial distribution.
HmmSpec benchmark_hmm();

/// Population of each task is its emitted label.
LabeledDataset generate(const SimConfig& config);

/// "baseline", "controlled_1" or "controlled_2".
SimConfig preset(const std::string& name);

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, int train_len);

struct ShiftStreamConfig {
    int length = 1000;
    int n_continuous = 14;
    /// Level counts of the categorical variables.
    std::vector<int> categorical_levels{2, 2};
    /// Persistent population chain; emitted label selects the population.
    HmmSpec hmm;
    /// Additive population offsets.
    std::vector<double> offsets{0.6, 0.0, -0.6};
    double coefficient_scale = 0.25;
    /// Scale of the few active pairwise interaction terms.
    double quadratic_scale = 0.2;
    int active_quadratic_terms = 6;
    double noise_sigma = 0.1;
    /// Tasks (1-based) after which the response coefficients jump.
    std::vector<int> change_points{500};
    /// Size of every coefficient jump relative to coefficient_scale. The
    /// default moves the response by roughly three noise sigmas.
    double drift = 0.3;
    std::uint64_t seed = 0;

    static ShiftStreamConfig defaults();
    void validate() const;
};

/// D = n_continuous + sum(levels - 1) covariates; response is a sparse
/// quadratic function plus the population offset, whose coefficients
/// jump at every change point.
LabeledDataset generate_shift_stream(const ShiftStreamConfig& config);

} // namespace hro
