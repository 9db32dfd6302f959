// Scenario surrogate models: residual-interval clustering, observed-state
// bookkeeping, adjacent-scenario reconstruction and mixture prediction.
#pragma once

#include "hro/hmm.hpp"
#include "hro/types.hpp"

#include <vector>

namespace hro {

/// Ordered partition of the real line by ascending cut points.
///
/// A boundary value belongs to the interval on the side of the middle
/// interval, so with cuts {-10, 10} the partition is
/// (-inf, -10), [-10, 10], (10, +inf).
class ResidualIntervals {
public:
    ResidualIntervals() = default;
    explicit ResidualIntervals(std::vector<double> cuts);

    /// (-inf, -e), [-e, e], (e, +inf).
    static ResidualIntervals symmetric(double half_width);

    int count() const { return static_cast<int>(cuts_.size()) + 1; }
    int middle() const { return (count() - 1) / 2; }
    const std::vector<double>& cuts() const { return cuts_; }

    /// Index of the interval containing `residual`.
    int assign(double residual) const;

private:
    std::vector<double> cuts_;
};

struct ScenarioModel {
    static constexpr double kSigmaFloor = 1e-8;

    /// Surrogate coefficients over the expanded feature layout.
    Vector beta;
    double weight = 0.0;
    double residual_sigma = 1.0;
};

struct ScenarioSet {
    std::vector<ScenarioModel> models;
    ResidualIntervals intervals;

    int M() const { return static_cast<int>(models.size()); }
    int dimension() const { return models.empty() ? 0 : static_cast<int>(models.front().beta.size()); }

    /// d x M matrix with one surrogate per column.
    Matrix betas() const;
    Vector weights() const;

    void validate() const;
};

struct InitialClustering {
    Vector ols_beta;
    Vector residuals;
    StateSequence labels;
};

/// Fits OLS on (X, y) and labels each sample by the interval containing its residual.
InitialClustering initial_cluster(const Matrix& X, const Vector& y, const ResidualIntervals& intervals);

inline int assign_observed_state(double residual, const ResidualIntervals& intervals)
{
    return intervals.assign(residual);
}

/// Empirical state frequencies over M scenarios.
Vector update_probabilities(const StateSequence& observed_states, int M);

/// One-step-ahead observed-state distribution after filtering `observed_states`
/// through `hmm` (whose emission alphabet is the scenario index).
Vector update_probabilities(const StateSequence& observed_states, const HmmSpec& hmm);

/// Model m becomes alpha * g_m + (1 - alpha) * g_neighbor; the neighbor must be adjacent.
ScenarioSet reconstruct(const ScenarioSet& set, int m, int neighbor, double alpha);

/// Per-task scenario probabilities attached to a scenario set.
struct MixturePredictor {
    ScenarioSet set;
    /// T x M, rows are probability distributions.
    Matrix assignments;

    void validate() const;
};

double mixture_predict(const MixturePredictor& predictor, const Vector& x_expanded, int t);

/// Vectorized mixture prediction for n expanded rows with n assignment rows.
Vector mixture_predict_all(const ScenarioSet& set, const Matrix& features, const Matrix& assignments);

/// N(residual; 0, sigma^2) with sigma floored at ScenarioModel::kSigmaFloor.
double scenario_density(double residual, const ScenarioModel& model);

/// Row t is P(O_t = m | O_0..O_{t-1}) under `hmm`; row 0 uses the initial
/// distribution. Never looks at O_t itself or anything later.
Matrix predicted_state_probabilities(const HmmSpec& hmm, const StateSequence& observed_states);

/// Mixes every distribution of the chain with the uniform one by `epsilon`
/// so that no observed symbol has zero probability.
HmmSpec smoothed(const HmmSpec& spec, double epsilon);

} // namespace hro
