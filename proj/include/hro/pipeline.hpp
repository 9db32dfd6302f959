// Scenario surrogate fitting on one training window: residual labelling,
// per-scenario regression (OLS or multitask elastic net with fallback),
// hidden-chain learning and causal scenario probabilities.
#pragma once

#include "hro/hmm.hpp"
#include "hro/metrics.hpp"
#include "hro/optimizer.hpp"
#include "hro/regression.hpp"
#include "hro/scenario.hpp"

#include <vector>

namespace hro {

enum class SurrogateKind { Ols, Mten };

struct SurrogateOptions {
    SurrogateKind kind = SurrogateKind::Mten;
    std::vector<double> strength_grid{1e-3, 1e-2, 1e-1, 1.0};
    std::vector<double> mix_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    /// Trailing fraction of every scenario's samples held out for tuning.
    double validation_fraction = 0.2;
    int min_selected = kDefaultMinSelected;
    double selection_threshold = 1e-8;
    double fallback_strength = 1e-3;
    double tol = 1e-6;
    int max_iter = 2000;

    void validate() const;
};

struct ScenarioFitLog {
    std::vector<int> samples;
    std::vector<int> selected;
    std::vector<double> mix;
    std::vector<bool> fallback;
    double strength = 0.0;
};

struct ScenarioFit {
    ScenarioSet set;
    ScenarioFitLog log;
};

/// Fits one surrogate per scenario on expanded rows grouped by `states`.
/// Coefficients are returned over the raw expanded layout.
ScenarioFit fit_scenarios(const Matrix& features, const Vector& targets, const StateSequence& states,
                          const ResidualIntervals& intervals, const SurrogateOptions& options);

/// Interval index of every residual y - features * reference.
StateSequence label_states(const Matrix& features, const Vector& targets, const Vector& reference,
                           const ResidualIntervals& intervals);

struct PipelineOptions {
    int hidden_states = 3;
    /// Half width e of the middle residual interval [-e, e].
    double cluster_half_width = 0.2;
    HitInterval hit;
    SurrogateOptions surrogate;
    BaumWelchOptions baum_welch;
    /// Weight of the uniform distribution mixed into the learned chain.
    double smoothing = 1e-6;
    /// Scenario probabilities from the chain (true) or empirical frequencies (false).
    bool hmm_probabilities = true;
    double xi = 0.01;
    double grid_resolution = 0.05;
    double rate_hi = 1.0;

    void validate() const;
};

/// Everything learned on one training window.
struct WindowModel {
    /// Expanded-layout OLS coefficients; the residual reference and the OLS baseline.
    Vector reference;
    ScenarioSet set;
    ScenarioFitLog log;
    HmmSpec hmm;
    /// Observed states of the training rows.
    StateSequence train_states;
};

/// Scenario probabilities for rows whose observed states are `states`.
/// Row t only depends on states before t.
Matrix scenario_assignments(const WindowModel& model, const StateSequence& states, const PipelineOptions& options);

/// Fits the scenario mixture on a window. `carried` holds already-known
/// observed states for a prefix of the rows; the rest are labelled against
/// the window's own OLS reference.
WindowModel fit_window(const Matrix& features, const Vector& targets, const StateSequence& carried,
                       const PipelineOptions& options);

struct HroFit {
    HroResult result;
    double rate_lo = 0.0;
    double ols_rate = 0.0;
    double initial_rate = 0.0;
};

/// Runs the bisection from max(OLS rate, mixture rate) on the training window.
HroFit fit_hro(const WindowModel& model, const Matrix& features, const Vector& targets,
               const Matrix& assignments, const PipelineOptions& options);

} // namespace hro
