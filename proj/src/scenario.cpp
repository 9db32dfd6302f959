#include "hro/scenario.hpp"

#include "hro/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hro {

ResidualIntervals::ResidualIntervals(std::vector<double> cuts) : cuts_(std::move(cuts))
{
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
        require(std::isfinite(cuts_[i]), "interval cut points must be finite");
        if (i > 0) {
            require(cuts_[i - 1] < cuts_[i], "interval cut points must be strictly ascending");
        }
    }
}

ResidualIntervals ResidualIntervals::symmetric(double half_width)
{
    require(half_width > 0.0, "interval half width must be positive");
    return ResidualIntervals({-half_width, half_width});
}

int ResidualIntervals::assign(double residual) const
{
    const int mid = middle();
    int index = 0;
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
        // Cut k separates interval k from k + 1. Boundaries fall toward the middle.
        const bool above = static_cast<int>(k) < mid ? residual >= cuts_[k] : residual > cuts_[k];
        if (above) {
            index = static_cast<int>(k) + 1;
        }
    }
    return index;
}

Matrix ScenarioSet::betas() const
{
    Matrix out(dimension(), M());
    for (int m = 0; m < M(); ++m) {
        out.col(m) = models[static_cast<std::size_t>(m)].beta;
    }
    return out;
}

Vector ScenarioSet::weights() const
{
    Vector out(M());
    for (int m = 0; m < M(); ++m) {
        out(m) = models[static_cast<std::size_t>(m)].weight;
    }
    return out;
}

void ScenarioSet::validate() const
{
    require(M() >= 1, "scenario set needs at least one model");
    require(intervals.count() == M(), "scenario count differs from the interval partition");
    double total = 0.0;
    for (const auto& model : models) {
        require(model.beta.size() == dimension(), "scenario coefficient lengths differ");
        require(model.weight >= 0.0, "scenario weight is negative");
        require(model.residual_sigma >= ScenarioModel::kSigmaFloor, "scenario sigma below floor");
        total += model.weight;
    }
    require(std::abs(total - 1.0) <= 1e-10, "scenario weights do not sum to 1");
}

InitialClustering initial_cluster(const Matrix& X, const Vector& y, const ResidualIntervals& intervals)
{
    require(X.rows() > 0, "initial_cluster: empty data");
    InitialClustering out;
    out.ols_beta = fit_ols(X, y);
    out.residuals = y - X * out.ols_beta;
    out.labels.reserve(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out.labels.push_back(intervals.assign(out.residuals(i)));
    }
    return out;
}

Vector update_probabilities(const StateSequence& observed_states, int M)
{
    require(!observed_states.empty(), "update_probabilities: empty state sequence");
    require(M >= 1, "update_probabilities: need at least one scenario");
    Vector p = Vector::Zero(M);
    for (const int s : observed_states) {
        require(s >= 0 && s < M, "update_probabilities: state out of range");
        p(s) += 1.0;
    }
    return p / static_cast<double>(observed_states.size());
}

Vector update_probabilities(const StateSequence& observed_states, const HmmSpec& hmm)
{
    require(!observed_states.empty(), "update_probabilities: empty state sequence");
    const StatePosterior post = forward(hmm, observed_states);
    require(!post.impossible(), "update_probabilities: observed states impossible under the HMM");
    const Vector next_hidden = predict_next_state_probs(hmm, post.filtered.bottomRows(1).transpose());
    Vector p = (next_hidden.transpose() * hmm.emission).transpose();
    return p / p.sum();
}

ScenarioSet reconstruct(const ScenarioSet& set, int m, int neighbor, double alpha)
{
    require(m >= 0 && m < set.M(), "reconstruct: scenario index out of range");
    require(neighbor >= 0 && neighbor < set.M(), "reconstruct: neighbor index out of range");
    require(std::abs(m - neighbor) == 1, "reconstruct: neighbor must be adjacent");
    require(alpha >= 0.0 && alpha <= 1.0, "reconstruct: alpha must lie in [0, 1]");
    ScenarioSet out = set;
    if (alpha == 1.0) {
        return out;
    }
    auto& target = out.models[static_cast<std::size_t>(m)];
    target.beta = alpha * set.models[static_cast<std::size_t>(m)].beta
                  + (1.0 - alpha) * set.models[static_cast<std::size_t>(neighbor)].beta;
    double total = 0.0;
    for (const auto& model : out.models) {
        total += model.weight;
    }
    if (total > 0.0) {
        for (auto& model : out.models) {
            model.weight /= total;
        }
    }
    return out;
}

void MixturePredictor::validate() const
{
    require(assignments.cols() == set.M(), "assignment columns differ from scenario count");
    for (Eigen::Index t = 0; t < assignments.rows(); ++t) {
        require((assignments.row(t).array() >= 0.0).all()
                    && std::abs(assignments.row(t).sum() - 1.0) <= 1e-10,
                "assignment row is not a probability distribution");
    }
}

double mixture_predict(const MixturePredictor& predictor, const Vector& x_expanded, int t)
{
    require(t >= 0 && t < predictor.assignments.rows(), "mixture_predict: task index out of range");
    require(x_expanded.size() == predictor.set.dimension(), "mixture_predict: feature length mismatch");
    double value = 0.0;
    for (int m = 0; m < predictor.set.M(); ++m) {
        value += predictor.assignments(t, m) * predictor.set.models[static_cast<std::size_t>(m)].beta.dot(x_expanded);
    }
    return value;
}

Vector mixture_predict_all(const ScenarioSet& set, const Matrix& features, const Matrix& assignments)
{
    require(features.rows() == assignments.rows(), "mixture prediction: row count mismatch");
    require(assignments.cols() == set.M(), "mixture prediction: scenario count mismatch");
    require(features.cols() == set.dimension(), "mixture prediction: feature length mismatch");
    const Matrix per_scenario = features * set.betas();
    return per_scenario.cwiseProduct(assignments).rowwise().sum();
}

double scenario_density(double residual, const ScenarioModel& model)
{
    require(std::isfinite(residual), "scenario_density: residual must be finite");
    const double sigma = std::max(model.residual_sigma, ScenarioModel::kSigmaFloor);
    const double z = residual / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

Matrix predicted_state_probabilities(const HmmSpec& hmm, const StateSequence& observed_states)
{
    hmm.validate();
    const auto T = static_cast<Eigen::Index>(observed_states.size());
    Matrix out(T, hmm.n_observed());
    if (T == 0) {
        return out;
    }
    out.row(0) = hmm.initial.transpose() * hmm.emission;
    if (T == 1) {
        return out;
    }
    const StateSequence history(observed_states.begin(), observed_states.end() - 1);
    const StatePosterior post = forward(hmm, history);
    require(!post.impossible(), "observed states have zero probability under the HMM");
    const Matrix next_hidden = post.filtered * hmm.transition;
    out.bottomRows(T - 1) = next_hidden * hmm.emission;
    for (Eigen::Index t = 0; t < T; ++t) {
        out.row(t) /= out.row(t).sum();
    }
    return out;
}

HmmSpec smoothed(const HmmSpec& spec, double epsilon)
{
    require(epsilon >= 0.0 && epsilon < 1.0, "smoothing weight must lie in [0, 1)");
    HmmSpec out = spec;
    const double K = spec.n_hidden();
    const double S = spec.n_observed();
    out.initial = (1.0 - epsilon) * spec.initial.array() + epsilon / K;
    out.transition = (1.0 - epsilon) * spec.transition.array() + epsilon / K;
    out.emission = (1.0 - epsilon) * spec.emission.array() + epsilon / S;
    // Renormalize away round-off.
    out.initial /= out.initial.sum();
    for (Eigen::Index i = 0; i < out.transition.rows(); ++i) {
        out.transition.row(i) /= out.transition.row(i).sum();
        out.emission.row(i) /= out.emission.row(i).sum();
    }
    return out;
}

} // namespace hro
