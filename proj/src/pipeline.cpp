#include "hro/pipeline.hpp"

#include "hro/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hro {

void SurrogateOptions::validate() const
{
    require(!strength_grid.empty() && !mix_grid.empty(), "penalty grids must be non-empty");
    for (const double s : strength_grid) {
        require(s >= 0.0, "penalty strengths must be non-negative");
    }
    for (const double m : mix_grid) {
        require(m >= 0.0 && m <= 1.0, "penalty mix values must lie in [0, 1]");
    }
    require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation fraction must lie in [0, 1)");
    require(min_selected >= 0, "minimum selected count must be non-negative");
    require(selection_threshold >= 0.0, "selection threshold must be non-negative");
    require(fallback_strength > 0.0, "fallback ridge strength must be positive");
    require(tol > 0.0 && max_iter > 0, "solver tolerance and iteration cap must be positive");
}

void PipelineOptions::validate() const
{
    require(hidden_states >= 1, "at least one hidden state is required");
    require(cluster_half_width > 0.0, "cluster half width must be positive");
    hit.validate();
    surrogate.validate();
    require(smoothing >= 0.0 && smoothing < 1.0, "smoothing must lie in [0, 1)");
    require(xi > 0.0, "bisection tolerance must be positive");
    require(grid_resolution > 0.0 && grid_resolution <= 1.0, "grid resolution must lie in (0, 1]");
    require(rate_hi > 0.0 && rate_hi <= 1.0, "upper rate bound must lie in (0, 1]");
}

namespace {

int raw_dimension(Eigen::Index d)
{
    for (int D = 0; expanded_dim(D) <= d; ++D) {
        if (expanded_dim(D) == d) {
            return D;
        }
    }
    throw ValidationError("feature width is not a quadratic expansion");
}

struct Group {
    std::vector<Eigen::Index> rows;
};

Matrix take_rows(const Matrix& A, const std::vector<Eigen::Index>& rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
    }
    return out;
}

Vector take(const Vector& v, const std::vector<Eigen::Index>& rows)
{
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = v(rows[i]);
    }
    return out;
}

double residual_sigma(const Matrix& Z, const Vector& y, const Vector& beta)
{
    if (y.size() < 2) {
        return 1.0;
    }
    const Vector r = y - Z * beta;
    const double mean = r.mean();
    const double var = (r.array() - mean).square().sum() / static_cast<double>(r.size() - 1);
    return std::max(std::sqrt(var), ScenarioModel::kSigmaFloor);
}

struct PenaltyChoice {
    double strength = 0.0;
    double mix = 0.0;
};

// Chronological validation split inside every group, full grid, warm starts
// along decreasing strength.
PenaltyChoice tune_penalty(const std::vector<Matrix>& Xs, const std::vector<Vector>& Ys,
                           const SurrogateOptions& options)
{
    std::vector<Matrix> fit_X, val_X;
    std::vector<Vector> fit_Y, val_Y;
    Eigen::Index val_total = 0;
    for (std::size_t g = 0; g < Xs.size(); ++g) {
        const Eigen::Index n = Xs[g].rows();
        Eigen::Index n_fit = static_cast<Eigen::Index>(std::ceil((1.0 - options.validation_fraction) * n));
        n_fit = std::clamp<Eigen::Index>(n_fit, 1, n);
        fit_X.push_back(Xs[g].topRows(n_fit));
        fit_Y.push_back(Ys[g].head(n_fit));
        val_X.push_back(Xs[g].bottomRows(n - n_fit));
        val_Y.push_back(Ys[g].tail(n - n_fit));
        val_total += n - n_fit;
    }
    PenaltyChoice best{options.strength_grid.front(), options.mix_grid.front()};
    if (val_total == 0) {
        return best;
    }
    std::vector<double> strengths = options.strength_grid;
    std::sort(strengths.begin(), strengths.end(), std::greater<>());
    const MultiTaskProblem problem(fit_X, fit_Y, true);
    double best_mae = std::numeric_limits<double>::infinity();
    for (const double mix : options.mix_grid) {
        Matrix warm;
        bool have_warm = false;
        for (const double strength : strengths) {
            PenaltyConfig cfg;
            cfg.strength = strength;
            cfg.mix = mix;
            cfg.tol = options.tol;
            cfg.max_iter = options.max_iter;
            const FitReport fit = problem.solve(cfg, have_warm ? &warm : nullptr);
            warm = fit.coefficients;
            have_warm = true;
            double abs_err = 0.0;
            for (std::size_t g = 0; g < val_X.size(); ++g) {
                if (val_Y[g].size() > 0) {
                    abs_err += (val_X[g] * fit.coefficients.col(static_cast<Eigen::Index>(g)) - val_Y[g])
                                   .cwiseAbs()
                                   .sum();
                }
            }
            const double err = abs_err / static_cast<double>(val_total);
            // Strict improvement keeps the earliest grid point on ties.
            if (err < best_mae) {
                best_mae = err;
                best = {strength, mix};
            }
        }
    }
    return best;
}

} // namespace

StateSequence label_states(const Matrix& features, const Vector& targets, const Vector& reference,
                           const ResidualIntervals& intervals)
{
    require(features.rows() == targets.size(), "label_states: row count mismatch");
    require(features.cols() == reference.size(), "label_states: reference length mismatch");
    const Vector r = targets - features * reference;
    StateSequence out(static_cast<std::size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        out[static_cast<std::size_t>(i)] = intervals.assign(r(i));
    }
    return out;
}

ScenarioFit fit_scenarios(const Matrix& features, const Vector& targets, const StateSequence& states,
                          const ResidualIntervals& intervals, const SurrogateOptions& options)
{
    options.validate();
    require(features.rows() > 0, "fit_scenarios: empty window");
    require(features.rows() == targets.size(), "fit_scenarios: row count mismatch");
    require(states.size() == static_cast<std::size_t>(targets.size()), "fit_scenarios: state count mismatch");
    const int M = intervals.count();
    const Eigen::Index d = features.cols();
    const int D = raw_dimension(d);

    std::vector<Group> groups(static_cast<std::size_t>(M));
    for (std::size_t i = 0; i < states.size(); ++i) {
        require(states[i] >= 0 && states[i] < M, "fit_scenarios: state out of range");
        groups[static_cast<std::size_t>(states[i])].rows.push_back(static_cast<Eigen::Index>(i));
    }

    ScenarioFit out;
    out.set.intervals = intervals;
    out.set.models.resize(static_cast<std::size_t>(M));
    auto& log = out.log;
    log.samples.assign(static_cast<std::size_t>(M), 0);
    log.selected.assign(static_cast<std::size_t>(M), 0);
    log.mix.assign(static_cast<std::size_t>(M), 0.0);
    log.fallback.assign(static_cast<std::size_t>(M), false);

    const Matrix raw = features.middleCols(1, D);
    const Vector pooled_fallback = fallback_fit(raw, targets, options.fallback_strength);

    // Scenarios too small for any fit borrow the pooled fallback.
    std::vector<int> fitted;
    for (int m = 0; m < M; ++m) {
        const auto n_m = static_cast<int>(groups[static_cast<std::size_t>(m)].rows.size());
        log.samples[static_cast<std::size_t>(m)] = n_m;
        if (n_m >= 2) {
            fitted.push_back(m);
        } else {
            out.set.models[static_cast<std::size_t>(m)].beta = pooled_fallback;
            log.fallback[static_cast<std::size_t>(m)] = true;
        }
    }

    auto fallback_for = [&](int m) {
        const auto& rows = groups[static_cast<std::size_t>(m)].rows;
        return fallback_fit(take_rows(raw, rows), take(targets, rows), options.fallback_strength);
    };

    if (options.kind == SurrogateKind::Ols) {
        for (const int m : fitted) {
            const auto& rows = groups[static_cast<std::size_t>(m)].rows;
            auto& model = out.set.models[static_cast<std::size_t>(m)];
            if (static_cast<Eigen::Index>(rows.size()) <= d) {
                model.beta = fallback_for(m);
                log.fallback[static_cast<std::size_t>(m)] = true;
            } else {
                model.beta = fit_ols(take_rows(features, rows), take(targets, rows));
            }
        }
    } else if (!fitted.empty()) {
        const Scaler scaler = fit_scaler(features);
        const Matrix scaled = scaler.apply(features);
        std::vector<Matrix> Xs;
        std::vector<Vector> Ys;
        for (const int m : fitted) {
            const auto& rows = groups[static_cast<std::size_t>(m)].rows;
            Xs.push_back(take_rows(scaled, rows));
            Ys.push_back(take(targets, rows));
        }
        const PenaltyChoice choice = tune_penalty(Xs, Ys, options);
        PenaltyConfig cfg;
        cfg.strength = choice.strength;
        cfg.mix = choice.mix;
        cfg.tol = options.tol;
        cfg.max_iter = options.max_iter;
        const FitReport fit = MultiTaskProblem(Xs, Ys, true).solve(cfg);
        const std::vector<int> counts = count_selected(fit.coefficients, options.selection_threshold);
        log.strength = choice.strength;
        for (std::size_t k = 0; k < fitted.size(); ++k) {
            const int m = fitted[k];
            auto& model = out.set.models[static_cast<std::size_t>(m)];
            log.mix[static_cast<std::size_t>(m)] = choice.mix;
            if (is_underfit(counts[k], options.min_selected)) {
                model.beta = fallback_for(m);
                log.fallback[static_cast<std::size_t>(m)] = true;
            } else {
                model.beta = scaler.unscale_coefficients(fit.coefficients.col(static_cast<Eigen::Index>(k)));
            }
        }
    }

    for (int m = 0; m < M; ++m) {
        auto& model = out.set.models[static_cast<std::size_t>(m)];
        const auto& rows = groups[static_cast<std::size_t>(m)].rows;
        log.selected[static_cast<std::size_t>(m)] = count_selected(model.beta, options.selection_threshold).front();
        model.residual_sigma = rows.size() >= 2
                                   ? residual_sigma(take_rows(features, rows), take(targets, rows), model.beta)
                                   : residual_sigma(features, targets, model.beta);
    }
    const Vector weights = update_probabilities(states, M);
    for (int m = 0; m < M; ++m) {
        out.set.models[static_cast<std::size_t>(m)].weight = weights(m);
    }
    return out;
}

Matrix scenario_assignments(const WindowModel& model, const StateSequence& states, const PipelineOptions& options)
{
    (void)options;
    return predicted_state_probabilities(model.hmm, states);
}

WindowModel fit_window(const Matrix& features, const Vector& targets, const StateSequence& carried,
                       const PipelineOptions& options)
{
    options.validate();
    require(features.rows() == targets.size(), "fit_window: row count mismatch");
    require(carried.size() <= static_cast<std::size_t>(targets.size()), "fit_window: too many carried states");
    const ResidualIntervals intervals = ResidualIntervals::symmetric(options.cluster_half_width);

    WindowModel model;
    model.reference = fit_ols(features, targets);
    const StateSequence fresh = label_states(features, targets, model.reference, intervals);
    model.train_states = carried;
    model.train_states.insert(model.train_states.end(), fresh.begin() + static_cast<std::ptrdiff_t>(carried.size()),
                              fresh.end());

    ScenarioFit fit = fit_scenarios(features, targets, model.train_states, intervals, options.surrogate);
    model.set = std::move(fit.set);
    model.log = std::move(fit.log);

    // A one-state chain reproduces the empirical frequencies.
    const int hidden = options.hmm_probabilities ? options.hidden_states : 1;
    const BaumWelchResult learned = baum_welch(model.train_states, hidden, intervals.count(), options.baum_welch);
    model.hmm = smoothed(learned.spec, options.smoothing);
    return model;
}

HroFit fit_hro(const WindowModel& model, const Matrix& features, const Vector& targets, const Matrix& assignments,
               const PipelineOptions& options)
{
    options.validate();
    HroFit out;
    const TrainingWindow window{features, targets, assignments};
    out.ols_rate = hit_rate(features * model.reference, targets, options.hit);
    out.initial_rate = hit_rate(mixture_predict_all(model.set, features, assignments), targets, options.hit);
    out.rate_lo = std::max(out.ols_rate, out.initial_rate);
    if (out.rate_lo >= options.rate_hi) {
        out.result.final_set = model.set;
        out.result.optimal_rate = out.rate_lo;
        out.result.initial_rate = out.initial_rate;
        out.result.achieved_rate = out.initial_rate;
        out.result.achieved_mae = mae(mixture_predict_all(model.set, features, assignments), targets);
        return out;
    }
    out.result = optimize_hit_rate(model.set, window, out.rate_lo, options.rate_hi, options.xi,
                                   options.grid_resolution, options.hit);
    return out;
}

} // namespace hro
