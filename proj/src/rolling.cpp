#include "hro/rolling.hpp"

#include "hro/features.hpp"

#include <fmt/format.h>

namespace hro {

int WindowPlan::effective_total(int stream_length) const { return total == 0 ? stream_length : total; }

void WindowPlan::validate(int stream_length) const
{
    require(train_window >= 2 && test_step >= 1, "window sizes must be positive");
    require(total >= 0 && total <= stream_length,
            fmt::format("plan total {} exceeds the stream length {}", total, stream_length));
    require(train_window + test_step <= effective_total(stream_length),
            fmt::format("need at least {} tasks for one window, have {}", train_window + test_step,
                        effective_total(stream_length)));
}

int WindowPlan::window_count(int stream_length) const
{
    validate(stream_length);
    return (effective_total(stream_length) - train_window) / test_step;
}

std::string model_name(RosterModel model, SurrogateKind kind)
{
    switch (model) {
    case RosterModel::Ols:
        return "OLS";
    case RosterModel::Hro:
        return "HRO";
    case RosterModel::Mixture:
        break;
    }
    return kind == SurrogateKind::Mten ? "FHMM-MTEN" : "HMM";
}

const ModelOutcome& WindowResult::outcome(const std::string& name) const
{
    for (const auto& m : models) {
        if (m.name == name) {
            return m;
        }
    }
    throw ValidationError(fmt::format("model '{}' is not on the roster", name));
}

std::vector<WindowResult> run(const LabeledDataset& stream, const RollingOptions& options)
{
    stream.validate();
    options.pipeline.validate();
    require(!options.roster.empty(), "the roster must name at least one model");
    const auto& plan = options.plan;
    const int windows = plan.window_count(stream.size());
    const Matrix Z = expand_rows(stream.X);
    const auto& hit = options.pipeline.hit;
    const auto intervals = ResidualIntervals::symmetric(options.pipeline.cluster_half_width);

    // Observed state of every task whose outcome is already known.
    StateSequence known;
    std::vector<WindowResult> out;
    out.reserve(static_cast<std::size_t>(windows));
    for (int w = 0; w < windows; ++w) {
        WindowResult r;
        r.index = w + 1;
        r.train_begin = w * plan.test_step;
        r.train_end = r.train_begin + plan.train_window;
        r.test_begin = r.train_end;
        r.test_end = r.test_begin + plan.test_step;
        const Matrix Z_train = Z.middleRows(r.train_begin, plan.train_window);
        const Vector y_train = stream.y.segment(r.train_begin, plan.train_window);
        const Matrix Z_test = Z.middleRows(r.test_begin, plan.test_step);
        r.test_targets = stream.y.segment(r.test_begin, plan.test_step);

        const auto carry_end = std::min<std::size_t>(known.size(), static_cast<std::size_t>(r.train_end));
        const StateSequence carried(known.begin() + r.train_begin, known.begin() + static_cast<std::ptrdiff_t>(carry_end));
        r.model = fit_window(Z_train, y_train, carried, options.pipeline);
        r.selection = r.model.log;
        if (known.size() < static_cast<std::size_t>(r.train_end)) {
            known.insert(known.end(), r.model.train_states.begin() + static_cast<std::ptrdiff_t>(carried.size()),
                         r.model.train_states.end());
        }

        // Test rows see only states of tasks completed before them.
        const StateSequence test_states = label_states(Z_test, r.test_targets, r.model.reference, intervals);
        StateSequence history = r.model.train_states;
        history.insert(history.end(), test_states.begin(), test_states.end());
        const Matrix probs = scenario_assignments(r.model, history, options.pipeline);
        const Matrix train_probs = probs.topRows(plan.train_window);
        const Matrix test_probs = probs.bottomRows(plan.test_step);

        for (const RosterModel kind : options.roster) {
            ModelOutcome m;
            m.name = model_name(kind, options.pipeline.surrogate.kind);
            Vector fitted;
            switch (kind) {
            case RosterModel::Ols:
                fitted = Z_train * r.model.reference;
                m.test_predictions = Z_test * r.model.reference;
                break;
            case RosterModel::Mixture:
                fitted = mixture_predict_all(r.model.set, Z_train, train_probs);
                m.test_predictions = mixture_predict_all(r.model.set, Z_test, test_probs);
                break;
            case RosterModel::Hro: {
                r.hro.push_back(fit_hro(r.model, Z_train, y_train, train_probs, options.pipeline));
                const auto& final_set = r.hro.back().result.final_set;
                fitted = mixture_predict_all(final_set, Z_train, train_probs);
                m.test_predictions = mixture_predict_all(final_set, Z_test, test_probs);
                break;
            }
            }
            m.train = report(fitted, y_train, hit);
            m.test = report(m.test_predictions, r.test_targets, hit);
            r.models.push_back(std::move(m));
        }

        known.insert(known.end(), test_states.begin(), test_states.end());
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ModelSummary> aggregate(const std::vector<WindowResult>& results, const HitInterval& interval)
{
    require(!results.empty(), "aggregate needs at least one window");
    Eigen::Index n = 0;
    for (const auto& r : results) {
        n += r.test_targets.size();
    }
    Vector targets(n);
    Eigen::Index at = 0;
    for (const auto& r : results) {
        targets.segment(at, r.test_targets.size()) = r.test_targets;
        at += r.test_targets.size();
    }
    std::vector<ModelSummary> out;
    for (std::size_t k = 0; k < results.front().models.size(); ++k) {
        Vector pred(n);
        at = 0;
        for (const auto& r : results) {
            require(r.models.size() == results.front().models.size(), "windows disagree on the roster");
            pred.segment(at, r.test_targets.size()) = r.models[k].test_predictions;
            at += r.test_targets.size();
        }
        out.push_back({results.front().models[k].name, report(pred, targets, interval)});
    }
    return out;
}

} // namespace hro
