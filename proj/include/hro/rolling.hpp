// Rolling-window protocol: fit a roster of models on the most recent
// training window, predict the next block of tasks, slide forward.
#pragma once

#include "hro/dataset.hpp"
#include "hro/metrics.hpp"
#include "hro/pipeline.hpp"

#include <string>
#include <vector>

namespace hro {

struct WindowPlan {
    int train_window = 500;
    int test_step = 50;
    /// Number of leading tasks to use; 0 means the whole stream.
    int total = 0;

    void validate(int stream_length) const;
    int effective_total(int stream_length) const;
    /// Number of complete test blocks after the first training window.
    int window_count(int stream_length) const;
};

enum class RosterModel { Ols, Mixture, Hro };

/// "OLS", "HRO", and "HMM" or "FHMM-MTEN" for the mixture depending on the
/// surrogate family.
std::string model_name(RosterModel model, SurrogateKind kind);

struct RollingOptions {
    WindowPlan plan;
    PipelineOptions pipeline;
    std::vector<RosterModel> roster{RosterModel::Ols, RosterModel::Mixture, RosterModel::Hro};
};

struct ModelOutcome {
    std::string name;
    MetricReport train;
    MetricReport test;
    Vector test_predictions;
};

struct WindowResult {
    /// 1-based window number.
    int index = 0;
    /// Zero-based row ranges [begin, end).
    int train_begin = 0;
    int train_end = 0;
    int test_begin = 0;
    int test_end = 0;
    std::vector<ModelOutcome> models;
    Vector test_targets;
    ScenarioFitLog selection;
    /// Empty when HRO is not on the roster.
    std::vector<HroFit> hro;
    WindowModel model;

    const ModelOutcome& outcome(const std::string& name) const;
};

/// Windows advance by test_step. The first window labels its rows against
/// its own OLS fit; later windows inherit every state already observed,
/// including those of the previous test block once its outcomes are known.
std::vector<WindowResult> run(const LabeledDataset& stream, const RollingOptions& options);

struct ModelSummary {
    std::string name;
    MetricReport pooled;
};

/// Metrics over all test blocks concatenated, per roster model.
std::vector<ModelSummary> aggregate(const std::vector<WindowResult>& results, const HitInterval& interval);

} // namespace hro
