// Experiment configs, per-seed runs and deterministic result files.
#pragma once

#include "hro/io.hpp"
#include "hro/rolling.hpp"
#include "hro/simgen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hro {

enum class ExperimentKind { Simulate, Rolling, Frontier, Fit };

std::string to_string(ExperimentKind kind);

/// Parsed experiment description. Relative paths resolve against the
/// directory holding the config file.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path output = "results";

    // Exactly one data source is set.
    std::string preset;
    std::filesystem::path csv;
    std::optional<ShiftStreamConfig> shift_stream;

    CategoricalLevels categoricals;
    /// Leading tasks used for training in single-split experiments; 0 keeps
    /// the preset's own split.
    int train_len = 0;
    WindowPlan plan;
    PipelineOptions pipeline;
    std::vector<double> targets;

    /// Raw config text and its FNV-1a 64-bit digest in hex.
    std::string text;
    std::string hash;

    /// Throws ParseError with the offending line for malformed or unknown
    /// keys, and ValidationError for inconsistent settings.
    static ExperimentConfig parse(const std::string& text, const std::filesystem::path& base_dir);
    static ExperimentConfig load(const std::filesystem::path& path);

    void validate() const;
};

std::string fnv1a_hex(const std::string& bytes);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<WindowResult> windows;
    std::vector<ModelSummary> pooled;
    /// Frontier experiments only: the fitted training window and its scan.
    std::optional<WindowModel> frontier_model;
    std::vector<FrontierEntry> frontier;
};

/// Dataset for one seed: the generated preset or stream, or the task file.
LabeledDataset load_data(const ExperimentConfig& config, std::uint64_t seed);

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// Metric columns in table order.
const std::vector<std::string>& metric_columns();

/// One row of metric_columns(): percentages with two decimals, the rest
/// with six significant digits.
std::string format_metrics(const MetricReport& report);

/// Writes every result file for the given outcomes into `out_dir` and
/// returns their paths in write order.
std::vector<std::filesystem::path> emit_results(const ExperimentConfig& config,
                                                const std::vector<SeedOutcome>& outcomes,
                                                const std::filesystem::path& out_dir);

struct RunSummary {
    std::vector<SeedOutcome> outcomes;
    std::vector<std::filesystem::path> files;
    std::filesystem::path out_dir;
};

/// Loads, runs every seed and emits. Optional overrides replace the seed
/// list, the output directory and the experiment kind.
RunSummary run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt,
                      std::optional<std::filesystem::path> out_dir = std::nullopt,
                      std::optional<ExperimentKind> kind = std::nullopt);

} // namespace hro
