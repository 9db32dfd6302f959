#include "hro/experiment.hpp"

#include "hro/features.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hro {

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Simulate:
        return "simulate";
    case ExperimentKind::Rolling:
        return "rolling";
    case ExperimentKind::Frontier:
        return "frontier";
    case ExperimentKind::Fit:
        return "fit";
    }
    return "unknown";
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& message)
{
    const int line = line_of(node);
    throw ParseError(fmt::format("line {}: {}", line, message), line);
}

void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed)
{
    if (!map.IsMap()) {
        fail(map, fmt::format("'{}' must be a mapping", section));
    }
    for (auto it = map.begin(); it != map.end(); ++it) {
        const auto key = it->first.as<std::string>();
        if (allowed.count(key) == 0) {
            fail(it->first, section.empty() ? fmt::format("unknown key '{}'", key)
                                            : fmt::format("unknown key '{}' in '{}'", key, section));
        }
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* what)
{
    if (!node.IsScalar()) {
        fail(node, fmt::format("'{}' expects {}", key, what));
    }
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail(node, fmt::format("'{}' expects {}, found '{}'", key, what, node.Scalar()));
    }
}

template <typename T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key, const char* what)
{
    if (!node.IsSequence()) {
        fail(node, fmt::format("'{}' expects a list of {}", key, what));
    }
    std::vector<T> out;
    for (const auto& item : node) {
        out.push_back(scalar<T>(item, key, what));
    }
    return out;
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& target, const char* what)
{
    if (const auto node = map[key]) {
        target = scalar<T>(node, key, what);
    }
}

template <typename T>
void read_list(const YAML::Node& map, const char* key, std::vector<T>& target, const char* what)
{
    if (const auto node = map[key]) {
        target = sequence<T>(node, key, what);
    }
}

// Runs a validation step and pins its message to a config line.
template <typename F>
void at_line(const YAML::Node& node, F&& step)
{
    try {
        step();
    } catch (const ValidationError& e) {
        fail(node, e.what());
    }
}

ShiftStreamConfig parse_shift_stream(const YAML::Node& node)
{
    check_keys(node, "shift_stream",
               {"length", "n_continuous", "categorical_levels", "offsets", "coefficient_scale", "quadratic_scale",
                "active_quadratic_terms", "noise_sigma", "change_points", "drift"});
    auto cfg = ShiftStreamConfig::defaults();
    read(node, "length", cfg.length, "an integer");
    read(node, "n_continuous", cfg.n_continuous, "an integer");
    read_list(node, "categorical_levels", cfg.categorical_levels, "integers");
    read_list(node, "offsets", cfg.offsets, "numbers");
    read(node, "coefficient_scale", cfg.coefficient_scale, "a number");
    read(node, "quadratic_scale", cfg.quadratic_scale, "a number");
    read(node, "active_quadratic_terms", cfg.active_quadratic_terms, "an integer");
    read(node, "noise_sigma", cfg.noise_sigma, "a number");
    read_list(node, "change_points", cfg.change_points, "integers");
    read(node, "drift", cfg.drift, "a number");
    at_line(node, [&] { cfg.validate(); });
    return cfg;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p)
{
    return p.is_absolute() ? p : base / p;
}

} // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::filesystem::path& base_dir)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        const int line = e.mark.line + 1;
        throw ParseError(fmt::format("line {}: {}", line, e.msg), line);
    }
    if (!root.IsMap()) {
        throw ParseError("config must be a mapping of keys to values", 1);
    }
    check_keys(root, "", {"kind", "seed", "seeds", "output", "data", "model", "hro", "window", "frontier"});

    ExperimentConfig cfg;
    cfg.text = text;
    cfg.hash = fnv1a_hex(text);

    const auto kind = root["kind"];
    if (!kind) {
        throw ParseError("line 1: missing key 'kind'", 1);
    }
    const auto kind_name = scalar<std::string>(kind, "kind", "a name");
    if (kind_name == "simulate") {
        cfg.kind = ExperimentKind::Simulate;
    } else if (kind_name == "rolling") {
        cfg.kind = ExperimentKind::Rolling;
    } else if (kind_name == "frontier") {
        cfg.kind = ExperimentKind::Frontier;
    } else if (kind_name == "fit") {
        cfg.kind = ExperimentKind::Fit;
    } else {
        fail(kind, fmt::format("unknown kind '{}' (expected simulate, rolling, frontier or fit)", kind_name));
    }

    if (root["seed"] && root["seeds"]) {
        fail(root["seeds"], "give either 'seed' or 'seeds', not both");
    }
    if (const auto s = root["seed"]) {
        cfg.seeds = {scalar<std::uint64_t>(s, "seed", "a non-negative integer")};
    }
    read_list(root, "seeds", cfg.seeds, "non-negative integers");
    if (cfg.seeds.empty()) {
        throw ParseError(fmt::format("line {}: the seed list is empty", root["seeds"] ? line_of(root["seeds"]) : 1),
                         root["seeds"] ? line_of(root["seeds"]) : 1);
    }
    std::string output = "results";
    read(root, "output", output, "a path");
    cfg.output = resolve(base_dir, output);

    const auto data = root["data"];
    if (!data) {
        throw ParseError("line 1: missing section 'data'", 1);
    }
    check_keys(data, "data", {"preset", "csv", "shift_stream", "categoricals", "train"});
    int sources = 0;
    if (const auto p = data["preset"]) {
        cfg.preset = scalar<std::string>(p, "preset", "a preset name");
        at_line(p, [&] { (void)hro::preset(cfg.preset); });
        ++sources;
    }
    if (const auto c = data["csv"]) {
        cfg.csv = resolve(base_dir, scalar<std::string>(c, "csv", "a path"));
        if (!std::filesystem::exists(cfg.csv)) {
            fail(c, fmt::format("task file '{}' does not exist", cfg.csv.string()));
        }
        ++sources;
    }
    if (const auto s = data["shift_stream"]) {
        cfg.shift_stream = parse_shift_stream(s);
        ++sources;
    }
    if (sources != 1) {
        fail(data, "'data' needs exactly one of 'preset', 'csv' or 'shift_stream'");
    }
    if (const auto cats = data["categoricals"]) {
        if (!cats.IsMap()) {
            fail(cats, "'categoricals' maps column names to level lists");
        }
        for (auto it = cats.begin(); it != cats.end(); ++it) {
            cfg.categoricals[it->first.as<std::string>()] =
                sequence<std::string>(it->second, it->first.as<std::string>(), "level names");
        }
    }
    read(data, "train", cfg.train_len, "an integer");

    // Defaults that depend on the experiment.
    cfg.pipeline.surrogate.kind = cfg.kind == ExperimentKind::Rolling ? SurrogateKind::Mten : SurrogateKind::Ols;
    if (!cfg.preset.empty()) {
        cfg.pipeline.hit = HitInterval::symmetric(hro::preset(cfg.preset).hit_half_width);
    }

    if (const auto model = root["model"]) {
        check_keys(model, "model",
                   {"surrogate", "hidden_states", "cluster_half_width", "hit_half_width", "probabilities",
                    "smoothing", "restarts", "max_iter", "strength_grid", "mix_grid", "min_selected",
                    "validation_fraction", "fallback_strength"});
        if (const auto s = model["surrogate"]) {
            const auto name = scalar<std::string>(s, "surrogate", "ols or mten");
            if (name == "ols") {
                cfg.pipeline.surrogate.kind = SurrogateKind::Ols;
            } else if (name == "mten") {
                cfg.pipeline.surrogate.kind = SurrogateKind::Mten;
            } else {
                fail(s, fmt::format("unknown surrogate '{}' (expected ols or mten)", name));
            }
        }
        if (const auto p = model["probabilities"]) {
            const auto name = scalar<std::string>(p, "probabilities", "hmm or empirical");
            if (name != "hmm" && name != "empirical") {
                fail(p, fmt::format("unknown probability source '{}' (expected hmm or empirical)", name));
            }
            cfg.pipeline.hmm_probabilities = name == "hmm";
        }
        if (const auto h = model["hit_half_width"]) {
            const auto e = scalar<double>(h, "hit_half_width", "a number");
            at_line(h, [&] { cfg.pipeline.hit = HitInterval::symmetric(e); });
        }
        read(model, "hidden_states", cfg.pipeline.hidden_states, "an integer");
        read(model, "cluster_half_width", cfg.pipeline.cluster_half_width, "a number");
        read(model, "smoothing", cfg.pipeline.smoothing, "a number");
        read(model, "restarts", cfg.pipeline.baum_welch.restarts, "an integer");
        read(model, "max_iter", cfg.pipeline.baum_welch.max_iter, "an integer");
        read_list(model, "strength_grid", cfg.pipeline.surrogate.strength_grid, "numbers");
        read_list(model, "mix_grid", cfg.pipeline.surrogate.mix_grid, "numbers");
        read(model, "min_selected", cfg.pipeline.surrogate.min_selected, "an integer");
        read(model, "validation_fraction", cfg.pipeline.surrogate.validation_fraction, "a number");
        read(model, "fallback_strength", cfg.pipeline.surrogate.fallback_strength, "a number");
        at_line(model, [&] { cfg.pipeline.validate(); });
    }
    if (const auto hro = root["hro"]) {
        check_keys(hro, "hro", {"xi", "grid_resolution", "rate_hi"});
        read(hro, "xi", cfg.pipeline.xi, "a number");
        read(hro, "grid_resolution", cfg.pipeline.grid_resolution, "a number");
        read(hro, "rate_hi", cfg.pipeline.rate_hi, "a number");
        at_line(hro, [&] { cfg.pipeline.validate(); });
    }
    if (const auto w = root["window"]) {
        check_keys(w, "window", {"train", "step", "total"});
        read(w, "train", cfg.plan.train_window, "an integer");
        read(w, "step", cfg.plan.test_step, "an integer");
        read(w, "total", cfg.plan.total, "an integer");
    }
    if (const auto f = root["frontier"]) {
        check_keys(f, "frontier", {"targets"});
        read_list(f, "targets", cfg.targets, "numbers");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(fmt::format("cannot open config '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str(), path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line());
    }
}

void ExperimentConfig::validate() const
{
    require(!seeds.empty(), "the seed list is empty");
    pipeline.validate();
    const bool generated = !preset.empty() || shift_stream.has_value();
    require(generated || !csv.empty(), "no data source configured");
    require(csv.empty() || std::filesystem::exists(csv), fmt::format("task file '{}' does not exist", csv.string()));
    require(train_len >= 0, "train length must be non-negative");
    switch (kind) {
    case ExperimentKind::Simulate:
        require(!preset.empty(), "simulate experiments need a preset");
        break;
    case ExperimentKind::Rolling:
        require(plan.train_window >= 2 && plan.test_step >= 1, "window sizes must be positive");
        break;
    case ExperimentKind::Frontier:
        require(!targets.empty(), "frontier experiments need at least one target rate");
        for (const double t : targets) {
            require(t >= 0.0 && t <= 1.0, "frontier targets must lie in [0, 1]");
        }
        [[fallthrough]];
    case ExperimentKind::Fit:
        require(!preset.empty() || train_len > 0, "single-split experiments on a task file need data.train");
        break;
    }
}

// ---------------------------------------------------------------------------
// Running

LabeledDataset load_data(const ExperimentConfig& config, std::uint64_t seed)
{
    if (!config.preset.empty()) {
        auto sim = preset(config.preset);
        sim.seed = seed;
        if (config.train_len > 0) {
            sim.train_len = config.train_len;
        }
        return generate(sim);
    }
    if (config.shift_stream) {
        auto stream = *config.shift_stream;
        stream.seed = seed;
        return generate_shift_stream(stream);
    }
    return ingest_csv(config.csv, config.categoricals);
}

namespace {

int split_point(const ExperimentConfig& config, const LabeledDataset& data)
{
    const int train = config.train_len > 0 ? config.train_len
                                           : (config.preset.empty() ? 0 : preset(config.preset).train_len);
    require(train >= 2 && train < data.size(),
            fmt::format("train length {} must lie in [2, {})", train, data.size()));
    return train;
}

} // namespace

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed)
{
    config.validate();
    SeedOutcome out;
    out.seed = seed;
    const LabeledDataset data = load_data(config, seed);
    RollingOptions options;
    options.pipeline = config.pipeline;
    options.pipeline.baum_welch.seed = seed;

    switch (config.kind) {
    case ExperimentKind::Simulate:
    case ExperimentKind::Fit: {
        const int train = split_point(config, data);
        options.plan = {train, data.size() - train, 0};
        out.windows = run(data, options);
        out.pooled = aggregate(out.windows, options.pipeline.hit);
        break;
    }
    case ExperimentKind::Rolling:
        options.plan = config.plan;
        out.windows = run(data, options);
        out.pooled = aggregate(out.windows, options.pipeline.hit);
        break;
    case ExperimentKind::Frontier: {
        const int train = split_point(config, data);
        const Matrix Z = expand_rows(data.X.topRows(train));
        const Vector y = data.y.head(train);
        out.frontier_model = fit_window(Z, y, {}, options.pipeline);
        const Matrix probs = scenario_assignments(*out.frontier_model, out.frontier_model->train_states,
                                                  options.pipeline);
        out.frontier = frontier(out.frontier_model->set, TrainingWindow{Z, y, probs}, config.targets,
                                options.pipeline.grid_resolution, options.pipeline.hit);
        break;
    }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Emission

const std::vector<std::string>& metric_columns()
{
    static const std::vector<std::string> columns{"HR", "MAE", "RMSE", "R2", "MAPE_a", "MAE_hr", "RMSE_hr"};
    return columns;
}

namespace {

std::string percent(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.2f}", 100.0 * v); }
std::string raw(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.6g}", v); }
// Shortest representation that reads back to the same double.
std::string exact(double v) { return fmt::format("{}", v); }

std::string header(const ExperimentConfig& config, const std::string& seeds)
{
    return fmt::format("# config_hash={} seed={}\n", config.hash, seeds);
}

std::string seed_list(const std::vector<SeedOutcome>& outcomes)
{
    std::string s;
    for (const auto& o : outcomes) {
        s += (s.empty() ? "" : ",") + std::to_string(o.seed);
    }
    return s;
}

std::string join_metric_header() { return fmt::format("{}", fmt::join(metric_columns(), ",")); }

MetricReport mean_report(const std::vector<const MetricReport*>& reports)
{
    MetricReport m;
    const double k = static_cast<double>(reports.size());
    for (const auto* r : reports) {
        m.hr += r->hr / k;
        m.mae += r->mae / k;
        m.rmse += r->rmse / k;
        m.r2 += r->r2 / k;
        m.mape_a += r->mape_a / k;
        m.mae_hr += r->mae_hr / k;
        m.rmse_hr += r->rmse_hr / k;
        m.n += r->n;
    }
    return m;
}

void emit_vector(YAML::Emitter& y, const Vector& v)
{
    y << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        y << exact(v(i));
    }
    y << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& y, const Matrix& m)
{
    y << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        emit_vector(y, m.row(i).transpose());
    }
    y << YAML::EndSeq;
}

void emit_set(YAML::Emitter& y, const ScenarioSet& set)
{
    y << YAML::BeginSeq;
    for (const auto& model : set.models) {
        y << YAML::BeginMap;
        y << YAML::Key << "weight" << YAML::Value << exact(model.weight);
        y << YAML::Key << "residual_sigma" << YAML::Value << exact(model.residual_sigma);
        y << YAML::Key << "beta" << YAML::Value;
        emit_vector(y, model.beta);
        y << YAML::EndMap;
    }
    y << YAML::EndSeq;
}

void emit_report(YAML::Emitter& y, const MetricReport& r)
{
    y << YAML::Flow << YAML::BeginMap;
    y << YAML::Key << "HR" << YAML::Value << exact(r.hr);
    y << YAML::Key << "MAE" << YAML::Value << exact(r.mae);
    y << YAML::Key << "RMSE" << YAML::Value << exact(r.rmse);
    y << YAML::Key << "R2" << YAML::Value << exact(r.r2);
    y << YAML::Key << "MAPE_a" << YAML::Value << exact(r.mape_a);
    y << YAML::Key << "MAE_hr" << YAML::Value << exact(r.mae_hr);
    y << YAML::Key << "RMSE_hr" << YAML::Value << exact(r.rmse_hr);
    y << YAML::Key << "n" << YAML::Value << static_cast<long>(r.n);
    y << YAML::EndMap;
}

void emit_model(YAML::Emitter& y, const WindowModel& model)
{
    y << YAML::Key << "hmm" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "initial" << YAML::Value;
    emit_vector(y, model.hmm.initial);
    y << YAML::Key << "transition" << YAML::Value;
    emit_matrix(y, model.hmm.transition);
    y << YAML::Key << "emission" << YAML::Value;
    emit_matrix(y, model.hmm.emission);
    y << YAML::EndMap;
    y << YAML::Key << "scenarios" << YAML::Value;
    emit_set(y, model.set);
    y << YAML::Key << "selection" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "strength" << YAML::Value << exact(model.log.strength);
    y << YAML::Key << "samples" << YAML::Value << YAML::Flow << model.log.samples;
    y << YAML::Key << "selected" << YAML::Value << YAML::Flow << model.log.selected;
    y << YAML::Key << "fallback" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const bool f : model.log.fallback) {
        y << f;
    }
    y << YAML::EndSeq << YAML::EndMap;
}

std::string run_record(const ExperimentConfig& config, const SeedOutcome& o)
{
    YAML::Emitter y;
    y << YAML::BeginMap;
    y << YAML::Key << "config_hash" << YAML::Value << config.hash;
    y << YAML::Key << "seed" << YAML::Value << o.seed;
    y << YAML::Key << "kind" << YAML::Value << to_string(config.kind);
    y << YAML::Key << "config" << YAML::Value << YAML::Literal << config.text;
    if (o.frontier_model) {
        y << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
        emit_model(y, *o.frontier_model);
        y << YAML::EndMap;
        y << YAML::Key << "frontier" << YAML::Value << YAML::BeginSeq;
        for (const auto& e : o.frontier) {
            y << YAML::Flow << YAML::BeginMap;
            y << YAML::Key << "target" << YAML::Value << exact(e.target_rate);
            y << YAML::Key << "feasible" << YAML::Value << e.feasible();
            y << YAML::Key << "max_achievable_rate" << YAML::Value << exact(e.max_achievable_rate);
            if (e.point) {
                y << YAML::Key << "scenario" << YAML::Value << e.point->m + 1;
                y << YAML::Key << "neighbor" << YAML::Value << e.point->neighbor + 1;
                y << YAML::Key << "alpha" << YAML::Value << exact(e.point->alpha(e.point->m));
                y << YAML::Key << "rate" << YAML::Value << exact(e.point->achieved_rate);
                y << YAML::Key << "mae" << YAML::Value << exact(e.point->achieved_mae);
            }
            y << YAML::EndMap;
        }
        y << YAML::EndSeq;
    }
    y << YAML::Key << "windows" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : o.windows) {
        y << YAML::BeginMap;
        y << YAML::Key << "T" << YAML::Value << w.index;
        y << YAML::Key << "train_tasks" << YAML::Value << YAML::Flow << YAML::BeginSeq << w.train_begin + 1
          << w.train_end << YAML::EndSeq;
        y << YAML::Key << "test_tasks" << YAML::Value << YAML::Flow << YAML::BeginSeq << w.test_begin + 1
          << w.test_end << YAML::EndSeq;
        emit_model(y, w.model);
        for (const auto& h : w.hro) {
            y << YAML::Key << "hro" << YAML::Value << YAML::BeginMap;
            y << YAML::Key << "rate_lo" << YAML::Value << exact(h.rate_lo);
            y << YAML::Key << "ols_rate" << YAML::Value << exact(h.ols_rate);
            y << YAML::Key << "initial_rate" << YAML::Value << exact(h.initial_rate);
            y << YAML::Key << "optimal_rate" << YAML::Value << exact(h.result.optimal_rate);
            y << YAML::Key << "achieved_rate" << YAML::Value << exact(h.result.achieved_rate);
            y << YAML::Key << "achieved_mae" << YAML::Value << exact(h.result.achieved_mae);
            y << YAML::Key << "all_infeasible" << YAML::Value << h.result.all_infeasible;
            y << YAML::Key << "trace" << YAML::Value << YAML::BeginSeq;
            for (const auto& t : h.result.trace) {
                y << YAML::Flow << YAML::BeginMap;
                y << YAML::Key << "theta" << YAML::Value << exact(t.theta);
                y << YAML::Key << "feasible" << YAML::Value << t.feasible;
                if (t.feasible) {
                    y << YAML::Key << "scenario" << YAML::Value << t.candidate.m + 1;
                    y << YAML::Key << "neighbor" << YAML::Value << t.candidate.neighbor + 1;
                    y << YAML::Key << "alpha" << YAML::Value << exact(t.candidate.alpha);
                    y << YAML::Key << "rate" << YAML::Value << exact(t.achieved_rate);
                    y << YAML::Key << "mae" << YAML::Value << exact(t.achieved_mae);
                }
                y << YAML::EndMap;
            }
            y << YAML::EndSeq;
            y << YAML::Key << "final_scenarios" << YAML::Value;
            emit_set(y, h.result.final_set);
            y << YAML::EndMap;
        }
        y << YAML::Key << "metrics" << YAML::Value << YAML::BeginMap;
        for (const auto& m : w.models) {
            y << YAML::Key << m.name << YAML::Value << YAML::BeginMap;
            y << YAML::Key << "train" << YAML::Value;
            emit_report(y, m.train);
            y << YAML::Key << "test" << YAML::Value;
            emit_report(y, m.test);
            y << YAML::EndMap;
        }
        y << YAML::EndMap;
        y << YAML::EndMap;
    }
    y << YAML::EndSeq;
    y << YAML::EndMap;
    return header(config, std::to_string(o.seed)) + y.c_str() + "\n";
}

std::string frontier_row(const FrontierEntry& e)
{
    if (!e.point) {
        return fmt::format("{},false,,,,,,{}", percent(e.target_rate), percent(e.max_achievable_rate));
    }
    const auto& p = *e.point;
    return fmt::format("{},true,{},{},{},{},{},{}", percent(e.target_rate), percent(p.achieved_rate),
                       raw(p.achieved_mae), p.m + 1, p.neighbor + 1, raw(p.alpha(p.m)),
                       percent(e.max_achievable_rate));
}

const char* kFrontierColumns = "target_HR,feasible,HR,MAE,scenario,neighbor,alpha,max_HR";

} // namespace

std::string format_metrics(const MetricReport& r)
{
    return fmt::format("{},{},{},{},{},{},{}", percent(r.hr), raw(r.mae), raw(r.rmse), raw(r.r2), percent(r.mape_a),
                       raw(r.mae_hr), raw(r.rmse_hr));
}

std::vector<std::filesystem::path> emit_results(const ExperimentConfig& config,
                                                const std::vector<SeedOutcome>& outcomes,
                                                const std::filesystem::path& out_dir)
{
    require(!outcomes.empty(), "no outcomes to emit");
    std::vector<std::filesystem::path> files;
    auto put = [&](const std::string& name, const std::string& contents) {
        const auto path = out_dir / name;
        write_atomic(path, contents);
        files.push_back(path);
    };
    const std::string all_seeds = seed_list(outcomes);

    for (const auto& o : outcomes) {
        const std::string seed = std::to_string(o.seed);
        const std::string head = header(config, seed);
        switch (config.kind) {
        case ExperimentKind::Simulate:
        case ExperimentKind::Fit: {
            std::string s = head + "model,split," + join_metric_header() + "\n";
            for (const auto& m : o.windows.front().models) {
                s += fmt::format("{},train,{}\n", m.name, format_metrics(m.train));
                s += fmt::format("{},test,{}\n", m.name, format_metrics(m.test));
            }
            put(fmt::format("metrics_seed{}.csv", seed), s);
            break;
        }
        case ExperimentKind::Rolling: {
            std::string windows = head + "T,model," + join_metric_header() + "\n";
            std::string curve = head + "T";
            for (const auto& m : o.windows.front().models) {
                curve += "," + m.name;
            }
            curve += "\n";
            std::string selection = head + "T,strength";
            const auto M = o.windows.front().selection.samples.size();
            for (std::size_t m = 1; m <= M; ++m) {
                selection += fmt::format(",samples_{0},selected_{0},mix_{0},fallback_{0}", m);
            }
            selection += "\n";
            for (const auto& w : o.windows) {
                curve += std::to_string(w.index);
                for (const auto& m : w.models) {
                    windows += fmt::format("{},{},{}\n", w.index, m.name, format_metrics(m.test));
                    curve += "," + percent(m.test.hr);
                }
                curve += "\n";
                selection += fmt::format("{},{}", w.index, raw(w.selection.strength));
                for (std::size_t m = 0; m < M; ++m) {
                    selection += fmt::format(",{},{},{},{}", w.selection.samples[m], w.selection.selected[m],
                                             raw(w.selection.mix[m]), w.selection.fallback[m] ? 1 : 0);
                }
                selection += "\n";
            }
            std::string summary = head + "model," + join_metric_header() + "\n";
            for (const auto& p : o.pooled) {
                summary += fmt::format("{},{}\n", p.name, format_metrics(p.pooled));
            }
            put(fmt::format("windows_seed{}.csv", seed), windows);
            put(fmt::format("hit_curve_seed{}.csv", seed), curve);
            put(fmt::format("selection_seed{}.csv", seed), selection);
            put(fmt::format("summary_seed{}.csv", seed), summary);
            break;
        }
        case ExperimentKind::Frontier: {
            std::string s = head + kFrontierColumns + "\n";
            for (const auto& e : o.frontier) {
                s += frontier_row(e) + "\n";
            }
            put(fmt::format("frontier_seed{}.csv", seed), s);
            break;
        }
        }
        put(fmt::format("run_seed{}.yaml", seed), run_record(config, o));
    }

    // Cross-seed tables.
    const std::string head = header(config, all_seeds);
    switch (config.kind) {
    case ExperimentKind::Simulate:
    case ExperimentKind::Fit: {
        std::string s = head + "model,split," + join_metric_header() + "\n";
        for (std::size_t k = 0; k < outcomes.front().windows.front().models.size(); ++k) {
            std::vector<const MetricReport*> train, test;
            for (const auto& o : outcomes) {
                train.push_back(&o.windows.front().models[k].train);
                test.push_back(&o.windows.front().models[k].test);
            }
            const auto& name = outcomes.front().windows.front().models[k].name;
            s += fmt::format("{},train,{}\n", name, format_metrics(mean_report(train)));
            s += fmt::format("{},test,{}\n", name, format_metrics(mean_report(test)));
        }
        put("metrics_mean.csv", s);
        break;
    }
    case ExperimentKind::Rolling: {
        std::string s = head + "seed,model," + join_metric_header() + "\n";
        for (const auto& o : outcomes) {
            for (const auto& p : o.pooled) {
                s += fmt::format("{},{},{}\n", o.seed, p.name, format_metrics(p.pooled));
            }
        }
        put("summary_all.csv", s);
        break;
    }
    case ExperimentKind::Frontier: {
        std::string s = head + "seed," + kFrontierColumns + "\n";
        for (const auto& o : outcomes) {
            for (const auto& e : o.frontier) {
                s += fmt::format("{},{}\n", o.seed, frontier_row(e));
            }
        }
        put("frontier_all.csv", s);
        break;
    }
    }
    return files;
}

RunSummary run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                      std::optional<std::filesystem::path> out_dir, std::optional<ExperimentKind> kind)
{
    ExperimentConfig config = ExperimentConfig::load(path);
    if (seed) {
        config.seeds = {*seed};
    }
    if (kind) {
        config.kind = *kind;
        config.validate();
    }
    RunSummary summary;
    summary.out_dir = out_dir ? *out_dir : config.output;
    for (const auto s : config.seeds) {
        summary.outcomes.push_back(run_seed(config, s));
    }
    summary.files = emit_results(config, summary.outcomes, summary.out_dir);
    return summary;
}

} // namespace hro
