#include "hro/simgen.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

namespace hro {

void PopulationSpec::validate() const
{
    require(std::isfinite(x_mean) && std::isfinite(slope) && std::isfinite(intercept),
            "population parameters must be finite");
    require(x_sigma > 0.0 && noise_sigma > 0.0, "population sigmas must be positive");
}

void SimConfig::validate() const
{
    hmm.validate();
    require(static_cast<int>(populations.size()) == hmm.n_observed(),
            "population count must equal the number of emitted labels");
    for (const auto& p : populations) {
        p.validate();
    }
    require(length >= 2, "simulation length must be at least 2");
    require(train_len >= 1 && train_len < length, "train length must lie in [1, length)");
    require(hit_half_width > 0.0, "hit half width must be positive");
}

HmmSpec benchmark_hmm()
{
    HmmSpec spec;
    spec.initial = Vector::Constant(3, 1.0 / 3.0);
    spec.transition.resize(3, 3);
    spec.transition << 0.40, 0.55, 0.05,
                       0.15, 0.70, 0.15,
                       0.05, 0.55, 0.40;
    spec.emission.resize(3, 3);
    spec.emission << 0.55, 0.40, 0.05,
                     0.20, 0.70, 0.10,
                     0.05, 0.40, 0.55;
    return spec;
}

LabeledDataset generate(const SimConfig& config)
{
    config.validate();
    const int n = config.length;
    LabeledDataset out;
    out.schema = FeatureSchema::continuous(1);
    out.hidden = sample_state_path(config.hmm, n, config.seed);
    out.labels = emit_labels(config.hmm, out.hidden, config.seed);
    out.t.resize(static_cast<std::size_t>(n));
    std::iota(out.t.begin(), out.t.end(), 1L);
    out.X.resize(n, 1);
    out.y.resize(n);

    // Standard draws are taken unconditionally so every purpose consumes a
    // fixed number of variates regardless of the population parameters.
    auto x_engine = make_engine(config.seed, Stream::Covariates);
    auto noise_engine = make_engine(config.seed, Stream::Noise);
    std::normal_distribution<double> n01;
    for (int i = 0; i < n; ++i) {
        const auto& pop = config.populations[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];
        const double x = pop.x_mean + pop.x_sigma * n01(x_engine);
        const double e = pop.noise_sigma * n01(noise_engine);
        out.X(i, 0) = x;
        out.y(i) = pop.slope * x + pop.intercept + e;
    }
    return out;
}

SimConfig preset(const std::string& name)
{
    SimConfig cfg;
    cfg.hmm = benchmark_hmm();
    const double noise_1 = 0.1;
    const double noise_2 = 0.2;
    cfg.populations = {
        {0.0, 0.15, 1.5, 0.5, noise_1},
        {0.0, 0.30, 1.5, 0.0, noise_1},
        {0.0, 0.20, 1.5, -0.5, noise_2},
    };
    cfg.hit_half_width = 0.2;
    if (name == "baseline") {
        return cfg;
    }
    cfg.populations[0].intercept = 0.3;
    cfg.populations[2].intercept = -0.3;
    if (name == "controlled_1") {
        return cfg;
    }
    if (name == "controlled_2") {
        cfg.hit_half_width = 0.1;
        return cfg;
    }
    throw ValidationError(fmt::format("unknown preset '{}' (expected baseline, controlled_1 or controlled_2)", name));
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& dataset, int train_len)
{
    require(train_len >= 0 && train_len < dataset.size(), "split: train length must be below the dataset length");
    return {dataset.slice(0, train_len), dataset.slice(train_len, dataset.size())};
}

ShiftStreamConfig ShiftStreamConfig::defaults()
{
    ShiftStreamConfig cfg;
    cfg.hmm.initial = Vector::Constant(3, 1.0 / 3.0);
    cfg.hmm.transition.resize(3, 3);
    cfg.hmm.transition << 0.95, 0.04, 0.01,
                          0.025, 0.95, 0.025,
                          0.01, 0.04, 0.95;
    cfg.hmm.emission.resize(3, 3);
    cfg.hmm.emission << 0.9, 0.08, 0.02,
                        0.05, 0.9, 0.05,
                        0.02, 0.08, 0.9;
    return cfg;
}

void ShiftStreamConfig::validate() const
{
    hmm.validate();
    require(static_cast<int>(offsets.size()) == hmm.n_observed(), "one offset per emitted label is required");
    require(length >= 2, "stream length must be at least 2");
    require(n_continuous >= 1, "at least one continuous covariate is required");
    for (const int levels : categorical_levels) {
        require(levels >= 2, "categorical variables need at least two levels");
    }
    require(noise_sigma > 0.0, "noise sigma must be positive");
    require(coefficient_scale >= 0.0 && quadratic_scale >= 0.0 && drift >= 0.0, "scales must be non-negative");
    require(active_quadratic_terms >= 0, "active quadratic term count must be non-negative");
    for (std::size_t i = 0; i < change_points.size(); ++i) {
        require(change_points[i] >= 1 && change_points[i] < length, "change points must lie inside the stream");
        require(i == 0 || change_points[i - 1] < change_points[i], "change points must be ascending");
    }
}

LabeledDataset generate_shift_stream(const ShiftStreamConfig& config)
{
    config.validate();
    LabeledDataset out;
    out.schema = FeatureSchema::continuous(config.n_continuous);
    for (std::size_t c = 0; c < config.categorical_levels.size(); ++c) {
        CategoricalSpec spec;
        spec.name = fmt::format("c_{}", c + 1);
        for (int l = 0; l < config.categorical_levels[c]; ++l) {
            spec.levels.push_back(fmt::format("L{}", l + 1));
        }
        out.schema.categorical_specs.push_back(spec);
    }
    const int n = config.length;
    const int D = out.schema.D();
    const int d = expanded_dim(D);
    out.hidden = sample_state_path(config.hmm, n, config.seed);
    out.labels = emit_labels(config.hmm, out.hidden, config.seed);
    out.t.resize(static_cast<std::size_t>(n));
    std::iota(out.t.begin(), out.t.end(), 1L);

    std::normal_distribution<double> n01;
    auto x_engine = make_engine(config.seed, Stream::Covariates);
    auto cat_engine = make_engine(config.seed, Stream::Categorical);
    out.X.resize(n, D);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < config.n_continuous; ++j) {
            out.X(i, j) = n01(x_engine);
        }
        int col = config.n_continuous;
        for (const int levels : config.categorical_levels) {
            std::uniform_int_distribution<int> pick(0, levels - 1);
            const int level = pick(cat_engine);
            for (int l = 1; l < levels; ++l) {
                out.X(i, col++) = level == l ? 1.0 : 0.0;
            }
        }
    }

    // Coefficients over the expanded layout: dense linear part, a few active
    // pairwise terms. Every change point adds an independent jump.
    auto drift_engine = make_engine(config.seed, Stream::Drift);
    Vector beta = Vector::Zero(d);
    for (int j = 1; j <= D; ++j) {
        beta(j) = config.coefficient_scale * n01(drift_engine);
    }
    std::uniform_int_distribution<int> quad_pick(D + 1, d - 1);
    std::vector<int> active;
    for (int k = 0; k < config.active_quadratic_terms && d > D + 1; ++k) {
        active.push_back(quad_pick(drift_engine));
    }
    for (const int j : active) {
        beta(j) += config.quadratic_scale * n01(drift_engine);
    }
    std::vector<Vector> regimes{beta};
    for (std::size_t c = 0; c < config.change_points.size(); ++c) {
        Vector next = regimes.back();
        for (int j = 1; j <= D; ++j) {
            next(j) += config.drift * config.coefficient_scale * n01(drift_engine);
        }
        for (const int j : active) {
            next(j) += config.drift * config.quadratic_scale * n01(drift_engine);
        }
        regimes.push_back(next);
    }

    auto noise_engine = make_engine(config.seed, Stream::Noise);
    out.y.resize(n);
    std::size_t regime = 0;
    for (int i = 0; i < n; ++i) {
        while (regime < config.change_points.size() && i + 1 > config.change_points[regime]) {
            ++regime;
        }
        const Vector z = expand_quadratic(out.X.row(i).transpose());
        out.y(i) = regimes[regime].dot(z) + config.offsets[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])]
                   + config.noise_sigma * n01(noise_engine);
    }
    return out;
}

} // namespace hro
