// Acceptance report: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).
//
// Usage: acceptance [criterion numbers...]
#include "hro/experiment.hpp"
#include "hro/features.hpp"
#include "hro/hmm.hpp"
#include "hro/metrics.hpp"
#include "hro/optimizer.hpp"
#include "hro/regression.hpp"

#include "oracles.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

using namespace hro;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(HRO_SOURCE_DIR) / "configs";

struct Verdict {
    bool pass = true;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Fails the verdict when the runtime exceeds the budget.
void budget(Verdict& v, double elapsed, double limit)
{
    if (elapsed >= limit) {
        v.pass = false;
        v.detail += fmt::format("; runtime {:.1f} s exceeds {:.0f} s", elapsed, limit);
    }
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / fmt::format("hro_acceptance_{}_{}", name, ::getpid());
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

Verdict metrics_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> size(2, 50);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        std::vector<double> p(static_cast<std::size_t>(n)), a(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < p.size(); ++i) {
            a[i] = 2.0 * n01(rng);
            p[i] = a[i] + 0.3 * n01(rng);
        }
        const double lo = -0.05 - 0.3 * std::fabs(n01(rng));
        const double hi = 0.05 + 0.3 * std::fabs(n01(rng));
        const Eigen::Map<const Vector> P(p.data(), n), A(a.data(), n);
        const auto ref = oracle::metric_reference(p, a, lo, hi);
        const auto rep = report(P, A, HitInterval(lo, hi));
        for (const double diff : {rep.hr - ref.hr, rep.mae - ref.mae, rep.rmse - ref.rmse, rep.r2 - ref.r2,
                                  rep.mape_a - ref.mape_a, rep.mae_hr - ref.mae_hr, rep.rmse_hr - ref.rmse_hr}) {
            worst = std::max(worst, std::fabs(diff));
        }
    }
    Verdict v{worst <= 1e-12, fmt::format("100 instances, max deviation {:.3g}", worst)};
    budget(v, seconds_since(t0), 1.0);
    return v;
}

Verdict hmm_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    double worst_ll = 0.0, worst_marg = 0.0;
    int path_mismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int K = 1 + trial % 3;
        const int S = 1 + (trial / 3) % 3;
        const int T = 1 + trial % 6;
        const HmmSpec spec = oracle::random_spec(K, S, rng);
        const auto obs = oracle::random_observations(T, S, rng);
        const auto brute = oracle::enumerate_paths(spec, obs);
        const auto post = backward_smooth(spec, obs);
        worst_ll = std::max(worst_ll, std::fabs(std::exp(post.log_likelihood) - brute.likelihood));
        worst_marg = std::max(worst_marg, (post.smoothed - brute.marginals).cwiseAbs().maxCoeff());
        path_mismatch += viterbi(spec, obs) == brute.best ? 0 : 1;
    }
    Verdict v{worst_ll <= 1e-12 && worst_marg <= 1e-12 && path_mismatch == 0,
              fmt::format("200 cases, likelihood dev {:.3g}, marginal dev {:.3g}, viterbi mismatches {}", worst_ll,
                          worst_marg, path_mismatch)};
    budget(v, seconds_since(t0), 5.0);
    return v;
}

Verdict em_monotone()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst_drop = 0.0;
    std::size_t iterations = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto cfg = preset("baseline");
        cfg.seed = seed;
        const auto labels = generate(cfg).labels;
        const auto fit = baum_welch(labels, 3, 3, {.restarts = 1, .max_iter = 500, .tol = 1e-8, .seed = seed});
        for (std::size_t i = 1; i < fit.trace.size(); ++i) {
            worst_drop = std::max(worst_drop, fit.trace[i - 1] - fit.trace[i]);
        }
        iterations += fit.trace.size();
    }
    Verdict v{worst_drop <= 1e-10,
              fmt::format("20 samples, {} iterations, largest decrease {:.3g}", iterations, worst_drop)};
    budget(v, seconds_since(t0), 10.0);
    return v;
}

Verdict solver_correctness()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(8);
    double ols_dev = 0.0, kkt = 0.0, mten1_dev = 0.0, obj_dev = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = oracle::design(50, 20, rng);
        const Vector y = oracle::response(X, rng);
        PenaltyConfig cfg;
        cfg.strength = 0.0;
        cfg.tol = 1e-14;
        cfg.max_iter = 100000;
        ols_dev = std::max(ols_dev, (fit_elastic_net(X, y, cfg).column(0) - fit_ols(X, y)).cwiseAbs().maxCoeff());
    }
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix X = oracle::design(50, 20, rng);
        const Vector y = oracle::response(X, rng);
        PenaltyConfig cfg;
        cfg.strength = 0.01 + 0.02 * (trial % 10);
        cfg.mix = 0.1 * (trial % 11);
        kkt = std::max(kkt, fit_elastic_net(X, y, cfg).kkt_residual);
    }
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = oracle::design(40, 8, rng);
        const Vector y = oracle::response(X, rng);
        PenaltyConfig cfg;
        cfg.strength = 0.05 * (trial + 1);
        cfg.mix = 0.2 * trial;
        cfg.tol = 1e-13;
        mten1_dev = std::max(
            mten1_dev,
            (fit_elastic_net(X, y, cfg).coefficients - fit_mten({X}, {y}, cfg).coefficients).cwiseAbs().maxCoeff());
    }
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Matrix> Xs{oracle::design(30, 8, rng), oracle::design(30, 8, rng)};
        Xs[1].rightCols(8) *= 2.0;
        std::vector<Vector> Ys{oracle::response(Xs[0], rng), oracle::response(Xs[1], rng)};
        PenaltyConfig cfg;
        cfg.strength = 0.05 + 0.05 * trial;
        cfg.mix = 0.1 * trial;
        cfg.tol = 1e-12;
        const MultiTaskProblem problem(Xs, Ys, true);
        const auto fit = problem.solve(cfg);
        Matrix full = Matrix::Zero(9, 2);
        full.bottomRows(8) = oracle::mten_proximal(Xs, Ys, cfg.strength, cfg.mix, 20000);
        obj_dev = std::max(obj_dev, std::fabs(problem.objective(fit.coefficients, cfg) - problem.objective(full, cfg)));
    }
    Verdict v{ols_dev <= 1e-8 && kkt <= 1e-6 && mten1_dev <= 1e-8 && obj_dev <= 1e-6,
              fmt::format("EN(0) vs OLS {:.3g}; max KKT {:.3g} over 50; MTEN(M=1) vs EN {:.3g}; objective vs "
                          "proximal oracle {:.3g}",
                          ols_dev, kkt, mten1_dev, obj_dev)};
    budget(v, seconds_since(t0), 30.0);
    return v;
}

// Baseline training window fitted by the pipeline.
struct FittedWindow {
    WindowModel model;
    TrainingWindow window;
};

FittedWindow fitted_window(const std::string& preset_name, std::uint64_t seed)
{
    auto cfg = preset(preset_name);
    cfg.seed = seed;
    const auto data = generate(cfg);
    PipelineOptions options;
    options.surrogate.kind = SurrogateKind::Ols;
    options.baum_welch.seed = seed;
    FittedWindow f;
    const Matrix Z = expand_rows(data.X.topRows(cfg.train_len));
    const Vector y = data.y.head(cfg.train_len);
    f.model = fit_window(Z, y, {}, options);
    f.window = {Z, y, scenario_assignments(f.model, f.model.train_states, options)};
    return f;
}

Verdict bisection_contract()
{
    const HitInterval band;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto fitted = fitted_window("baseline", 3);
    int count_errors = 0, halving_errors = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const double lo = 0.6 * u(rng);
        const double hi = lo + 0.05 + (1.0 - lo - 0.05) * u(rng);
        const double xi = 0.001 + 0.05 * u(rng);
        const int expected = static_cast<int>(std::ceil(std::log2((hi - lo) / xi)));
        const auto r = optimize_hit_rate(fitted.model.set, fitted.window, lo, hi, xi, 0.05, band);
        count_errors += static_cast<int>(r.trace.size()) == expected ? 0 : 1;
        // Midpoint k sits half of bracket width k away from midpoint k-1.
        // Tolerance covers the rounding of lo + offset.
        for (std::size_t k = 1; k < r.trace.size(); ++k) {
            const double step = std::fabs(r.trace[k].theta - r.trace[k - 1].theta);
            const double expected_step = std::ldexp(hi - lo, -static_cast<int>(k) - 1);
            halving_errors += std::fabs(step - expected_step) <= 1e-14 ? 0 : 1;
        }
        BisectionState state(lo, hi);
        for (int h = 0; h < expected; ++h) {
            const double w = state.width();
            state.update(u(rng) < 0.5);
            halving_errors += state.width() == w / 2.0 ? 0 : 1;
        }
    }

    // Noiseless instance: scenario 0 is exact, every row is assigned to scenario 1.
    ScenarioSet set;
    set.intervals = ResidualIntervals::symmetric(0.2);
    const Vector truth = Eigen::Vector2d(1.0, 2.0);
    for (int m = 0; m < 3; ++m) {
        ScenarioModel model;
        model.beta = truth + Vector(Eigen::Vector2d(0.5 * m, -0.3 * m));
        model.weight = 1.0 / 3.0;
        set.models.push_back(model);
    }
    TrainingWindow window;
    window.features.resize(60, 2);
    window.assignments = Matrix::Zero(60, 3);
    window.assignments.col(1).setOnes();
    for (int i = 0; i < 60; ++i) {
        window.features(i, 0) = 1.0;
        window.features(i, 1) = -1.0 + 2.0 * i / 59.0;
    }
    window.targets = window.features * truth;
    const double xi = 0.01;
    const auto exact = optimize_hit_rate(set, window, 0.0, 1.0, xi, 0.05, band);

    return {count_errors == 0 && halving_errors == 0 && exact.optimal_rate >= 1.0 - xi,
            fmt::format("20 brackets, count mismatches {}, halving errors {}; noiseless theta {:.6f} (need >= {:.2f})",
                        count_errors, halving_errors, exact.optimal_rate, 1.0 - xi)};
}

Verdict quasi_convex()
{
    const HitInterval band;
    int violations = 0;
    std::string profile;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = fitted_window("baseline", seed);
        bool seen_infeasible = false;
        int highest = -1;
        for (int k = 0; k <= 20; ++k) {
            const bool feasible = feasibility_check(f.model.set, f.window, 0.05 * k, 0.05, band).feasible;
            violations += feasible && seen_infeasible ? 1 : 0;
            seen_infeasible = seen_infeasible || !feasible;
            highest = feasible ? k : highest;
        }
        profile += fmt::format("{}{:.2f}", profile.empty() ? "" : " ", 0.05 * highest);
    }
    return {violations == 0,
            fmt::format("10 datasets, 21 rates each, violations {}; highest feasible rate per seed: {}", violations,
                        profile)};
}

// Runs every seed of a shipped config.
std::vector<SeedOutcome> run_all(const std::string& file)
{
    const auto cfg = ExperimentConfig::load(kConfigs / file);
    std::vector<SeedOutcome> out;
    for (const auto s : cfg.seeds) {
        out.push_back(run_seed(cfg, s));
    }
    return out;
}

Verdict baseline_reproduction()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = run_all("baseline.yaml");
    double mean_hmm = 0.0;
    int order_failures = 0;
    for (const auto& o : outcomes) {
        const auto& w = o.windows.front();
        mean_hmm += w.outcome("HMM").test.hr / static_cast<double>(outcomes.size());
        order_failures += w.outcome("HRO").train.hr >= w.outcome("HMM").train.hr ? 0 : 1;
    }
    const bool in_band = std::fabs(mean_hmm - 0.716) <= 0.05;
    Verdict v{in_band && order_failures == 0,
              fmt::format("{} seeds, mean HMM test HR {:.2f}% (band 66.60..76.60%), seeds with HRO train HR < HMM "
                          "train HR: {}",
                          outcomes.size(), 100.0 * mean_hmm, order_failures)};
    budget(v, seconds_since(t0), 120.0);
    return v;
}

Verdict controlled_gap()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = run_all("controlled_1.yaml");
    double gap = 0.0, hmm = 0.0, hro = 0.0;
    for (const auto& o : outcomes) {
        const auto& w = o.windows.front();
        const double k = static_cast<double>(outcomes.size());
        hmm += w.outcome("HMM").test.hr / k;
        hro += w.outcome("HRO").test.hr / k;
        gap += (w.outcome("HRO").test.hr - w.outcome("HMM").test.hr) / k;
    }
    Verdict v{gap >= 0.03,
              fmt::format("{} seeds, mean test HR HMM {:.2f}% HRO {:.2f}%, mean gap {:+.2f} points (need >= +3)",
                          outcomes.size(), 100.0 * hmm, 100.0 * hro, 100.0 * gap)};
    budget(v, seconds_since(t0), 120.0);
    return v;
}

Verdict frontier_trend()
{
    const auto outcomes = run_all("frontier_controlled_1.yaml");
    const auto& entries = outcomes.front().frontier;
    bool rates_ok = true;
    std::string rows;
    std::vector<double> maes;
    for (const auto& e : entries) {
        if (!e.point) {
            rates_ok = false;
            rows += fmt::format(" {:.1f}%: infeasible (max {:.2f}%);", 100.0 * e.target_rate,
                                100.0 * e.max_achievable_rate);
            continue;
        }
        rates_ok = rates_ok && std::fabs(e.point->achieved_rate - e.target_rate) <= 0.015;
        maes.push_back(e.point->achieved_mae);
        rows += fmt::format(" {:.1f}%: HR {:.2f}% MAE {:.4f};", 100.0 * e.target_rate, 100.0 * e.point->achieved_rate,
                            e.point->achieved_mae);
    }
    int inversions = 0;
    bool small = true;
    for (std::size_t i = 1; i < maes.size(); ++i) {
        if (maes[i] > maes[i - 1]) {
            ++inversions;
            small = small && maes[i] - maes[i - 1] <= 0.002;
        }
    }
    const bool trend_ok = maes.size() == entries.size() && inversions <= 1 && small;
    return {rates_ok && trend_ok, fmt::format("seed {}:{} MAE inversions {}", outcomes.front().seed, rows,
                                              inversions)};
}

Verdict shift_substitute()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = ExperimentConfig::load(kConfigs / "rolling_shift.yaml");
    std::vector<SeedOutcome> outcomes;
    int ordered = 0;
    std::string hrs;
    for (const auto s : cfg.seeds) {
        outcomes.push_back(run_seed(cfg, s));
        std::map<std::string, double> hr;
        for (const auto& p : outcomes.back().pooled) {
            hr[p.name] = p.pooled.hr;
        }
        const bool ok = hr["HRO"] >= hr["FHMM-MTEN"] && hr["FHMM-MTEN"] >= hr["OLS"];
        ordered += ok ? 1 : 0;
        hrs += fmt::format(" [{:.1f}/{:.1f}/{:.1f}]", 100.0 * hr["OLS"], 100.0 * hr["FHMM-MTEN"], 100.0 * hr["HRO"]);
    }

    // Selection logs: one row per window, T = 1..10.
    const auto dir = scratch_dir("selection");
    emit_results(cfg, outcomes, dir);
    int bad_logs = 0;
    for (const auto& o : outcomes) {
        std::istringstream in(slurp(dir / fmt::format("selection_seed{}.csv", o.seed)));
        std::string line;
        std::vector<std::string> rows;
        while (std::getline(in, line)) {
            if (!line.empty() && line.front() != '#') {
                rows.push_back(line);
            }
        }
        bool ok = rows.size() == 11 && rows.front().rfind("T,strength,", 0) == 0;
        for (std::size_t t = 1; ok && t < rows.size(); ++t) {
            ok = rows[t].rfind(fmt::format("{},", t), 0) == 0;
        }
        bad_logs += ok ? 0 : 1;
    }
    fs::remove_all(dir);

    Verdict v{ordered >= 8 && bad_logs == 0,
              fmt::format("HRO >= FHMM-MTEN >= OLS pooled test HR in {}/10 seeds (need 8), OLS/FHMM-MTEN/HRO %:{}; "
                          "malformed selection logs {}",
                          ordered, hrs, bad_logs)};
    budget(v, seconds_since(t0), 300.0);
    return v;
}

Verdict determinism()
{
    int differing = 0;
    std::size_t compared = 0;
    const std::vector<std::pair<std::string, std::optional<std::uint64_t>>> runs{
        {"baseline.yaml", std::nullopt}, {"frontier_controlled_1.yaml", std::nullopt}, {"rolling_shift.yaml", 0}};
    for (const auto& [file, seed] : runs) {
        const auto a = scratch_dir("det_a");
        const auto b = scratch_dir("det_b");
        const auto ra = run_config(kConfigs / file, seed, a);
        const auto rb = run_config(kConfigs / file, seed, b);
        for (const auto& f : ra.files) {
            ++compared;
            differing += slurp(f) == slurp(b / f.filename()) ? 0 : 1;
        }
        differing += ra.files.size() == rb.files.size() ? 0 : 1;
        fs::remove_all(a);
        fs::remove_all(b);
    }
    return {differing == 0 && compared > 0,
            fmt::format("{} files from 3 configs compared byte for byte, {} differ", compared, differing)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"metric oracle exactness", metrics_oracle},
        {"HMM oracle exactness", hmm_oracle},
        {"EM monotonicity", em_monotone},
        {"solver correctness", solver_correctness},
        {"bisection contract", bisection_contract},
        {"quasi-convex feasibility structure", quasi_convex},
        {"baseline reproduction", baseline_reproduction},
        {"controlled group 1 gap", controlled_gap},
        {"frontier trend", frontier_trend},
        {"shift-stream substitute", shift_substitute},
        {"determinism", determinism},
    };
    std::vector<int> chosen;
    for (int i = 1; i < argc; ++i) {
        chosen.push_back(std::atoi(argv[i]));
    }
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int number = static_cast<int>(k) + 1;
        if (!chosen.empty() && std::find(chosen.begin(), chosen.end(), number) == chosen.end()) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, fmt::format("error: {}", e.what())};
        }
        failures += v.pass ? 0 : 1;
        fmt::print("{} criterion {:>2} ({}): {} [{:.2f} s]\n", v.pass ? "PASS" : "FAIL", number, criteria[k].first,
                   v.detail, seconds_since(t0));
        std::fflush(stdout);
    }
    return std::min(failures, 100);
}
