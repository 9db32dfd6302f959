#include "hro/features.hpp"
#include "hro/pipeline.hpp"
#include "hro/simgen.hpp"

#include <doctest.h>

#include <random>

using namespace hro;

namespace {

struct Toy {
    Matrix Z;
    Vector y;
    StateSequence states;
};

// Three exact lines over [1, x, x^2] with known states.
Toy toy(int n, double noise, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<int> pick(0, 2);
    const double intercepts[3] = {1.0, 0.0, -1.0};
    Matrix X(n, 1);
    Toy t;
    t.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const int s = pick(rng);
        X(i, 0) = n01(rng);
        t.y(i) = 2.0 * X(i, 0) + 0.5 * X(i, 0) * X(i, 0) + intercepts[s] + noise * n01(rng);
        t.states.push_back(s);
    }
    t.Z = expand_rows(X);
    return t;
}

PipelineOptions quick_options()
{
    PipelineOptions o;
    o.surrogate.kind = SurrogateKind::Ols;
    o.baum_welch.restarts = 2;
    o.baum_welch.max_iter = 100;
    return o;
}

} // namespace

TEST_CASE("label_states applies the interval rule to OLS residuals")
{
    const auto t = toy(60, 0.1, 1);
    const Vector ref = fit_ols(t.Z, t.y);
    const auto iv = ResidualIntervals::symmetric(0.3);
    const auto states = label_states(t.Z, t.y, ref, iv);
    const Vector r = t.y - t.Z * ref;
    REQUIRE(states.size() == 60);
    for (int i = 0; i < 60; ++i) {
        CHECK(states[static_cast<std::size_t>(i)] == iv.assign(r(i)));
    }
    CHECK_THROWS_AS(label_states(t.Z, t.y.head(10), ref, iv), ValidationError);
}

TEST_CASE("OLS surrogates recover exact scenario laws")
{
    const auto t = toy(300, 0.0, 2);
    SurrogateOptions opt;
    opt.kind = SurrogateKind::Ols;
    const auto fit = fit_scenarios(t.Z, t.y, t.states, ResidualIntervals::symmetric(0.2), opt);
    const double intercepts[3] = {1.0, 0.0, -1.0};
    for (int m = 0; m < 3; ++m) {
        const auto& beta = fit.set.models[static_cast<std::size_t>(m)].beta;
        CHECK(beta(0) == doctest::Approx(intercepts[m]).epsilon(1e-9));
        CHECK(beta(1) == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(beta(2) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(fit.set.models[static_cast<std::size_t>(m)].residual_sigma == ScenarioModel::kSigmaFloor);
        CHECK_FALSE(fit.log.fallback[static_cast<std::size_t>(m)]);
    }
    fit.set.validate();
    const Vector freq = update_probabilities(t.states, 3);
    for (int m = 0; m < 3; ++m) {
        CHECK(fit.set.models[static_cast<std::size_t>(m)].weight == freq(m));
        CHECK(fit.log.samples[static_cast<std::size_t>(m)] ==
              static_cast<int>(std::count(t.states.begin(), t.states.end(), m)));
    }
}

TEST_CASE("small and empty scenarios fall back to a linear fit")
{
    auto t = toy(80, 0.05, 3);
    // Keep scenario 0 at three rows (equal to d) and empty scenario 2.
    int kept = 0;
    for (auto& s : t.states) {
        if (s == 2) {
            s = 1;
        }
        if (s == 0 && ++kept > 3) {
            s = 1;
        }
    }
    SurrogateOptions opt;
    opt.kind = SurrogateKind::Ols;
    const auto fit = fit_scenarios(t.Z, t.y, t.states, ResidualIntervals::symmetric(0.2), opt);
    CHECK(fit.log.fallback[0]);
    CHECK_FALSE(fit.log.fallback[1]);
    CHECK(fit.log.fallback[2]);
    CHECK(fit.log.samples[2] == 0);
    CHECK(fit.set.models[0].beta(2) == 0.0);
    CHECK(fit.set.models[2].beta(2) == 0.0);
    CHECK(fit.set.models[2].weight == 0.0);
    CHECK(fit.set.models[2].beta.allFinite());
}

TEST_CASE("penalized surrogates report selection and honour the fallback threshold")
{
    auto cfg = ShiftStreamConfig::defaults();
    cfg.seed = 6;
    cfg.length = 300;
    cfg.change_points.clear();
    const auto ds = generate_shift_stream(cfg);
    const Matrix Z = expand_rows(ds.X);
    SurrogateOptions opt;
    opt.strength_grid = {1e-3, 1e-1};
    opt.mix_grid = {0.5, 1.0};
    opt.max_iter = 500;
    const auto fit = fit_scenarios(Z, ds.y, ds.labels, ResidualIntervals::symmetric(0.2), opt);
    fit.set.validate();
    CHECK(fit.set.dimension() == 153);
    for (int m = 0; m < 3; ++m) {
        const auto mm = static_cast<std::size_t>(m);
        CHECK(fit.log.fallback[mm] == (fit.log.selected[mm] < opt.min_selected));
        CHECK((fit.log.mix[mm] == 0.5 || fit.log.mix[mm] == 1.0));
    }
    CHECK((fit.log.strength == 1e-3 || fit.log.strength == 1e-1));

    opt.min_selected = 1000;
    const auto forced = fit_scenarios(Z, ds.y, ds.labels, ResidualIntervals::symmetric(0.2), opt);
    for (int m = 0; m < 3; ++m) {
        CHECK(forced.log.fallback[static_cast<std::size_t>(m)]);
        CHECK(forced.set.models[static_cast<std::size_t>(m)].beta.tail(153 - 17).isZero(0.0));
    }
}

TEST_CASE("penalized surrogates approach the truth at tiny penalty")
{
    const auto t = toy(400, 0.0, 9);
    SurrogateOptions opt;
    opt.strength_grid = {1e-7};
    opt.mix_grid = {1.0};
    opt.min_selected = 0;
    opt.tol = 1e-12;
    opt.max_iter = 20000;
    const auto fit = fit_scenarios(t.Z, t.y, t.states, ResidualIntervals::symmetric(0.2), opt);
    const double intercepts[3] = {1.0, 0.0, -1.0};
    for (int m = 0; m < 3; ++m) {
        const auto& beta = fit.set.models[static_cast<std::size_t>(m)].beta;
        CHECK(beta(0) == doctest::Approx(intercepts[m]).epsilon(1e-4));
        CHECK(beta(1) == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(beta(2) == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("fit_window keeps carried states and learns a valid chain")
{
    const auto t = toy(200, 0.1, 4);
    const auto o = quick_options();
    const StateSequence carried(t.states.begin(), t.states.begin() + 50);
    const auto model = fit_window(t.Z, t.y, carried, o);
    REQUIRE(model.train_states.size() == 200);
    CHECK(std::equal(carried.begin(), carried.end(), model.train_states.begin()));
    const auto fresh = label_states(t.Z, t.y, model.reference, model.set.intervals);
    CHECK(std::equal(fresh.begin() + 50, fresh.end(), model.train_states.begin() + 50));
    model.hmm.validate();
    CHECK(model.hmm.n_hidden() == 3);
    CHECK(model.hmm.transition.minCoeff() > 0.0);
    model.set.validate();

    StateSequence too_long(201, 0);
    CHECK_THROWS_AS(fit_window(t.Z, t.y, too_long, o), ValidationError);
}

TEST_CASE("scenario assignments are causal")
{
    const auto t = toy(200, 0.1, 5);
    const auto o = quick_options();
    const auto model = fit_window(t.Z, t.y, {}, o);
    StateSequence future = model.train_states;
    const Matrix a = scenario_assignments(model, future, o);
    REQUIRE(a.rows() == 200);
    for (int cut : {0, 37, 120, 199}) {
        StateSequence altered = future;
        for (std::size_t i = static_cast<std::size_t>(cut); i < altered.size(); ++i) {
            altered[i] = (altered[i] + 1) % 3;
        }
        const Matrix b = scenario_assignments(model, altered, o);
        CHECK(a.topRows(cut + 1) == b.topRows(cut + 1));
    }
    for (int i = 0; i < a.rows(); ++i) {
        CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("empirical probabilities mode gives constant frequencies")
{
    const auto t = toy(150, 0.1, 6);
    auto o = quick_options();
    o.hmm_probabilities = false;
    const auto model = fit_window(t.Z, t.y, {}, o);
    const Matrix a = scenario_assignments(model, model.train_states, o);
    const Vector freq = update_probabilities(model.train_states, 3);
    for (int i = 0; i < a.rows(); ++i) {
        CHECK((a.row(i).transpose() - freq).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("HRO starts from the better of OLS and the initial mixture")
{
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto cfg = preset("controlled_1");
        cfg.seed = seed;
        const auto ds = generate(cfg);
        const Matrix Z = expand_rows(ds.X.topRows(500));
        const Vector y = ds.y.head(500);
        auto o = quick_options();
        const auto model = fit_window(Z, y, {}, o);
        const Matrix a = scenario_assignments(model, model.train_states, o);
        const auto h = fit_hro(model, Z, y, a, o);
        CHECK(h.rate_lo == std::max(h.ols_rate, h.initial_rate));
        CHECK(h.result.achieved_rate >= h.initial_rate);
        CHECK(h.result.optimal_rate >= h.rate_lo);
        CHECK(hit_rate(mixture_predict_all(h.result.final_set, Z, a), y, o.hit) == h.result.achieved_rate);
        CHECK(static_cast<int>(h.result.trace.size()) ==
              BisectionState::iterations_needed(h.rate_lo, o.rate_hi, o.xi));
    }
}
