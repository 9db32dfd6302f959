#include "hro/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <tuple>

namespace hro {

void TrainingWindow::validate(int M, int d) const
{
    require(features.rows() > 0, "training window is empty");
    require(features.rows() == targets.size() && features.rows() == assignments.rows(),
            "training window row counts differ");
    require(features.cols() == d, "training window feature width differs from the scenario set");
    require(assignments.cols() == M, "training window assignment width differs from the scenario set");
}

std::vector<double> alpha_grid(double grid_resolution)
{
    require(grid_resolution > 0.0 && grid_resolution <= 1.0, "grid resolution must lie in (0, 1]");
    std::vector<double> grid;
    const auto steps = static_cast<int>(std::floor(1.0 / grid_resolution + 1e-9));
    for (int k = 0; k <= steps; ++k) {
        grid.push_back(std::min(1.0, k * grid_resolution));
    }
    if (grid.back() < 1.0) {
        grid.push_back(1.0);
    }
    return grid;
}

std::vector<Candidate> enumerate_candidates(int M, double grid_resolution)
{
    require(M >= 1, "need at least one scenario");
    const auto grid = alpha_grid(grid_resolution);
    std::vector<Candidate> out;
    if (M == 1) {
        out.push_back({0, 0, 1.0});
        return out;
    }
    for (int m = 0; m < M; ++m) {
        for (const int j : {m - 1, m + 1}) {
            if (j < 0 || j >= M) {
                continue;
            }
            for (const double a : grid) {
                out.push_back({m, j, a});
            }
        }
    }
    return out;
}

namespace {

struct Evaluator {
    const TrainingWindow& window;
    const HitInterval& interval;
    Matrix per_scenario; // n x M
    Vector base;         // current mixture predictions

    Evaluator(const ScenarioSet& set, const TrainingWindow& w, const HitInterval& iv)
        : window(w), interval(iv), per_scenario(w.features * set.betas())
    {
        base = per_scenario.cwiseProduct(w.assignments).rowwise().sum();
    }

    std::pair<double, double> score(const Candidate& c) const
    {
        if (c.m == c.neighbor || c.alpha == 1.0) {
            return {hit_rate(base, window.targets, interval), mae(base, window.targets)};
        }
        const Vector shift = (1.0 - c.alpha)
                             * window.assignments.col(c.m).cwiseProduct(per_scenario.col(c.neighbor)
                                                                        - per_scenario.col(c.m));
        const Vector pred = base + shift;
        return {hit_rate(pred, window.targets, interval), mae(pred, window.targets)};
    }
};

bool lex_less(const Candidate& a, const Candidate& b)
{
    return std::tie(a.m, a.neighbor, a.alpha) < std::tie(b.m, b.neighbor, b.alpha);
}

ScenarioSet apply(const ScenarioSet& set, const Candidate& c)
{
    if (c.m == c.neighbor) {
        return set;
    }
    return reconstruct(set, c.m, c.neighbor, c.alpha);
}

struct Scored {
    Candidate candidate;
    double rate;
    double mae;
};

std::vector<Scored> score_all(const ScenarioSet& set, const TrainingWindow& window, double grid_resolution,
                              const HitInterval& interval)
{
    set.validate();
    window.validate(set.M(), set.dimension());
    interval.validate();
    const Evaluator eval(set, window, interval);
    std::vector<Scored> out;
    for (const auto& c : enumerate_candidates(set.M(), grid_resolution)) {
        const auto [rate, err] = eval.score(c);
        out.push_back({c, rate, err});
    }
    return out;
}

// Lower MAE first, then lexicographic candidate order.
bool better_fit(const Scored& a, const Scored& b)
{
    if (a.mae != b.mae) {
        return a.mae < b.mae;
    }
    return lex_less(a.candidate, b.candidate);
}

// Higher rate first, then the fit order.
bool better_rate(const Scored& a, const Scored& b)
{
    if (a.rate != b.rate) {
        return a.rate > b.rate;
    }
    return better_fit(a, b);
}

} // namespace

FeasibilityResult feasibility_check(const ScenarioSet& set, const TrainingWindow& window, double theta,
                                    double grid_resolution, const HitInterval& interval)
{
    require(std::isfinite(theta) && theta >= 0.0 && theta <= 1.0, "trial hit rate must lie in [0, 1]");
    const auto scored = score_all(set, window, grid_resolution, interval);
    const Scored* best_feasible = nullptr;
    const Scored* best_rate = nullptr;
    for (const auto& s : scored) {
        if (s.rate >= theta && (best_feasible == nullptr || better_fit(s, *best_feasible))) {
            best_feasible = &s;
        }
        if (best_rate == nullptr || better_rate(s, *best_rate)) {
            best_rate = &s;
        }
    }
    const Scored& pick = best_feasible != nullptr ? *best_feasible : *best_rate;
    FeasibilityResult out;
    out.feasible = best_feasible != nullptr;
    out.best = pick.candidate;
    out.best_set = apply(set, pick.candidate);
    out.achieved_rate = pick.rate;
    out.achieved_mae = pick.mae;
    return out;
}

BisectionState::BisectionState(double rate_lo, double rate_hi) : lo0_(rate_lo), width0_(rate_hi - rate_lo)
{
    require(std::isfinite(rate_lo) && std::isfinite(rate_hi), "bisection bounds must be finite");
    require(rate_lo < rate_hi, "bisection needs rate_lo < rate_hi");
}

double BisectionState::lo() const
{
    return lo0_ + width0_ * std::ldexp(static_cast<double>(lo_num_), -halvings_);
}

double BisectionState::hi() const
{
    return lo0_ + width0_ * std::ldexp(static_cast<double>(lo_num_ + 1), -halvings_);
}

double BisectionState::mid() const
{
    return lo0_ + width0_ * std::ldexp(static_cast<double>(2 * lo_num_ + 1), -(halvings_ + 1));
}

double BisectionState::width() const { return std::ldexp(width0_, -halvings_); }

void BisectionState::update(bool feasible)
{
    require(halvings_ < 62, "bisection depth exhausted");
    lo_num_ = 2 * lo_num_ + (feasible ? 1 : 0);
    ++halvings_;
}

int BisectionState::iterations_needed(double rate_lo, double rate_hi, double xi)
{
    require(xi > 0.0, "bisection tolerance must be positive");
    require(rate_lo < rate_hi, "bisection needs rate_lo < rate_hi");
    int k = 0;
    while (std::ldexp(rate_hi - rate_lo, -k) > xi) {
        ++k;
    }
    return k;
}

HroResult optimize_hit_rate(const ScenarioSet& set, const TrainingWindow& window, double rate_lo, double rate_hi,
                            double xi, double grid_resolution, const HitInterval& interval)
{
    require(rate_lo >= 0.0 && rate_hi <= 1.0, "hit-rate bounds must lie in [0, 1]");
    require(xi > 0.0, "bisection tolerance must be positive");
    set.validate();
    window.validate(set.M(), set.dimension());

    BisectionState state(rate_lo, rate_hi);
    const int iterations = BisectionState::iterations_needed(rate_lo, rate_hi, xi);

    HroResult out;
    out.final_set = set;
    {
        const Vector pred = mixture_predict_all(set, window.features, window.assignments);
        out.initial_rate = hit_rate(pred, window.targets, interval);
    }
    bool any_feasible = false;
    for (int k = 0; k < iterations; ++k) {
        const double theta = state.mid();
        const auto check = feasibility_check(out.final_set, window, theta, grid_resolution, interval);
        out.trace.push_back({theta, check.feasible, check.best, check.achieved_rate, check.achieved_mae});
        if (check.feasible) {
            any_feasible = true;
            out.final_set = check.best_set;
        }
        state.update(check.feasible);
    }
    out.optimal_rate = state.lo();
    out.all_infeasible = iterations > 0 && !any_feasible;
    const Vector pred = mixture_predict_all(out.final_set, window.features, window.assignments);
    out.achieved_rate = hit_rate(pred, window.targets, interval);
    out.achieved_mae = mae(pred, window.targets);
    return out;
}

FrontierPoint controlled_fit(const ScenarioSet& set, const TrainingWindow& window, double target,
                             double grid_resolution, const HitInterval& interval)
{
    require(std::isfinite(target), "target rate must be finite");
    const auto scored = score_all(set, window, grid_resolution, interval);
    const Scored* best = nullptr;
    double max_rate = 0.0;
    for (const auto& s : scored) {
        max_rate = std::max(max_rate, s.rate);
        if (s.rate >= target && (best == nullptr || better_fit(s, *best))) {
            best = &s;
        }
    }
    if (best == nullptr) {
        throw InfeasibleError(fmt::format("target hit rate {:.4f} exceeds the maximum achievable {:.4f}", target,
                                          max_rate),
                              max_rate);
    }
    FrontierPoint out;
    out.target_rate = target;
    out.alpha = Vector::Ones(set.M());
    out.alpha(best->candidate.m) = best->candidate.alpha;
    out.m = best->candidate.m;
    out.neighbor = best->candidate.neighbor;
    out.achieved_rate = best->rate;
    out.achieved_mae = best->mae;
    return out;
}

std::vector<FrontierEntry> frontier(const ScenarioSet& set, const TrainingWindow& window,
                                    std::vector<double> rate_grid, double grid_resolution,
                                    const HitInterval& interval)
{
    std::sort(rate_grid.begin(), rate_grid.end());
    std::vector<FrontierEntry> out;
    for (const double target : rate_grid) {
        FrontierEntry entry;
        entry.target_rate = target;
        try {
            entry.point = controlled_fit(set, window, target, grid_resolution, interval);
            entry.max_achievable_rate = entry.point->achieved_rate;
        } catch (const InfeasibleError& e) {
            entry.max_achievable_rate = e.max_achievable_rate();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace hro
