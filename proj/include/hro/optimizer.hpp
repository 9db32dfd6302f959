// Hit-rate optimization over adjacent-scenario reconstructions.
//
// A candidate (m, j, alpha) replaces surrogate m by alpha * g_m + (1 - alpha) * g_j
// with j = m +- 1 and alpha on the grid {0, r, 2r, ..., 1}. Since the mixture
// prediction is linear in the coefficients, every candidate's predictions are an
// affine update of the current ones and a full grid sweep costs O(n) per candidate.
#pragma once

#include "hro/metrics.hpp"
#include "hro/scenario.hpp"
#include "hro/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hro {

class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double max_rate)
        : std::runtime_error(what), max_rate_(max_rate)
    {
    }
    double max_achievable_rate() const { return max_rate_; }

private:
    double max_rate_;
};

/// Expanded training rows, their targets and the per-row scenario probabilities.
struct TrainingWindow {
    Matrix features;    // n x d
    Vector targets;     // n
    Matrix assignments; // n x M

    void validate(int M, int d) const;
};

struct Candidate {
    int m = 0;
    int neighbor = 0;
    double alpha = 1.0;
};

struct FeasibilityResult {
    bool feasible = false;
    /// Best candidate among the feasible ones, or the highest-rate candidate if none is.
    Candidate best;
    ScenarioSet best_set;
    double achieved_rate = 0.0;
    double achieved_mae = 0.0;
};

/// Grid {0, r, 2r, ...} closed with 1.
std::vector<double> alpha_grid(double grid_resolution);

/// Every candidate in evaluation order: m ascending, then neighbor, then alpha.
/// A single-scenario set yields the identity candidate only.
std::vector<Candidate> enumerate_candidates(int M, double grid_resolution);

/// Searches every candidate for hit rate >= theta. Among feasible candidates the
/// lowest training MAE wins; ties go to the lexicographically smaller (m, neighbor, alpha).
FeasibilityResult feasibility_check(const ScenarioSet& set, const TrainingWindow& window, double theta,
                                    double grid_resolution, const HitInterval& interval);

/// Bisection bracket held as lo0 + width0 * numerator / 2^halvings so that the
/// sequence of midpoints is exact and reproducible.
class BisectionState {
public:
    BisectionState(double rate_lo, double rate_hi);

    double lo() const;
    double hi() const;
    double mid() const;
    double width() const;
    int halvings() const { return halvings_; }

    /// Feasible: lo <- mid. Infeasible: hi <- mid.
    void update(bool feasible);

    /// Smallest k with width0 / 2^k <= xi.
    static int iterations_needed(double rate_lo, double rate_hi, double xi);

private:
    double lo0_;
    double width0_;
    int halvings_ = 0;
    std::uint64_t lo_num_ = 0; // lo = lo0 + width0 * lo_num / 2^halvings
};

struct TraceEntry {
    double theta = 0.0;
    bool feasible = false;
    Candidate candidate;
    double achieved_rate = 0.0;
    double achieved_mae = 0.0;
};

struct HroResult {
    /// Lower end of the final bracket.
    double optimal_rate = 0.0;
    ScenarioSet final_set;
    std::vector<TraceEntry> trace;
    bool all_infeasible = false;
    double initial_rate = 0.0;
    double achieved_rate = 0.0;
    double achieved_mae = 0.0;
};

/// Bisection on the target rate. Each feasible midpoint commits its best
/// reconstruction and later checks start from the committed set.
HroResult optimize_hit_rate(const ScenarioSet& set, const TrainingWindow& window, double rate_lo, double rate_hi,
                            double xi, double grid_resolution, const HitInterval& interval);

struct FrontierPoint {
    double target_rate = 0.0;
    /// Per-scenario blend weights; 1 everywhere except the reconstructed scenario.
    Vector alpha;
    int m = 0;
    int neighbor = 0;
    double achieved_rate = 0.0;
    double achieved_mae = 0.0;
};

/// Minimum-MAE single reconstruction whose hit rate reaches `target`.
/// Throws InfeasibleError carrying the maximum achievable rate.
FrontierPoint controlled_fit(const ScenarioSet& set, const TrainingWindow& window, double target,
                             double grid_resolution, const HitInterval& interval);

struct FrontierEntry {
    double target_rate = 0.0;
    std::optional<FrontierPoint> point;
    double max_achievable_rate = 0.0;

    bool feasible() const { return point.has_value(); }
};

/// controlled_fit over a grid of targets, sorted by target ascending.
std::vector<FrontierEntry> frontier(const ScenarioSet& set, const TrainingWindow& window,
                                    std::vector<double> rate_grid, double grid_resolution,
                                    const HitInterval& interval);

} // namespace hro
