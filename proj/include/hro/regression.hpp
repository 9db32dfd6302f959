// Least squares, elastic net and multitask elastic net solvers.
//
// Penalized objectives follow
//
//   1/(2 N) sum_m ||y_m - X_m b_m||^2
//     + strength * ((1 - mix) * sum_j ||B_j.||_2 + mix * ||B||_F^2)
//
// where N is the total sample count over all tasks, B_j. is row j of the
// d x M coefficient matrix and the intercept row is never penalized. With a
// single task the row norm reduces to |b_j| and this is the usual elastic net.
#pragma once

#include "hro/types.hpp"

#include <vector>

namespace hro {

struct PenaltyConfig {
    double strength = 0.0;
    /// 0 -> pure l21 / lasso, 1 -> pure squared Frobenius / ridge.
    double mix = 0.5;
    double tol = 1e-8;
    int max_iter = 10000;
    /// Column 0 of every design is the constant feature and is left unpenalized.
    bool fit_intercept = true;

    void validate() const;
};

struct FitReport {
    /// d x M; column m holds task m's coefficients in the input column order.
    Matrix coefficients;
    std::vector<int> selected_count;
    /// Objective after every sweep; non-increasing.
    std::vector<double> objective_trace;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;

    Vector column(int m) const { return coefficients.col(m); }
};

/// Minimum-norm least squares.
Vector fit_ols(const Matrix& X, const Vector& y);

/// Single-task elastic net by cyclic coordinate descent on the residual.
FitReport fit_elastic_net(const Matrix& X, const Vector& y, const PenaltyConfig& cfg);

/// Multitask elastic net over per-task designs sharing the column layout.
///
/// Precomputes per-task Gram matrices once so that many penalty settings can
/// be solved with warm starts. Row j of B is updated by exact block
/// minimization (group soft-thresholding with a one-dimensional root solve
/// when the tasks' column norms differ).
class MultiTaskProblem {
public:
    MultiTaskProblem(const std::vector<Matrix>& X_groups, const std::vector<Vector>& Y_groups,
                     bool fit_intercept);

    FitReport solve(const PenaltyConfig& cfg, const Matrix* warm_start = nullptr) const;

    /// Objective of a full d x M coefficient matrix (intercept row ignored
    /// when fitting an intercept: it is profiled out by centering).
    double objective(const Matrix& B, const PenaltyConfig& cfg) const;

    /// Largest violation of the block optimality conditions.
    double kkt_residual(const Matrix& B, const PenaltyConfig& cfg) const;

    int tasks() const { return static_cast<int>(gram_.size()); }
    int dimension() const { return dim_; }
    int total_samples() const { return total_; }

private:
    Matrix penalized_block(const Matrix& B) const;
    Matrix full_coefficients(const Matrix& block) const;
    double smooth_part(const Matrix& block) const;
    static double penalty(const Matrix& block, const PenaltyConfig& cfg);

    bool fit_intercept_ = true;
    int dim_ = 0;
    int offset_ = 0; // 1 when column 0 is the intercept
    int total_ = 0;
    std::vector<Matrix> gram_;        // X_c^T X_c / N over penalized columns
    std::vector<Vector> corr_;        // X_c^T y_c / N
    std::vector<double> yy_;          // y_c^T y_c / (2N)
    std::vector<Vector> x_mean_;      // per-task column means (penalized columns)
    std::vector<double> y_mean_;
};

FitReport fit_mten(const std::vector<Matrix>& X_groups, const std::vector<Vector>& Y_groups,
                   const PenaltyConfig& cfg);

/// Entries with |coefficient| > threshold per column, excluding row 0 (intercept).
std::vector<int> count_selected(const Matrix& B, double threshold);

/// Default count below which a penalized surrogate is treated as underfitting.
inline constexpr int kDefaultMinSelected = 17;

inline bool is_underfit(int selected, int min_selected) { return selected < min_selected; }

/// Ridge fit on the raw D process variables with an unpenalized intercept,
/// embedded into the quadratic layout [1, x, zeros...] of length (D^2+3D+2)/2.
/// Minimizes 1/(2n)||y - b0 - X b||^2 + strength ||b||^2.
Vector fallback_fit(const Matrix& X_raw, const Vector& y, double strength = 1e-3);

} // namespace hro
