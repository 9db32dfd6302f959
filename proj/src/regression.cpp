#include "hro/regression.hpp"

#include "hro/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hro {

namespace {

double soft_threshold(double value, double threshold)
{
    if (value > threshold) {
        return value - threshold;
    }
    if (value < -threshold) {
        return value + threshold;
    }
    return 0.0;
}

/// Minimizes sum_m (q_m/2) u_m^2 - g_m u_m + tau ||u||_2 over u.
/// Stationarity gives u_m = g_m / (q_m + tau/rho) with rho = ||u||, so rho
/// solves sum_m (g_m / (q_m rho + tau))^2 = 1, a decreasing function of rho.
Vector block_minimizer(const Vector& g, const Vector& q, double tau)
{
    const Eigen::Index M = g.size();
    Vector u = Vector::Zero(M);
    const double gnorm = g.norm();
    if (gnorm <= tau || gnorm == 0.0) {
        return u;
    }
    if (tau == 0.0) {
        for (Eigen::Index m = 0; m < M; ++m) {
            u(m) = q(m) > 0.0 ? g(m) / q(m) : 0.0;
        }
        return u;
    }
    bool isotropic = true;
    double q_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < M; ++m) {
        if (g(m) != 0.0) {
            q_min = std::min(q_min, q(m));
            isotropic = isotropic && q(m) == q(0);
        }
    }
    if (isotropic || M == 1) {
        // Closed-form group soft threshold.
        const double qq = q_min;
        return g * ((1.0 - tau / gnorm) / qq);
    }
    auto excess = [&](double rho) {
        double s = 0.0;
        for (Eigen::Index m = 0; m < M; ++m) {
            const double r = g(m) / (q(m) * rho + tau);
            s += r * r;
        }
        return s - 1.0;
    };
    double lo = 0.0;
    double hi = gnorm / q_min;
    double rho = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double f = excess(rho);
        if (f > 0.0) {
            lo = rho;
        } else {
            hi = rho;
        }
        // Newton step, kept inside the bracket.
        double deriv = 0.0;
        for (Eigen::Index m = 0; m < M; ++m) {
            const double den = q(m) * rho + tau;
            deriv += -2.0 * g(m) * g(m) * q(m) / (den * den * den);
        }
        double next = deriv < 0.0 ? rho - f / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - rho) <= 1e-16 * std::max(1.0, rho) || hi - lo <= 1e-17 * std::max(1.0, hi)) {
            rho = next;
            break;
        }
        rho = next;
    }
    for (Eigen::Index m = 0; m < M; ++m) {
        u(m) = g(m) / (q(m) + tau / rho);
    }
    return u;
}

} // namespace

void PenaltyConfig::validate() const
{
    require(strength >= 0.0 && std::isfinite(strength), "penalty strength must be finite and >= 0");
    require(mix >= 0.0 && mix <= 1.0, "penalty mix must lie in [0, 1]");
    require(tol > 0.0, "tolerance must be positive");
    require(max_iter >= 1, "max_iter must be positive");
}

Vector fit_ols(const Matrix& X, const Vector& y)
{
    require(X.rows() > 0 && X.cols() > 0, "fit_ols: empty data");
    require(X.rows() == y.size(), "fit_ols: row count mismatch");
    return X.completeOrthogonalDecomposition().solve(y);
}

FitReport fit_elastic_net(const Matrix& X, const Vector& y, const PenaltyConfig& cfg)
{
    cfg.validate();
    require(X.rows() > 0 && X.cols() > 0, "fit_elastic_net: empty data");
    require(X.rows() == y.size(), "fit_elastic_net: row count mismatch");
    if (cfg.fit_intercept) {
        require(X.cols() >= 1 && (X.col(0).array() == 1.0).all(),
                "fit_elastic_net: column 0 must be the constant feature");
    }
    const Eigen::Index n = X.rows();
    const int offset = cfg.fit_intercept ? 1 : 0;
    const Eigen::Index p = X.cols() - offset;

    Matrix Z = X.rightCols(p);
    Vector target = y;
    RowVector x_mean = RowVector::Zero(p);
    double y_mean = 0.0;
    if (cfg.fit_intercept) {
        x_mean = Z.colwise().mean();
        Z.rowwise() -= x_mean;
        y_mean = y.mean();
        target.array() -= y_mean;
    }
    const Vector col_sq = Z.colwise().squaredNorm().transpose() / static_cast<double>(n);
    const double l1 = cfg.strength * (1.0 - cfg.mix);
    const double l2 = cfg.strength * cfg.mix;

    Vector b = Vector::Zero(p);
    Vector r = target;
    auto objective = [&]() {
        return r.squaredNorm() / (2.0 * n) + l1 * b.lpNorm<1>() + l2 * b.squaredNorm();
    };

    FitReport report;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq(j) == 0.0) {
                continue;
            }
            const double rho = Z.col(j).dot(r) / n + col_sq(j) * b(j);
            const double updated = soft_threshold(rho, l1) / (col_sq(j) + 2.0 * l2);
            const double delta = updated - b(j);
            if (delta != 0.0) {
                r.noalias() -= delta * Z.col(j);
                b(j) = updated;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        report.objective_trace.push_back(objective());
        report.iterations = iter + 1;
        if (max_delta < cfg.tol) {
            report.converged = true;
            break;
        }
    }

    report.coefficients.resize(X.cols(), 1);
    if (cfg.fit_intercept) {
        report.coefficients(0, 0) = y_mean - x_mean.dot(b);
    }
    report.coefficients.col(0).tail(p) = b;

    // KKT check on the centered problem.
    const Vector grad = Z.transpose() * r / static_cast<double>(n);
    double kkt = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (col_sq(j) == 0.0) {
            continue;
        }
        if (b(j) == 0.0) {
            kkt = std::max(kkt, std::abs(grad(j)) - l1);
        } else {
            kkt = std::max(kkt, std::abs(grad(j) - 2.0 * l2 * b(j) - l1 * (b(j) > 0 ? 1.0 : -1.0)));
        }
    }
    report.kkt_residual = std::max(0.0, kkt);
    report.selected_count = {static_cast<int>((b.array() != 0.0).count())};
    return report;
}

MultiTaskProblem::MultiTaskProblem(const std::vector<Matrix>& X_groups,
                                   const std::vector<Vector>& Y_groups, bool fit_intercept)
    : fit_intercept_(fit_intercept), offset_(fit_intercept ? 1 : 0)
{
    require(!X_groups.empty(), "fit_mten: need at least one task");
    require(X_groups.size() == Y_groups.size(), "fit_mten: task count mismatch");
    dim_ = static_cast<int>(X_groups.front().cols());
    require(dim_ > offset_, "fit_mten: no penalized columns");
    for (std::size_t m = 0; m < X_groups.size(); ++m) {
        require(X_groups[m].cols() == dim_, "fit_mten: feature dimension mismatch across tasks");
        require(X_groups[m].rows() == Y_groups[m].size(), "fit_mten: row count mismatch in a task");
        require(X_groups[m].rows() > 0, "fit_mten: empty task");
        if (fit_intercept) {
            require((X_groups[m].col(0).array() == 1.0).all(), "fit_mten: column 0 must be the constant feature");
        }
        total_ += static_cast<int>(X_groups[m].rows());
    }
    const double N = total_;
    const int p = dim_ - offset_;
    for (std::size_t m = 0; m < X_groups.size(); ++m) {
        Matrix Z = X_groups[m].rightCols(p);
        Vector y = Y_groups[m];
        Vector mean = Vector::Zero(p);
        double ymean = 0.0;
        if (fit_intercept) {
            mean = Z.colwise().mean().transpose();
            Z.rowwise() -= mean.transpose();
            ymean = y.mean();
            y.array() -= ymean;
        }
        Matrix gram(p, p);
        gram.setZero();
        gram.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), 1.0 / N);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        gram_.push_back(std::move(gram));
        corr_.push_back(Z.transpose() * y / N);
        yy_.push_back(y.squaredNorm() / (2.0 * N));
        x_mean_.push_back(std::move(mean));
        y_mean_.push_back(ymean);
    }
}

Matrix MultiTaskProblem::penalized_block(const Matrix& B) const
{
    require(B.rows() == dim_ && B.cols() == tasks(), "coefficient matrix has wrong shape");
    return B.bottomRows(dim_ - offset_);
}

Matrix MultiTaskProblem::full_coefficients(const Matrix& block) const
{
    Matrix B(dim_, tasks());
    B.bottomRows(dim_ - offset_) = block;
    if (fit_intercept_) {
        for (int m = 0; m < tasks(); ++m) {
            B(0, m) = y_mean_[static_cast<std::size_t>(m)] - x_mean_[static_cast<std::size_t>(m)].dot(block.col(m));
        }
    }
    return B;
}

double MultiTaskProblem::smooth_part(const Matrix& block) const
{
    double value = 0.0;
    for (int m = 0; m < tasks(); ++m) {
        const auto mi = static_cast<std::size_t>(m);
        const Vector b = block.col(m);
        value += 0.5 * b.dot(gram_[mi] * b) - corr_[mi].dot(b) + yy_[mi];
    }
    return value;
}

double MultiTaskProblem::penalty(const Matrix& block, const PenaltyConfig& cfg)
{
    return cfg.strength * ((1.0 - cfg.mix) * block.rowwise().norm().sum() + cfg.mix * block.squaredNorm());
}

double MultiTaskProblem::objective(const Matrix& B, const PenaltyConfig& cfg) const
{
    const Matrix block = penalized_block(B);
    return smooth_part(block) + penalty(block, cfg);
}

double MultiTaskProblem::kkt_residual(const Matrix& B, const PenaltyConfig& cfg) const
{
    const Matrix block = penalized_block(B);
    const int p = dim_ - offset_;
    const double tau = cfg.strength * (1.0 - cfg.mix);
    const double ridge = 2.0 * cfg.strength * cfg.mix;
    Matrix grad(p, tasks());
    for (int m = 0; m < tasks(); ++m) {
        const auto mi = static_cast<std::size_t>(m);
        grad.col(m) = corr_[mi] - gram_[mi] * block.col(m);
    }
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
        // Columns with no variation in any task carry no information.
        bool active_column = false;
        for (int m = 0; m < tasks(); ++m) {
            active_column = active_column || gram_[static_cast<std::size_t>(m)](j, j) > 0.0;
        }
        if (!active_column) {
            continue;
        }
        const RowVector row = block.row(j);
        const double norm = row.norm();
        if (norm == 0.0) {
            worst = std::max(worst, grad.row(j).norm() - tau);
        } else {
            const RowVector stationarity = grad.row(j) - ridge * row - (tau / norm) * row;
            worst = std::max(worst, stationarity.cwiseAbs().maxCoeff());
        }
    }
    return std::max(0.0, worst);
}

FitReport MultiTaskProblem::solve(const PenaltyConfig& cfg, const Matrix* warm_start) const
{
    cfg.validate();
    require(cfg.fit_intercept == fit_intercept_, "penalty intercept flag differs from the problem");
    const int p = dim_ - offset_;
    const int M = tasks();
    const double tau = cfg.strength * (1.0 - cfg.mix);
    const double ridge = 2.0 * cfg.strength * cfg.mix;

    Matrix block = Matrix::Zero(p, M);
    if (warm_start != nullptr) {
        block = penalized_block(*warm_start);
    }
    // q_m = G_m b_m, maintained incrementally.
    Matrix q(p, M);
    for (int m = 0; m < M; ++m) {
        q.col(m) = gram_[static_cast<std::size_t>(m)] * block.col(m);
    }

    FitReport report;
    Vector g(M);
    Vector curv(M);
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        double max_delta = 0.0;
        for (int j = 0; j < p; ++j) {
            bool any = false;
            for (int m = 0; m < M; ++m) {
                const auto mi = static_cast<std::size_t>(m);
                const double a = gram_[mi](j, j);
                curv(m) = a + ridge;
                g(m) = corr_[mi](j) - q(j, m) + a * block(j, m);
                any = any || a > 0.0;
            }
            if (!any) {
                continue;
            }
            const Vector updated = block_minimizer(g, curv, tau);
            for (int m = 0; m < M; ++m) {
                const double delta = updated(m) - block(j, m);
                if (delta != 0.0) {
                    q.col(m).noalias() += delta * gram_[static_cast<std::size_t>(m)].col(j);
                    block(j, m) = updated(m);
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
        }
        report.objective_trace.push_back(smooth_part(block) + penalty(block, cfg));
        report.iterations = iter + 1;
        if (max_delta < cfg.tol) {
            report.converged = true;
            break;
        }
    }
    report.coefficients = full_coefficients(block);
    report.kkt_residual = kkt_residual(report.coefficients, cfg);
    report.selected_count = count_selected(report.coefficients, 0.0);
    if (!fit_intercept_) {
        for (int m = 0; m < M; ++m) {
            report.selected_count[static_cast<std::size_t>(m)] = static_cast<int>((block.col(m).array() != 0.0).count());
        }
    }
    return report;
}

FitReport fit_mten(const std::vector<Matrix>& X_groups, const std::vector<Vector>& Y_groups,
                   const PenaltyConfig& cfg)
{
    return MultiTaskProblem(X_groups, Y_groups, cfg.fit_intercept).solve(cfg);
}

std::vector<int> count_selected(const Matrix& B, double threshold)
{
    require(threshold >= 0.0, "count_selected: threshold must be non-negative");
    std::vector<int> counts(static_cast<std::size_t>(B.cols()), 0);
    for (Eigen::Index m = 0; m < B.cols(); ++m) {
        for (Eigen::Index j = 1; j < B.rows(); ++j) {
            if (std::abs(B(j, m)) > threshold) {
                ++counts[static_cast<std::size_t>(m)];
            }
        }
    }
    return counts;
}

Vector fallback_fit(const Matrix& X_raw, const Vector& y, double strength)
{
    require(X_raw.rows() > 0, "fallback_fit: empty data");
    require(X_raw.rows() == y.size(), "fallback_fit: row count mismatch");
    require(strength > 0.0, "fallback_fit: ridge strength must be positive");
    const Eigen::Index n = X_raw.rows();
    const Eigen::Index D = X_raw.cols();
    const RowVector x_mean = X_raw.colwise().mean();
    const Matrix Z = X_raw.rowwise() - x_mean;
    const double y_mean = y.mean();
    const Vector yc = y.array() - y_mean;
    Matrix system = Z.transpose() * Z / static_cast<double>(n);
    system.diagonal().array() += 2.0 * strength;
    const Vector b = system.llt().solve(Z.transpose() * yc / static_cast<double>(n));

    Vector out = Vector::Zero(expanded_dim(static_cast<int>(D)));
    out(0) = y_mean - x_mean.dot(b);
    out.segment(1, D) = b;
    return out;
}

} // namespace hro
