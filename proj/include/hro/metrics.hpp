// Prediction-quality metrics for hit-rate driven process modelling.
//
// Errors are always prediction - actual. The hit band is closed; the masked
// MAE/RMSE variants count only errors in the strict complement of the band,
// so the hit fraction and the masked fraction always sum to one.
#pragma once

#include "hro/types.hpp"

#include <cmath>
#include <string>

namespace hro {

struct HitInterval {
    double lower = -0.2;
    double upper = 0.2;

    HitInterval() = default;
    HitInterval(double lower_, double upper_) : lower(lower_), upper(upper_) { validate(); }

    static HitInterval symmetric(double half_width) { return {-half_width, half_width}; }

    void validate() const
    {
        require(std::isfinite(lower) && std::isfinite(upper), "hit interval bounds must be finite");
        require(lower <= upper, "hit interval lower bound exceeds upper bound");
    }

    bool contains(double error) const { return lower <= error && error <= upper; }
};

namespace detail {

template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    require(predictions.size() > 0, "metrics need at least one sample");
    require(predictions.size() == actuals.size(), "predictions and actuals differ in length");
}

} // namespace detail

/// Fraction of samples with prediction - actual inside the closed band.
template <typename A, typename B>
double hit_rate(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals,
                const HitInterval& interval)
{
    detail::check_pair(predictions, actuals);
    interval.validate();
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        if (interval.contains(predictions(i) - actuals(i))) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

template <typename A, typename B>
double mae(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    detail::check_pair(predictions, actuals);
    return (predictions.derived().array() - actuals.derived().array()).abs().mean();
}

template <typename A, typename B>
double rmse(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    detail::check_pair(predictions, actuals);
    return std::sqrt((predictions.derived().array() - actuals.derived().array()).square().mean());
}

/// 1 - SS_res / SS_tot (residual form).
template <typename A, typename B>
double r2(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    detail::check_pair(predictions, actuals);
    const double mean = actuals.mean();
    const double total = (actuals.derived().array() - mean).square().sum();
    require(total > 0.0, "r2: actuals have zero variance");
    const double residual = (predictions.derived().array() - actuals.derived().array()).square().sum();
    return 1.0 - residual / total;
}

/// Mean of |prediction - actual| / |actual| as a fraction. Zero actuals are rejected.
template <typename A, typename B>
double mape(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    detail::check_pair(predictions, actuals);
    require((actuals.derived().array() != 0.0).all(), "mape: zero actual value, use mape_a instead");
    return ((predictions.derived().array() - actuals.derived().array()) / actuals.derived().array()).abs().mean();
}

/// MAPE with denominator max(actual, 1).
template <typename A, typename B>
double mape_a(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals)
{
    detail::check_pair(predictions, actuals);
    return ((predictions.derived().array() - actuals.derived().array())
            / actuals.derived().array().max(1.0))
        .abs()
        .mean();
}

template <typename A, typename B>
double mae_masked(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals,
                  const HitInterval& interval)
{
    detail::check_pair(predictions, actuals);
    interval.validate();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        const double e = predictions(i) - actuals(i);
        if (!interval.contains(e)) {
            sum += std::abs(e);
        }
    }
    return sum / static_cast<double>(predictions.size());
}

template <typename A, typename B>
double rmse_masked(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals,
                   const HitInterval& interval)
{
    detail::check_pair(predictions, actuals);
    interval.validate();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i) {
        const double e = predictions(i) - actuals(i);
        if (!interval.contains(e)) {
            sum += e * e;
        }
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

/// All metrics for one prediction set. Fractions throughout; percent is a
/// presentation concern. `r2` is NaN when the actuals are constant.
struct MetricReport {
    double hr = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    double mape = 0.0;
    double mape_a = 0.0;
    double mae_hr = 0.0;
    double rmse_hr = 0.0;
    HitInterval interval;
    Eigen::Index n = 0;
};

/// `mape` is NaN when any actual is zero; `r2` is NaN for constant actuals.
template <typename A, typename B>
MetricReport report(const Eigen::MatrixBase<A>& predictions, const Eigen::MatrixBase<B>& actuals,
                    const HitInterval& interval)
{
    detail::check_pair(predictions, actuals);
    MetricReport out;
    out.interval = interval;
    out.n = predictions.size();
    out.hr = hit_rate(predictions, actuals, interval);
    out.mae = hro::mae(predictions, actuals);
    out.rmse = hro::rmse(predictions, actuals);
    const double mean = actuals.mean();
    out.r2 = (actuals.derived().array() - mean).square().sum() > 0.0 ? hro::r2(predictions, actuals)
                                                                      : std::nan("");
    out.mape = (actuals.derived().array() != 0.0).all() ? hro::mape(predictions, actuals) : std::nan("");
    out.mape_a = hro::mape_a(predictions, actuals);
    out.mae_hr = hro::mae_masked(predictions, actuals, interval);
    out.rmse_hr = hro::rmse_masked(predictions, actuals, interval);
    return out;
}

} // namespace hro
