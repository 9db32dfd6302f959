// Raw task covariates -> numeric process variables -> quadratic surrogate features.
#pragma once

#include "hro/types.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace hro {

/// Number of monomials of total degree <= 2 in D variables: (D^2 + 3D + 2) / 2.
constexpr int expanded_dim(int D) { return (D * D + 3 * D + 2) / 2; }

struct CategoricalSpec {
    std::string name;
    /// First level is the reference level and encodes to all zeros.
    std::vector<std::string> levels;
};

struct FeatureSchema {
    std::vector<std::string> continuous_names;
    std::vector<CategoricalSpec> categorical_specs;

    /// Numeric process variables after dummy encoding.
    int D() const;
    /// Quadratic surrogate dimension.
    int d() const { return expanded_dim(D()); }

    void validate() const;

    /// Names of the D encoded columns, e.g. "shift=night" for an indicator.
    std::vector<std::string> encoded_names() const;
    /// Names of the d expanded columns in expand_quadratic order.
    std::vector<std::string> expanded_names() const;

    /// Schema with `count` continuous variables named x_1..x_count.
    static FeatureSchema continuous(int count);
};

using FieldValue = std::variant<double, std::string>;
using RawRecord = std::map<std::string, FieldValue, std::less<>>;

/// Continuous fields pass through; each categorical contributes levels-1
/// indicators (reference coding). Throws EncodingError on missing fields,
/// wrong value kinds or unknown levels.
Vector encode(const RawRecord& record, const FeatureSchema& schema);

/// [1, x_1..x_D, x_i x_j for j >= i in row-major upper-triangle order].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
expand_quadratic(const Eigen::MatrixBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    require(x.allFinite(), "expand_quadratic: non-finite input");
    const Eigen::Index D = x.size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(expanded_dim(static_cast<int>(D)));
    out(0) = Scalar(1);
    for (Eigen::Index i = 0; i < D; ++i) {
        out(1 + i) = x(i);
    }
    Eigen::Index k = 1 + D;
    for (Eigen::Index i = 0; i < D; ++i) {
        for (Eigen::Index j = i; j < D; ++j) {
            out(k++) = x(i) * x(j);
        }
    }
    return out;
}

/// Row-wise expand_quadratic of an n x D matrix.
Matrix expand_rows(const Matrix& X);

/// Row-wise [1, x] of an n x D matrix (the linear prefix of the expanded layout).
Matrix linear_rows(const Matrix& X);

/// Column standardization fitted on a training matrix.
struct Scaler {
    static constexpr double kMinScale = 1e-12;

    Vector mean;
    Vector scale;

    Matrix apply(const Matrix& X) const;

    /// Maps coefficients fitted on scaled columns back to the raw column space.
    /// Column 0 must be the constant feature.
    Vector unscale_coefficients(const Vector& scaled_beta) const;
};

/// Constant columns (including the leading constant feature) keep mean 0 and scale 1.
Scaler fit_scaler(const Matrix& X);

inline Matrix apply_scaler(const Scaler& scaler, const Matrix& X) { return scaler.apply(X); }

} // namespace hro
