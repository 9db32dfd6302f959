#include "hro/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hro {

int FeatureSchema::D() const
{
    int count = static_cast<int>(continuous_names.size());
    for (const auto& cat : categorical_specs) {
        count += static_cast<int>(cat.levels.size()) - 1;
    }
    return count;
}

void FeatureSchema::validate() const
{
    std::set<std::string, std::less<>> names;
    for (const auto& name : continuous_names) {
        require(!name.empty(), "schema: empty variable name");
        require(names.insert(name).second, "schema: duplicate variable '" + name + "'");
    }
    for (const auto& cat : categorical_specs) {
        require(!cat.name.empty(), "schema: empty categorical name");
        require(names.insert(cat.name).second, "schema: duplicate variable '" + cat.name + "'");
        require(!cat.levels.empty(), "schema: categorical '" + cat.name + "' has no levels");
        std::set<std::string> levels(cat.levels.begin(), cat.levels.end());
        require(levels.size() == cat.levels.size(), "schema: duplicate level in '" + cat.name + "'");
    }
    require(D() >= 1, "schema must define at least one numeric variable");
}

std::vector<std::string> FeatureSchema::encoded_names() const
{
    std::vector<std::string> out = continuous_names;
    for (const auto& cat : categorical_specs) {
        for (std::size_t l = 1; l < cat.levels.size(); ++l) {
            out.push_back(cat.name + "=" + cat.levels[l]);
        }
    }
    return out;
}

std::vector<std::string> FeatureSchema::expanded_names() const
{
    const auto base = encoded_names();
    std::vector<std::string> out{"1"};
    out.insert(out.end(), base.begin(), base.end());
    for (std::size_t i = 0; i < base.size(); ++i) {
        for (std::size_t j = i; j < base.size(); ++j) {
            out.push_back(base[i] + "*" + base[j]);
        }
    }
    return out;
}

FeatureSchema FeatureSchema::continuous(int count)
{
    FeatureSchema schema;
    for (int i = 1; i <= count; ++i) {
        schema.continuous_names.push_back("x_" + std::to_string(i));
    }
    return schema;
}

Vector encode(const RawRecord& record, const FeatureSchema& schema)
{
    Vector out(schema.D());
    Eigen::Index k = 0;
    for (const auto& name : schema.continuous_names) {
        const auto it = record.find(name);
        if (it == record.end()) {
            throw EncodingError("missing field '" + name + "'");
        }
        const double* value = std::get_if<double>(&it->second);
        if (value == nullptr) {
            throw EncodingError("field '" + name + "' must be numeric");
        }
        out(k++) = *value;
    }
    for (const auto& cat : schema.categorical_specs) {
        const auto it = record.find(cat.name);
        if (it == record.end()) {
            throw EncodingError("missing field '" + cat.name + "'");
        }
        const std::string* value = std::get_if<std::string>(&it->second);
        if (value == nullptr) {
            throw EncodingError("field '" + cat.name + "' must be a categorical level");
        }
        const auto level = std::find(cat.levels.begin(), cat.levels.end(), *value);
        if (level == cat.levels.end()) {
            throw EncodingError("unknown level '" + *value + "' for categorical '" + cat.name + "'");
        }
        const auto index = static_cast<Eigen::Index>(level - cat.levels.begin());
        const auto width = static_cast<Eigen::Index>(cat.levels.size()) - 1;
        out.segment(k, width).setZero();
        if (index > 0) {
            out(k + index - 1) = 1.0;
        }
        k += width;
    }
    return out;
}

Matrix expand_rows(const Matrix& X)
{
    Matrix out(X.rows(), expanded_dim(static_cast<int>(X.cols())));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out.row(i) = expand_quadratic(X.row(i).transpose()).transpose();
    }
    return out;
}

Matrix linear_rows(const Matrix& X)
{
    Matrix out(X.rows(), X.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(X.cols()) = X;
    return out;
}

Scaler fit_scaler(const Matrix& X)
{
    require(X.rows() > 0 && X.cols() > 0, "fit_scaler: empty matrix");
    Scaler scaler;
    scaler.mean = X.colwise().mean().transpose();
    scaler.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt((X.col(j).array() - scaler.mean(j)).square().mean());
        if (sd < Scaler::kMinScale) {
            scaler.mean(j) = 0.0;
            scaler.scale(j) = 1.0;
        } else {
            scaler.scale(j) = sd;
        }
    }
    return scaler;
}

Matrix Scaler::apply(const Matrix& X) const
{
    require(X.cols() == mean.size(), "scaler: column count mismatch");
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Vector Scaler::unscale_coefficients(const Vector& scaled_beta) const
{
    require(scaled_beta.size() == mean.size(), "scaler: coefficient length mismatch");
    Vector raw = scaled_beta.cwiseQuotient(scale);
    raw(0) = scaled_beta(0) - raw.tail(raw.size() - 1).dot(mean.tail(mean.size() - 1));
    return raw;
}

} // namespace hro
