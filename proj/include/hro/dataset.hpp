// Chronological task stream: encoded covariates, quality values and optional
// population labels.
#pragma once

#include "hro/features.hpp"
#include "hro/types.hpp"

#include <vector>

namespace hro {

struct LabeledDataset {
    FeatureSchema schema;
    /// 1-based task index as written in the t column.
    std::vector<long> t;
    /// n x D encoded process variables.
    Matrix X;
    Vector y;
    /// Emitted population label per task (0-based), empty when unknown.
    StateSequence labels;
    /// Hidden chain state per task (0-based), empty when unknown.
    StateSequence hidden;

    int size() const { return static_cast<int>(y.size()); }
    bool has_labels() const { return !labels.empty(); }
    bool has_hidden() const { return !hidden.empty(); }

    /// Rows [begin, end) in order.
    LabeledDataset slice(int begin, int end) const;

    void validate() const;
};

/// Concatenates two datasets sharing a schema.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

} // namespace hro
