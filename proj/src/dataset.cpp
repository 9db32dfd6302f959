#include "hro/dataset.hpp"

namespace hro {

LabeledDataset LabeledDataset::slice(int begin, int end) const
{
    require(0 <= begin && begin <= end && end <= size(), "dataset slice out of range");
    LabeledDataset out;
    out.schema = schema;
    out.t.assign(t.begin() + begin, t.begin() + end);
    out.X = X.middleRows(begin, end - begin);
    out.y = y.segment(begin, end - begin);
    if (has_labels()) {
        out.labels.assign(labels.begin() + begin, labels.begin() + end);
    }
    if (has_hidden()) {
        out.hidden.assign(hidden.begin() + begin, hidden.begin() + end);
    }
    return out;
}

void LabeledDataset::validate() const
{
    schema.validate();
    require(X.rows() == y.size(), "dataset covariate and response lengths differ");
    require(X.cols() == schema.D(), "dataset width differs from the schema");
    require(t.size() == static_cast<std::size_t>(y.size()), "dataset time index length differs");
    require(labels.empty() || labels.size() == t.size(), "dataset label length differs");
    require(hidden.empty() || hidden.size() == t.size(), "dataset hidden-state length differs");
    require(X.allFinite() && y.allFinite(), "dataset contains non-finite values");
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b)
{
    require(a.X.cols() == b.X.cols(), "cannot concatenate datasets of different width");
    require(a.has_labels() == b.has_labels() && a.has_hidden() == b.has_hidden(),
            "cannot concatenate datasets with different label columns");
    LabeledDataset out;
    out.schema = a.schema;
    out.t = a.t;
    out.t.insert(out.t.end(), b.t.begin(), b.t.end());
    out.X.resize(a.X.rows() + b.X.rows(), a.X.cols());
    out.X << a.X, b.X;
    out.y.resize(a.y.size() + b.y.size());
    out.y << a.y, b.y;
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.hidden = a.hidden;
    out.hidden.insert(out.hidden.end(), b.hidden.begin(), b.hidden.end());
    return out;
}

} // namespace hro
