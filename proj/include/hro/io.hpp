// Task stream CSV: `t,<process variables>,y[,label][,hidden]`, one task per
// line, '#' comment lines ignored. Labels and hidden states are 1-based in
// files and 0-based in memory.
#pragma once

#include "hro/dataset.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hro {

/// Declared categorical columns by name; every other process column is numeric.
using CategoricalLevels = std::map<std::string, std::vector<std::string>>;

/// Parses a task stream. Errors carry the 1-based line and name the column
/// (and the level, for unknown categorical values).
LabeledDataset parse_csv(std::istream& in, const CategoricalLevels& categoricals = {});

LabeledDataset ingest_csv(const std::filesystem::path& path, const CategoricalLevels& categoricals = {});

/// Writes numbers in shortest round-trip form so parse_csv restores them bit for bit.
void write_csv(std::ostream& out, const LabeledDataset& dataset);

/// Categorical columns of a schema in the form parse_csv expects.
CategoricalLevels categorical_levels(const FeatureSchema& schema);

/// Writes `contents` next to `path` and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace hro
