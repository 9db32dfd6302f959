#include "hro/io.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hro {

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, int line, const std::string& column)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw ParseError(fmt::format("line {}: column '{}': cannot parse '{}' as a number", line, column, text), line);
    }
    return value;
}

} // namespace

LabeledDataset parse_csv(std::istream& in, const CategoricalLevels& categoricals)
{
    std::string raw;
    int line = 0;
    std::vector<std::string> header;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        for (const auto& f : split_fields(s)) {
            header.push_back(trim(f));
        }
        break;
    }
    if (header.empty()) {
        throw ParseError("missing header row", line);
    }
    const int header_line = line;
    if (header.front() != "t") {
        throw ParseError(fmt::format("line {}: first column must be 't', found '{}'", line, header.front()), line);
    }
    std::size_t y_col = 0;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] == "y") {
            y_col = c;
            break;
        }
    }
    if (y_col == 0) {
        throw ParseError(fmt::format("line {}: missing column 'y'", line), line);
    }
    bool has_label = false;
    bool has_hidden = false;
    for (std::size_t c = y_col + 1; c < header.size(); ++c) {
        if (header[c] == "label" && !has_label && !has_hidden) {
            has_label = true;
        } else if (header[c] == "hidden" && !has_hidden) {
            has_hidden = true;
        } else {
            throw ParseError(fmt::format("line {}: unexpected column '{}' after 'y'", line, header[c]), line);
        }
    }

    LabeledDataset ds;
    std::vector<std::string> process(header.begin() + 1, header.begin() + static_cast<std::ptrdiff_t>(y_col));
    for (const auto& name : process) {
        if (name.empty()) {
            throw ParseError(fmt::format("line {}: empty column name", line), line);
        }
        const auto it = categoricals.find(name);
        if (it == categoricals.end()) {
            ds.schema.continuous_names.push_back(name);
        } else {
            ds.schema.categorical_specs.push_back({name, it->second});
        }
    }
    for (const auto& [name, levels] : categoricals) {
        if (std::find(process.begin(), process.end(), name) == process.end()) {
            throw ParseError(fmt::format("line {}: missing categorical column '{}'", line, name), line);
        }
    }
    try {
        ds.schema.validate();
    } catch (const ValidationError& e) {
        throw ParseError(fmt::format("line {}: {}", header_line, e.what()), header_line);
    }

    std::vector<Vector> rows;
    std::vector<double> ys;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        const auto fields = split_fields(s);
        if (fields.size() != header.size()) {
            throw ParseError(fmt::format("line {}: expected {} fields, found {}", line, header.size(), fields.size()),
                             line);
        }
        ds.t.push_back(parse_number<long>(trim(fields[0]), line, "t"));
        RawRecord record;
        for (std::size_t c = 1; c < y_col; ++c) {
            const std::string value = trim(fields[c]);
            if (categoricals.count(header[c]) != 0) {
                record[header[c]] = value;
            } else {
                record[header[c]] = parse_number<double>(value, line, header[c]);
            }
        }
        try {
            rows.push_back(encode(record, ds.schema));
        } catch (const EncodingError& e) {
            throw ParseError(fmt::format("line {}: {}", line, e.what()), line);
        }
        ys.push_back(parse_number<double>(trim(fields[y_col]), line, "y"));
        std::size_t c = y_col + 1;
        for (const bool present : {has_label, has_hidden}) {
            if (!present) {
                continue;
            }
            const int v = parse_number<int>(trim(fields[c]), line, header[c]);
            if (v < 1) {
                throw ParseError(fmt::format("line {}: column '{}': value {} must be >= 1", line, header[c], v), line);
            }
            (header[c] == "label" ? ds.labels : ds.hidden).push_back(v - 1);
            ++c;
        }
    }
    if (rows.empty()) {
        throw ValidationError("task stream has no data rows");
    }
    ds.X.resize(static_cast<Eigen::Index>(rows.size()), ds.schema.D());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    ds.y = Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    ds.validate();
    return ds;
}

LabeledDataset ingest_csv(const std::filesystem::path& path, const CategoricalLevels& categoricals)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open task file '{}'", path.string()));
    }
    try {
        return parse_csv(in, categoricals);
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line());
    } catch (const ValidationError& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

CategoricalLevels categorical_levels(const FeatureSchema& schema)
{
    CategoricalLevels out;
    for (const auto& c : schema.categorical_specs) {
        out[c.name] = c.levels;
    }
    return out;
}

void write_csv(std::ostream& out, const LabeledDataset& dataset)
{
    dataset.validate();
    std::string text = "t";
    for (const auto& n : dataset.schema.continuous_names) {
        text += "," + n;
    }
    for (const auto& c : dataset.schema.categorical_specs) {
        text += "," + c.name;
    }
    text += ",y";
    if (dataset.has_labels()) {
        text += ",label";
    }
    if (dataset.has_hidden()) {
        text += ",hidden";
    }
    text += '\n';
    const auto n_cont = static_cast<Eigen::Index>(dataset.schema.continuous_names.size());
    for (int i = 0; i < dataset.size(); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        text += fmt::format("{}", dataset.t[ii]);
        for (Eigen::Index j = 0; j < n_cont; ++j) {
            text += fmt::format(",{}", dataset.X(i, j));
        }
        Eigen::Index col = n_cont;
        for (const auto& c : dataset.schema.categorical_specs) {
            std::size_t level = 0;
            for (std::size_t l = 1; l < c.levels.size(); ++l, ++col) {
                if (dataset.X(i, col) == 1.0) {
                    level = l;
                }
            }
            text += "," + c.levels[level];
        }
        text += fmt::format(",{}", dataset.y(i));
        if (dataset.has_labels()) {
            text += fmt::format(",{}", dataset.labels[ii] + 1);
        }
        if (dataset.has_hidden()) {
            text += fmt::format(",{}", dataset.hidden[ii] + 1);
        }
        text += '\n';
    }
    out << text;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        }
        out << contents;
        out.flush();
        if (!out) {
            throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw std::runtime_error(fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
    }
}

} // namespace hro
