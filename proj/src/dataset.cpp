#include "percept/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, std::size_t row) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    } else if (line[i] == '"') {
      throw ParseError(row, fields.size() + 1, "quoted fields are not supported");
    }
  }
  return fields;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void TabularSchema::validate() const {
  for (int c : categorical_features) {
    if (c < 0 || c >= num_features()) {
      throw Error(ErrorCode::kSchemaError, "categorical index " + std::to_string(c) + " is not a column");
    }
    auto it = categorical_names.find(c);
    if (it == categorical_names.end() || it->second.size() < 2) {
      throw Error(ErrorCode::kSchemaError,
                  "categorical column '" + feature_names[static_cast<std::size_t>(c)] +
                      "' needs at least two categories");
    }
  }
}

int quartile_bin(const std::vector<double>& quartiles, double value) {
  return static_cast<int>(std::count_if(quartiles.begin(), quartiles.end(),
                                        [&](double q) { return q < value; }));
}

Dataset::Dataset(Eigen::MatrixXd rows, TabularSchema schema) : rows_(std::move(rows)), schema_(std::move(schema)) {
  if (rows_.rows() == 0) throw Error(ErrorCode::kEmptyDataset, "dataset has no rows");
  if (rows_.cols() != schema_.num_features()) {
    throw Error(ErrorCode::kShapeMismatch, "dataset has " + std::to_string(rows_.cols()) +
                                               " columns but the schema names " +
                                               std::to_string(schema_.num_features()));
  }
  schema_.validate();
  const auto n = static_cast<double>(rows_.rows());
  for (int c = 0; c < num_columns(); ++c) {
    const auto col = rows_.col(c);
    ColumnStats s;
    s.mean = col.mean();
    s.stddev = std::sqrt((col.array() - s.mean).square().sum() / n);
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    if (schema_.is_categorical(c)) {
      s.frequencies.assign(schema_.categorical_names.at(c).size(), 0.0);
      for (Eigen::Index r = 0; r < rows_.rows(); ++r) {
        const double code = col[r];
        if (code < 0 || code >= static_cast<double>(s.frequencies.size()) || code != std::floor(code)) {
          throw Error(ErrorCode::kSchemaError, "row " + std::to_string(r) + " has invalid category code in column " +
                                                   std::to_string(c));
        }
        s.frequencies[static_cast<std::size_t>(code)] += 1.0 / n;
      }
    } else {
      std::vector<double> sorted(col.begin(), col.end());
      std::sort(sorted.begin(), sorted.end());
      for (double p : {0.25, 0.5, 0.75}) {
        const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size())));
        s.quartiles.push_back(sorted[std::max<std::size_t>(rank, 1) - 1]);
      }
      s.bin_frequencies.assign(4, 0.0);
      for (double v : sorted) s.bin_frequencies[static_cast<std::size_t>(quartile_bin(s.quartiles, v))] += 1.0 / n;
    }
    stats_.push_back(std::move(s));
  }
}

TabularRow Dataset::row(int i) const {
  const auto r = rows_.row(i);
  return TabularRow(r.begin(), r.end());
}

Dataset parse_csv(std::string_view text, const CsvHints& hints) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, 1, "missing header line");

  TabularSchema schema;
  for (auto field : split_fields(lines[0], 1)) {
    if (field.empty()) throw ParseError(1, schema.feature_names.size() + 1, "empty column name");
    schema.feature_names.emplace_back(field);
  }
  schema.class_names = hints.class_names;
  const std::size_t width = schema.feature_names.size();
  for (const auto& name : hints.categorical) {
    auto it = std::find(schema.feature_names.begin(), schema.feature_names.end(), name);
    if (it == schema.feature_names.end()) {
      throw Error(ErrorCode::kSchemaError, "categorical column '" + name + "' is not in the header");
    }
    const int col = static_cast<int>(it - schema.feature_names.begin());
    schema.categorical_features.insert(col);
    schema.categorical_names[col];
  }

  std::vector<std::vector<double>> values;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row_no = li + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = split_fields(lines[li], row_no);
    if (fields.size() != width) {
      throw Error(ErrorCode::kInconsistentArity, "row " + std::to_string(row_no) + " has " +
                                                     std::to_string(fields.size()) + " fields, header has " +
                                                     std::to_string(width));
    }
    std::vector<double> parsed(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string_view f = fields[c];
      const int col = static_cast<int>(c);
      if (schema.is_categorical(col)) {
        if (f.empty()) throw ParseError(row_no, c + 1, "empty category in column '" + schema.feature_names[c] + "'");
        auto& labels = schema.categorical_names[col];
        auto it = std::find(labels.begin(), labels.end(), f);
        if (it == labels.end()) {
          labels.emplace_back(f);
          it = labels.end() - 1;
        }
        parsed[c] = static_cast<double>(it - labels.begin());
      } else {
        double v = 0.0;
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
          throw ParseError(row_no, c + 1,
                           "'" + std::string(f) + "' is not a number in continuous column '" +
                               schema.feature_names[c] + "'");
        }
        parsed[c] = v;
      }
    }
    values.push_back(std::move(parsed));
  }
  if (values.empty()) throw Error(ErrorCode::kEmptyDataset, "CSV has a header but no rows");

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
  }
  return Dataset(std::move(rows), std::move(schema));
}

Dataset ingest_csv(const std::filesystem::path& path, const CsvHints& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), hints);
}

std::string to_csv(const Dataset& dataset) {
  const auto& schema = dataset.schema();
  std::string out;
  for (int c = 0; c < schema.num_features(); ++c) {
    if (c) out += ",";
    out += schema.feature_names[static_cast<std::size_t>(c)];
  }
  out += "\n";
  for (int r = 0; r < dataset.num_rows(); ++r) {
    for (int c = 0; c < schema.num_features(); ++c) {
      if (c) out += ",";
      const double v = dataset.rows()(r, c);
      if (schema.is_categorical(c)) {
        out += schema.categorical_names.at(c).at(static_cast<std::size_t>(v));
      } else {
        out += format_number(v);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace percept
