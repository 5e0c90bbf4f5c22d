#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "percept/models.hpp"

namespace percept {

struct TabularSchema {
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::set<int> categorical_features;
  // Category labels per categorical column; the code of a label is its index.
  std::map<int, std::vector<std::string>> categorical_names;

  int num_features() const noexcept { return static_cast<int>(feature_names.size()); }
  bool is_categorical(int column) const { return categorical_features.count(column) != 0; }
  // Throws SchemaError on out-of-range categorical indices or columns with
  // fewer than two categories.
  void validate() const;
};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by N)
  double min = 0.0;
  double max = 0.0;
  // Continuous columns: nearest-rank 25th/50th/75th percentiles.
  std::vector<double> quartiles;
  // Continuous columns: empirical mass of each of the four quartile bins.
  std::vector<double> bin_frequencies;
  // Categorical columns: empirical frequency of each category code.
  std::vector<double> frequencies;
};

// Quartile bin (0..3) of `value`: the number of boundaries strictly below it.
int quartile_bin(const std::vector<double>& quartiles, double value);

class Dataset {
 public:
  Dataset(Eigen::MatrixXd rows, TabularSchema schema);

  const Eigen::MatrixXd& rows() const noexcept { return rows_; }
  const TabularSchema& schema() const noexcept { return schema_; }
  const ColumnStats& stats(int column) const { return stats_.at(static_cast<std::size_t>(column)); }
  int num_rows() const noexcept { return static_cast<int>(rows_.rows()); }
  int num_columns() const noexcept { return static_cast<int>(rows_.cols()); }
  TabularRow row(int i) const;

 private:
  Eigen::MatrixXd rows_;
  TabularSchema schema_;
  std::vector<ColumnStats> stats_;
};

struct CsvHints {
  // Column names to label-encode; every other column must parse as a number.
  std::vector<std::string> categorical;
  std::vector<std::string> class_names;
};

// UTF-8, comma-separated, header on the first line, no quoting. Categorical
// values are encoded in first-seen order.
Dataset parse_csv(std::string_view text, const CsvHints& hints);
Dataset ingest_csv(const std::filesystem::path& path, const CsvHints& hints);

// Inverse of parse_csv (continuous values printed with round-trip precision).
std::string to_csv(const Dataset& dataset);

}  // namespace percept
