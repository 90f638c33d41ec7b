#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace edca {

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// One table cell. Columns never mix double and std::string among their
/// non-missing cells.
using Cell = std::variant<Missing, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

enum class ColumnType { Number, Text };

struct Column {
  std::string name;
  ColumnType type = ColumnType::Number;
  std::vector<Cell> cells;

  bool operator==(const Column&) const = default;
};

using RowIndices = std::vector<std::size_t>;

/// Column-typed table with an integer class target in [0, K).
class Dataset {
 public:
  Dataset() = default;

  /// Validates every invariant and throws DataError on violation.
  Dataset(std::vector<Column> columns, std::vector<int> target, std::vector<std::string> label_names);

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  std::optional<std::size_t> column_index(const std::string& name) const;
  const std::vector<int>& target() const { return target_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  std::size_t n_rows() const { return target_.size(); }
  std::size_t n_columns() const { return columns_.size(); }
  int n_classes() const { return static_cast<int>(label_names_.size()); }

  /// Copy restricted to `rows` (in the given order). Class labels keep
  /// their original indexing, so the subset need not contain every class.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Mutable cell access for tests and fixtures. Does not re-validate.
  Cell& mutable_cell(std::size_t column, std::size_t row) { return columns_.at(column).cells.at(row); }

  bool operator==(const Dataset&) const = default;

 private:
  struct Unchecked {};
  Dataset(Unchecked, std::vector<Column> columns, std::vector<int> target, std::vector<std::string> label_names)
      : columns_(std::move(columns)), target_(std::move(target)), label_names_(std::move(label_names)) {}

  std::vector<Column> columns_;
  std::vector<int> target_;
  std::vector<std::string> label_names_;
};

struct SplitPair {
  RowIndices train;
  RowIndices val;

  bool operator==(const SplitPair&) const = default;
};

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"", "?", "NA"};
  return tokens;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::set<std::string>& missing_tokens = default_missing_tokens());

/// Parses CSV text; same contract as load_csv.
Dataset parse_csv(const std::string& text, const std::string& target_column,
                  const std::set<std::string>& missing_tokens = default_missing_tokens());

/// Writes the features followed by the target column. Missing cells are
/// written as empty fields; numbers at round-trip precision.
std::string to_csv(const Dataset& ds, const std::string& target_column = "class");
void write_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& target_column = "class");

/// Holdout split over positions 0..labels.size()-1. Stratified splits use
/// largest-remainder allocation so each class share is within one row of
/// val_fraction * n_c and the total equals round(val_fraction * n).
SplitPair split_holdout(std::span<const int> labels, double val_fraction, bool stratified, std::uint64_t seed);
SplitPair split_holdout(const Dataset& ds, double val_fraction, bool stratified, std::uint64_t seed);

/// k folds; `val` holds each fold's test part. Rows are dealt round-robin
/// (class by class when stratified), so fold sizes and per-class counts
/// differ by at most one.
std::vector<SplitPair> kfold(std::span<const int> labels, std::size_t k, bool stratified, std::uint64_t seed);
std::vector<SplitPair> kfold(const Dataset& ds, std::size_t k, bool stratified, std::uint64_t seed);

/// Maps positions produced by a split over `rows` back to row ids.
RowIndices remap(std::span<const std::size_t> positions, std::span<const std::size_t> rows);

struct SyntheticSpec {
  std::size_t n_rows = 600;
  std::size_t n_numerical = 6;
  std::size_t n_noise = 0;  ///< extra numerical columns with no class signal
  std::size_t n_categorical = 3;
  std::size_t n_binary = 1;
  bool with_identifier = false;
  double missing_rate = 0.0;
  int n_classes = 2;
  double class_sep = 2.0;
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace edca
