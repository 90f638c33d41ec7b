#include "edca/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "edca/errors.hpp"
#include "edca/rng.hpp"

namespace edca {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

// RFC-4180 records: quoted fields, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

Dataset::Dataset(std::vector<Column> columns, std::vector<int> target, std::vector<std::string> label_names)
    : columns_(std::move(columns)), target_(std::move(target)), label_names_(std::move(label_names)) {
  const int k = n_classes();
  if (k < 2) throw DataError("fewer than 2 classes");
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (int y : target_) {
    if (y < 0 || y >= k) throw DataError("target label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw DataError("class '" + label_names_[c] + "' has no rows");
  }
  for (const auto& col : columns_) {
    if (col.cells.size() != target_.size()) throw DataError("column '" + col.name + "' has wrong row count");
    for (const auto& cell : col.cells) {
      const bool bad = (col.type == ColumnType::Number && std::holds_alternative<std::string>(cell)) ||
                       (col.type == ColumnType::Text && std::holds_alternative<double>(cell));
      if (bad) throw DataError("column '" + col.name + "' mixes numbers and text");
    }
  }
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& col : columns_) {
    Column c{col.name, col.type, {}};
    c.cells.reserve(rows.size());
    for (auto r : rows) c.cells.push_back(col.cells.at(r));
    cols.push_back(std::move(c));
  }
  std::vector<int> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(target_.at(r));
  return Dataset(Unchecked{}, std::move(cols), std::move(y), label_names_);
}

Dataset parse_csv(const std::string& text, const std::string& target_column,
                  const std::set<std::string>& missing_tokens) {
  auto records = parse_records(text);
  if (records.empty()) throw DataError("CSV has no header row");
  const auto header = records.front();
  const auto width = header.size();
  std::optional<std::size_t> target_pos;
  for (std::size_t i = 0; i < width; ++i) {
    if (trim(header[i]) == target_column) target_pos = i;
  }
  if (!target_pos) throw DataError("target column '" + target_column + "' not found");

  const std::size_t n = records.size() - 1;
  for (std::size_t r = 1; r <= n; ++r) {
    if (records[r].size() != width) {
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                      " fields, expected " + std::to_string(width));
    }
  }

  std::vector<std::string> raw_labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    raw_labels[r] = trim(records[r + 1][*target_pos]);
    if (missing_tokens.count(raw_labels[r])) throw DataError("missing target label in row " + std::to_string(r + 1));
  }
  std::map<std::string, int> label_index;
  for (const auto& l : raw_labels) label_index.emplace(l, 0);
  if (label_index.size() < 2) throw DataError("fewer than 2 classes");
  std::vector<std::string> label_names;
  for (auto& [name, idx] : label_index) {
    idx = static_cast<int>(label_names.size());
    label_names.push_back(name);
  }
  std::vector<int> target(n);
  for (std::size_t r = 0; r < n; ++r) target[r] = label_index.at(raw_labels[r]);

  std::vector<Column> columns;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == *target_pos) continue;
    Column col{trim(header[c]), ColumnType::Number, {}};
    col.cells.reserve(n);
    std::size_t numbers = 0, texts = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const auto token = trim(records[r + 1][c]);
      if (missing_tokens.count(token)) {
        col.cells.emplace_back(Missing{});
      } else if (auto v = parse_number(token)) {
        col.cells.emplace_back(*v);
        ++numbers;
      } else {
        col.cells.emplace_back(token);
        ++texts;
      }
    }
    if (numbers == 0 && texts == 0) throw DataError("column '" + col.name + "' has only missing cells");
    if (numbers > 0 && texts > 0) throw DataError("column '" + col.name + "' mixes numbers and text");
    col.type = texts > 0 ? ColumnType::Text : ColumnType::Number;
    columns.push_back(std::move(col));
  }
  return Dataset(std::move(columns), std::move(target), std::move(label_names));
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::set<std::string>& missing_tokens) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), target_column, missing_tokens);
}

std::string to_csv(const Dataset& ds, const std::string& target_column) {
  std::string out;
  for (const auto& col : ds.columns()) out += quote_field(col.name) + ',';
  out += quote_field(target_column) + '\n';
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (const auto& col : ds.columns()) {
      const auto& cell = col.cells[r];
      if (const auto* d = std::get_if<double>(&cell)) {
        out += format_number(*d);
      } else if (const auto* s = std::get_if<std::string>(&cell)) {
        out += quote_field(*s);
      }
      out += ',';
    }
    out += quote_field(ds.label_names()[static_cast<std::size_t>(ds.target()[r])]) + '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, const std::string& target_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_csv(ds, target_column);
}

SplitPair split_holdout(std::span<const int> labels, double val_fraction, bool stratified, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("need at least 2 rows to split");
  Rng rng(seed);
  std::vector<bool> is_val(n, false);

  if (!stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
  } else {
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);

    const auto total = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
    std::vector<std::size_t> quota(by_class.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty()) continue;
      if (by_class[c].size() < 2) throw DataError("class " + std::to_string(c) + " has fewer than 2 rows");
      const double exact = val_fraction * static_cast<double>(by_class[c].size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      assigned += quota[c];
      remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total && i < remainders.size(); ++i, ++assigned) ++quota[remainders[i].second];
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty()) continue;
      quota[c] = std::clamp<std::size_t>(quota[c], 1, by_class[c].size() - 1);
      rng.shuffle(by_class[c]);
      for (std::size_t i = 0; i < quota[c]; ++i) is_val[by_class[c][i]] = true;
    }
  }

  SplitPair out;
  for (std::size_t i = 0; i < n; ++i) (is_val[i] ? out.val : out.train).push_back(i);
  return out;
}

SplitPair split_holdout(const Dataset& ds, double val_fraction, bool stratified, std::uint64_t seed) {
  return split_holdout(std::span<const int>(ds.target()), val_fraction, stratified, seed);
}

std::vector<SplitPair> kfold(std::span<const int> labels, std::size_t k, bool stratified, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  const std::size_t n = labels.size();
  if (k > n) throw DataError("k-fold: k exceeds the number of rows");
  Rng rng(seed);
  std::vector<std::size_t> order;
  order.reserve(n);
  if (stratified) {
    const int nk = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(nk));
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty()) continue;
      if (by_class[c].size() < k) throw DataError("class " + std::to_string(c) + " has fewer rows than folds");
      rng.shuffle(by_class[c]);
      order.insert(order.end(), by_class[c].begin(), by_class[c].end());
    }
  } else {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
  }
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % k;

  std::vector<SplitPair> folds(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].val : folds[f].train).push_back(i);
  }
  return folds;
}

std::vector<SplitPair> kfold(const Dataset& ds, std::size_t k, bool stratified, std::uint64_t seed) {
  return kfold(std::span<const int>(ds.target()), k, stratified, seed);
}

RowIndices remap(std::span<const std::size_t> positions, std::span<const std::size_t> rows) {
  RowIndices out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(rows[p]);
  return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const std::size_t n_features = spec.n_numerical + spec.n_noise + spec.n_categorical + spec.n_binary;
  if (n_features == 0) throw ConfigError("synthetic spec requests zero feature columns");
  if (spec.n_classes < 2) throw ConfigError("synthetic spec needs n_classes >= 2");
  if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) throw ConfigError("missing_rate must lie in [0, 1)");
  const auto k = static_cast<std::size_t>(spec.n_classes);
  if (spec.n_rows < k) throw ConfigError("synthetic spec has fewer rows than classes");

  Rng rng(seed);
  const std::size_t n = spec.n_rows;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % k);
  rng.shuffle(y);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Column> cols;

  // Feature j puts class c at class_sep * ((c * (j + 1)) mod K - (K - 1) / 2),
  // so feature 0 alone already separates every pair of classes.
  const double half = 0.5 * static_cast<double>(k - 1);
  for (std::size_t j = 0; j < spec.n_numerical; ++j) {
    Column col{"num" + std::to_string(j), ColumnType::Number, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(y[i]);
      const double center = spec.class_sep * (static_cast<double>((c * (j + 1)) % k) - half);
      col.cells.emplace_back(center + gauss(rng.engine()));
    }
    cols.push_back(std::move(col));
  }
  for (std::size_t j = 0; j < spec.n_noise; ++j) {
    Column col{"noise" + std::to_string(j), ColumnType::Number, {}};
    for (std::size_t i = 0; i < n; ++i) col.cells.emplace_back(gauss(rng.engine()));
    cols.push_back(std::move(col));
  }
  for (std::size_t j = 0; j < spec.n_categorical; ++j) {
    const std::size_t levels = 3 + j % 4;
    Column col{"cat" + std::to_string(j), ColumnType::Text, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(y[i]);
      const std::size_t level = rng.bernoulli(0.7) ? (c + j) % levels : rng.index(levels);
      col.cells.emplace_back("L" + std::to_string(level));
    }
    cols.push_back(std::move(col));
  }
  for (std::size_t j = 0; j < spec.n_binary; ++j) {
    const bool text = j % 2 == 0;
    Column col{"bin" + std::to_string(j), text ? ColumnType::Text : ColumnType::Number, {}};
    for (std::size_t i = 0; i < n; ++i) {
      const bool on = rng.bernoulli(0.8) ? (y[i] % 2 == 1) : rng.bernoulli(0.5);
      if (text) {
        col.cells.emplace_back(std::string(on ? "yes" : "no"));
      } else {
        col.cells.emplace_back(on ? 1.0 : 0.0);
      }
    }
    cols.push_back(std::move(col));
  }
  if (spec.missing_rate > 0.0) {
    for (auto& col : cols) {
      for (auto& cell : col.cells) {
        if (rng.bernoulli(spec.missing_rate)) cell = Missing{};
      }
    }
  }
  if (spec.with_identifier) {
    std::vector<double> ids(n);
    std::iota(ids.begin(), ids.end(), 1000.0);
    rng.shuffle(ids);
    Column col{"id", ColumnType::Number, {}};
    for (double v : ids) col.cells.emplace_back(v);
    cols.insert(cols.begin(), std::move(col));
  }

  std::vector<std::string> labels;
  for (std::size_t c = 0; c < k; ++c) labels.push_back("c" + std::to_string(c));
  return Dataset(std::move(cols), std::move(y), std::move(labels));
}

}  // namespace edca
