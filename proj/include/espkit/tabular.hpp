#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "espkit/error.hpp"
#include "espkit/rng.hpp"

namespace espkit {

enum class column_kind { numeric, categorical, boolean };

inline const char* column_kind_name(column_kind k) {
  switch (k) {
    case column_kind::numeric: return "numeric";
    case column_kind::categorical: return "categorical";
    case column_kind::boolean: return "boolean";
  }
  return "?";
}

inline std::optional<column_kind> column_kind_from(std::string_view s) {
  if (s == "numeric") return column_kind::numeric;
  if (s == "categorical") return column_kind::categorical;
  if (s == "boolean") return column_kind::boolean;
  return std::nullopt;
}

struct column_schema {
  std::string name;
  column_kind kind = column_kind::numeric;
  // Distinct values, lexicographically sorted; categorical/boolean only.
  std::vector<std::string> categories;
};

/// One table cell: a number, a category index into the column's category
/// list, or null (missing).
struct cell {
  enum class state : std::uint8_t { null, number, category };

  state tag = state::null;
  double num = 0.0;
  std::int32_t cat = -1;

  static cell null() { return {}; }
  static cell number(double v) { return {state::number, v, -1}; }
  static cell category(std::int32_t idx) { return {state::category, 0.0, idx}; }

  bool is_null() const { return tag == state::null; }
  bool is_number() const { return tag == state::number; }
  bool is_category() const { return tag == state::category; }

  friend bool operator==(const cell& a, const cell& b) {
    if (a.tag != b.tag) return false;
    switch (a.tag) {
      case state::null: return true;
      case state::number: return a.num == b.num;
      case state::category: return a.cat == b.cat;
    }
    return false;
  }
};

/// Immutable-by-convention tabular dataset with a designated binary target.
struct dataset {
  std::vector<column_schema> schema;
  std::string target;
  std::vector<std::vector<cell>> rows;  // n x m, row-major
  std::string provenance;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.size(); }

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < schema.size(); ++i)
      if (schema[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t column_index(std::string_view name) const {
    auto i = find_column(name);
    if (!i) raise(errc::feature_not_found, "no column named '" + std::string(name) + "'");
    return *i;
  }

  std::size_t target_index() const { return column_index(target); }

  const cell& at(std::size_t row, std::size_t col) const { return rows[row][col]; }

  /// Checks every documented structural invariant; throws on breach.
  void validate() const {
    if (schema.size() < 2) raise(errc::empty_dataset, "need at least 2 columns");
    if (rows.empty()) raise(errc::empty_dataset, "no data rows");
    std::set<std::string_view> names;
    for (const auto& col : schema) {
      if (!names.insert(col.name).second)
        raise(errc::malformed_csv, "duplicate column name '" + col.name + "'");
      if (col.kind == column_kind::numeric) {
        if (!col.categories.empty())
          raise(errc::invalid_spec, "numeric column '" + col.name + "' has categories");
      } else {
        if (col.categories.empty())
          raise(errc::invalid_spec, "column '" + col.name + "' has no categories");
        if (!std::is_sorted(col.categories.begin(), col.categories.end()) ||
            std::adjacent_find(col.categories.begin(), col.categories.end()) !=
                col.categories.end())
          raise(errc::invalid_spec, "categories of '" + col.name + "' not sorted/unique");
      }
    }
    const std::size_t ti = target_index();
    if (schema[ti].kind == column_kind::numeric || schema[ti].categories.size() != 2)
      raise(errc::non_binary_target, "target '" + target + "' must have exactly 2 categories");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != schema.size())
        raise(errc::malformed_csv, "row " + std::to_string(r) + " has wrong width");
      for (std::size_t c = 0; c < schema.size(); ++c) {
        const cell& v = rows[r][c];
        if (v.is_null()) continue;
        if (schema[c].kind == column_kind::numeric) {
          if (!v.is_number())
            raise(errc::invalid_spec, "non-numeric cell in numeric column '" + schema[c].name + "'");
        } else {
          if (!v.is_category() || v.cat < 0 ||
              static_cast<std::size_t>(v.cat) >= schema[c].categories.size())
            raise(errc::invalid_spec, "bad category index in column '" + schema[c].name + "'");
        }
      }
    }
  }
};

using schema_hints = std::map<std::string, column_kind>;

namespace csv_detail {

struct raw_table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
};

// RFC-4180 state machine. Tracks (record, field) for error positions.
inline raw_table parse(std::string_view text) {
  raw_table out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  std::size_t rec_no = 1, field_no = 1;

  auto pos = [&] {
    return "row " + std::to_string(rec_no) + ", col " + std::to_string(field_no);
  };
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    was_quoted = false;
    ++field_no;
  };
  auto end_record = [&] {
    end_field();
    if (out.header.empty()) {
      out.header = std::move(record);
    } else {
      if (record.size() != out.header.size())
        raise(errc::malformed_csv,
              pos() + ": expected " + std::to_string(out.header.size()) +
                  " fields, got " + std::to_string(record.size()));
      out.records.push_back(std::move(record));
    }
    record.clear();
    ++rec_no;
    field_no = 1;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field.empty() || was_quoted)
          raise(errc::malformed_csv, pos() + ": quote inside unquoted field");
        in_quotes = true;
        was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        if (was_quoted)
          raise(errc::malformed_csv, pos() + ": data after closing quote");
        field += ch;
    }
  }
  if (in_quotes) raise(errc::malformed_csv, pos() + ": unterminated quote");
  // Final record without trailing newline.
  if (!field.empty() || was_quoted || !record.empty()) end_record();
  if (out.header.empty()) raise(errc::empty_dataset, "file has no header row");
  return out;
}

inline bool parse_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool is_boolean_token(std::string_view s) {
  static constexpr std::array<std::string_view, 6> tokens = {
      "true", "false", "0", "1", "yes", "no"};
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return std::find(tokens.begin(), tokens.end(), lower) != tokens.end();
}

inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace csv_detail

/// Load an RFC-4180 CSV with header row. Schema inference per column:
/// numeric if every non-empty value parses as a number, boolean if every
/// value is in {true,false,0,1,yes,no} (case-insensitive), else categorical.
/// The target column skips the numeric rule so 0/1 labels stay categorical.
/// Explicit hints override inference. Empty fields become null cells.
inline dataset load_csv_text(std::string_view text, const std::string& target,
                             const schema_hints& hints = {},
                             const std::string& provenance = "") {
  auto raw = csv_detail::parse(text);

  std::size_t target_col = raw.header.size();
  for (std::size_t c = 0; c < raw.header.size(); ++c)
    if (raw.header[c] == target) target_col = c;
  if (target_col == raw.header.size())
    raise(errc::missing_target, "target column '" + target + "' not in header");
  if (raw.records.empty()) raise(errc::empty_dataset, "no data rows after header");
  if (raw.header.size() < 2) raise(errc::empty_dataset, "need at least 2 columns");

  const std::size_t m = raw.header.size();
  dataset d;
  d.target = target;
  d.provenance = provenance;
  d.schema.resize(m);

  for (std::size_t c = 0; c < m; ++c) {
    auto& col = d.schema[c];
    col.name = raw.header[c];

    bool all_numeric = true, all_boolean = true, any_value = false;
    std::set<std::string> distinct;
    for (const auto& rec : raw.records) {
      const std::string& v = rec[c];
      if (v.empty()) continue;
      any_value = true;
      double unused;
      if (all_numeric && !csv_detail::parse_number(v, unused)) all_numeric = false;
      if (all_boolean && !csv_detail::is_boolean_token(v)) all_boolean = false;
      distinct.insert(v);
    }

    if (auto it = hints.find(col.name); it != hints.end()) {
      col.kind = it->second;
    } else if (c != target_col && (!any_value || all_numeric)) {
      col.kind = column_kind::numeric;  // all-null columns default to numeric
    } else if (any_value && all_boolean) {
      col.kind = column_kind::boolean;
    } else {
      col.kind = column_kind::categorical;
    }

    if (col.kind != column_kind::numeric)
      col.categories.assign(distinct.begin(), distinct.end());
  }

  if (d.schema[target_col].kind == column_kind::numeric)
    raise(errc::non_binary_target, "target '" + target + "' hinted as numeric");

  d.rows.reserve(raw.records.size());
  for (std::size_t r = 0; r < raw.records.size(); ++r) {
    std::vector<cell> row(m);
    for (std::size_t c = 0; c < m; ++c) {
      const std::string& v = raw.records[r][c];
      if (v.empty()) {
        row[c] = cell::null();
        continue;
      }
      if (d.schema[c].kind == column_kind::numeric) {
        double num;
        if (!csv_detail::parse_number(v, num))
          raise(errc::malformed_csv, "row " + std::to_string(r + 2) + ", col " +
                                         std::to_string(c + 1) + ": '" + v +
                                         "' is not numeric");
        row[c] = cell::number(num);
      } else {
        const auto& cats = d.schema[c].categories;
        auto it = std::lower_bound(cats.begin(), cats.end(), v);
        if (it == cats.end() || *it != v)
          raise(errc::malformed_csv, "row " + std::to_string(r + 2) + ", col " +
                                         std::to_string(c + 1) + ": value '" + v +
                                         "' outside hinted categories");
        row[c] = cell::category(static_cast<std::int32_t>(it - cats.begin()));
      }
    }
    d.rows.push_back(std::move(row));
  }

  const auto& tcats = d.schema[target_col].categories;
  if (tcats.size() != 2)
    raise(errc::non_binary_target, "target '" + target + "' has " +
                                       std::to_string(tcats.size()) +
                                       " distinct values, need exactly 2");
  for (std::size_t r = 0; r < d.rows.size(); ++r)
    if (d.rows[r][target_col].is_null())
      raise(errc::non_binary_target,
            "target has a missing value at row " + std::to_string(r + 2));

  d.validate();
  return d;
}

inline dataset load_csv(const std::string& path, const std::string& target,
                        const schema_hints& hints = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_csv_text(ss.str(), target, hints, path);
}

inline std::string to_csv_text(const dataset& d) {
  auto escape = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  };
  std::string out;
  for (std::size_t c = 0; c < d.schema.size(); ++c) {
    if (c) out += ',';
    out += escape(d.schema[c].name);
  }
  out += '\n';
  for (const auto& row : d.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      const cell& v = row[c];
      if (v.is_null()) continue;
      if (v.is_number())
        out += csv_detail::format_number(v.num);
      else
        out += escape(d.schema[c].categories[static_cast<std::size_t>(v.cat)]);
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot write '" + path + "'");
  out << to_csv_text(d);
}

/// FNV-1a digest over schema and cell contents; stable across runs and
/// platforms. Used for test-partition integrity checks and store digests.
inline std::uint64_t dataset_digest(const dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_bytes = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_str = [&](const std::string& s) {
    mix_bytes(s.data(), s.size());
    mix_bytes("\x1f", 1);
  };
  for (const auto& col : d.schema) {
    mix_str(col.name);
    const auto k = static_cast<std::uint8_t>(col.kind);
    mix_bytes(&k, 1);
    for (const auto& cat : col.categories) mix_str(cat);
  }
  mix_str(d.target);
  for (const auto& row : d.rows) {
    for (const cell& v : row) {
      mix_bytes(&v.tag, 1);
      if (v.is_number()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v.num, sizeof bits);
        mix_bytes(&bits, sizeof bits);
      } else if (v.is_category()) {
        mix_bytes(&v.cat, sizeof v.cat);
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct column_moments {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1)
  std::size_t count = 0;
};

inline column_moments column_mean_std(const dataset& d, std::size_t col) {
  column_moments m;
  double mean = 0.0, m2 = 0.0;
  for (const auto& row : d.rows) {
    const cell& v = row[col];
    if (!v.is_number()) continue;
    ++m.count;
    const double delta = v.num - mean;
    mean += delta / static_cast<double>(m.count);
    m2 += delta * (v.num - mean);
  }
  m.mean = mean;
  m.stddev = m.count > 1 ? std::sqrt(m2 / static_cast<double>(m.count - 1)) : 0.0;
  return m;
}

struct pearson_matrix_result {
  std::vector<std::string> columns;           // numeric columns, dataset order
  std::vector<std::size_t> column_indices;    // into dataset schema
  std::vector<double> r;                      // k x k row-major
  std::vector<std::uint8_t> degenerate;       // k x k, 1 where r undefined

  std::size_t size() const { return columns.size(); }
  double at(std::size_t i, std::size_t j) const { return r[i * size() + j]; }
  bool is_degenerate(std::size_t i, std::size_t j) const {
    return degenerate[i * size() + j] != 0;
  }
};

namespace stats_detail {

// Pairwise Pearson r with nulls excluded pairwise; Welford-style single pass.
// Returns nullopt when fewer than two complete pairs or a variance is zero.
inline std::optional<double> pearson_pair(const dataset& d, std::size_t a,
                                          std::size_t b) {
  std::size_t n = 0;
  double mx = 0, my = 0, m2x = 0, m2y = 0, cxy = 0;
  for (const auto& row : d.rows) {
    const cell& x = row[a];
    const cell& y = row[b];
    if (!x.is_number() || !y.is_number()) continue;
    ++n;
    const double k = static_cast<double>(n);
    const double dx = x.num - mx;
    mx += dx / k;
    const double dy = y.num - my;
    my += dy / k;
    m2x += dx * (x.num - mx);
    m2y += dy * (y.num - my);
    cxy += dx * (y.num - my);
  }
  if (n < 2 || m2x <= 0.0 || m2y <= 0.0) return std::nullopt;
  return std::clamp(cxy / std::sqrt(m2x * m2y), -1.0, 1.0);
}

}  // namespace stats_detail

/// Pearson correlation matrix over the numeric columns. Null cells are
/// excluded pairwise; zero-variance pairs get r = 0 with a degenerate flag.
inline pearson_matrix_result pearson_matrix(const dataset& d) {
  pearson_matrix_result out;
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    if (d.schema[c].kind == column_kind::numeric) {
      out.columns.push_back(d.schema[c].name);
      out.column_indices.push_back(c);
    }
  }
  const std::size_t k = out.columns.size();
  if (k < 2)
    raise(errc::insufficient_numeric_columns,
          "need >= 2 numeric columns, found " + std::to_string(k));
  out.r.assign(k * k, 0.0);
  out.degenerate.assign(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    out.r[i * k + i] = 1.0;
    const auto self = stats_detail::pearson_pair(d, out.column_indices[i],
                                                 out.column_indices[i]);
    if (!self) out.degenerate[i * k + i] = 1;
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto rij = stats_detail::pearson_pair(d, out.column_indices[i],
                                                  out.column_indices[j]);
      const double value = rij.value_or(0.0);
      out.r[i * k + j] = out.r[j * k + i] = value;
      if (!rij) out.degenerate[i * k + j] = out.degenerate[j * k + i] = 1;
    }
  }
  return out;
}

/// Point-biserial correlation of each numeric column against the binary
/// target (encoded 0/1 by category index).
inline std::vector<std::pair<std::string, double>> target_correlations(
    const dataset& d) {
  const std::size_t ti = d.target_index();
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t c = 0; c < d.n_cols(); ++c) {
    if (d.schema[c].kind != column_kind::numeric) continue;
    std::size_t n = 0;
    double mx = 0, my = 0, m2x = 0, m2y = 0, cxy = 0;
    for (const auto& row : d.rows) {
      const cell& x = row[c];
      const cell& y = row[ti];
      if (!x.is_number() || y.is_null()) continue;
      const double yv = static_cast<double>(y.cat);
      ++n;
      const double k = static_cast<double>(n);
      const double dx = x.num - mx;
      mx += dx / k;
      const double dy = yv - my;
      my += dy / k;
      m2x += dx * (x.num - mx);
      m2y += dy * (yv - my);
      cxy += dx * (yv - my);
    }
    double r = 0.0;
    if (n >= 2 && m2x > 0.0 && m2y > 0.0)
      r = std::clamp(cxy / std::sqrt(m2x * m2y), -1.0, 1.0);
    out.emplace_back(d.schema[c].name, r);
  }
  return out;
}

/// Per-class fractions of the target, ordered by category index.
/// Fractions over non-null target cells; sums to 1 within fp error.
inline std::vector<double> class_balance(const dataset& d) {
  const std::size_t ti = d.target_index();
  std::vector<std::size_t> counts(d.schema[ti].categories.size(), 0);
  std::size_t total = 0;
  for (const auto& row : d.rows) {
    const cell& v = row[ti];
    if (v.is_null()) continue;
    ++counts[static_cast<std::size_t>(v.cat)];
    ++total;
  }
  std::vector<double> out(counts.size(), 0.0);
  if (total)
    for (std::size_t i = 0; i < counts.size(); ++i)
      out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return out;
}

// ---------------------------------------------------------------------------
// Stratified splitting

struct split_pair {
  dataset train;
  dataset test;
  std::vector<std::size_t> train_indices;  // source row ids, ascending
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

/// Seeded stratified split: per-class shuffle, then a prefix of
/// ceil(ratio * n_class) rows goes to train (class remainders land in
/// train). Deterministic in (dataset, ratio, seed).
inline split_pair stratified_split(const dataset& d, double ratio,
                                   std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    raise(errc::invalid_spec, "split ratio must be in (0,1)");
  const std::size_t ti = d.target_index();
  const std::size_t n_classes = d.schema[ti].categories.size();

  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    const cell& v = d.rows[r][ti];
    if (!v.is_null()) by_class[static_cast<std::size_t>(v.cat)].push_back(r);
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (by_class[c].size() < 2)
      raise(errc::class_too_small,
            "class '" + d.schema[ti].categories[c] + "' has " +
                std::to_string(by_class[c].size()) + " rows, need >= 2");

  split_pair out;
  out.seed = seed;
  out.ratio = ratio;
  rng gen(seed);
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& idx = by_class[c];
    gen.shuffle(idx);
    const double want = ratio * static_cast<double>(idx.size());
    // ceil with an epsilon guard so exact products do not round up.
    auto take = static_cast<std::size_t>(std::ceil(want - 1e-9));
    take = std::min(take, idx.size());
    out.train_indices.insert(out.train_indices.end(), idx.begin(), idx.begin() + take);
    out.test_indices.insert(out.test_indices.end(), idx.begin() + take, idx.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  if (out.test_indices.empty())
    raise(errc::class_too_small, "split leaves an empty test set");

  auto take_rows = [&](const std::vector<std::size_t>& idx) {
    dataset part;
    part.schema = d.schema;
    part.target = d.target;
    part.provenance = d.provenance;
    part.rows.reserve(idx.size());
    for (std::size_t r : idx) part.rows.push_back(d.rows[r]);
    return part;
  };
  out.train = take_rows(out.train_indices);
  out.test = take_rows(out.test_indices);
  return out;
}

}  // namespace espkit
