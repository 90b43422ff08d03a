#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "espkit/error.hpp"
#include "espkit/rng.hpp"
#include "espkit/tabular.hpp"

namespace espkit {

// ---------------------------------------------------------------------------
// Corruption vocabulary

enum class error_kind {
  noisy_values,
  outliers,
  missing_values,
  mislabeling,
  duplication,
  oversampling_class,
};

inline const char* error_kind_name(error_kind k) {
  switch (k) {
    case error_kind::noisy_values: return "noisy_values";
    case error_kind::outliers: return "outliers";
    case error_kind::missing_values: return "missing_values";
    case error_kind::mislabeling: return "mislabeling";
    case error_kind::duplication: return "duplication";
    case error_kind::oversampling_class: return "oversampling_class";
  }
  return "?";
}

inline std::optional<error_kind> error_kind_from(std::string_view s) {
  if (s == "noisy_values") return error_kind::noisy_values;
  if (s == "outliers") return error_kind::outliers;
  if (s == "missing_values") return error_kind::missing_values;
  if (s == "mislabeling") return error_kind::mislabeling;
  if (s == "duplication") return error_kind::duplication;
  if (s == "oversampling_class") return error_kind::oversampling_class;
  return std::nullopt;
}

/// Cell errors rewrite existing cells of selected feature columns.
inline bool is_cell_error(error_kind k) {
  return k == error_kind::noisy_values || k == error_kind::outliers ||
         k == error_kind::missing_values;
}

/// Row errors append rows; they never rewrite existing cells.
inline bool is_row_error(error_kind k) {
  return k == error_kind::duplication || k == error_kind::oversampling_class;
}

struct error_type {
  error_kind tag = error_kind::missing_values;
  double noise_scale = 1.0;    // noisy_values: multiplier on column stddev
  double outlier_lo = 3.0;     // outliers: |offset| range in column stddevs
  double outlier_hi = 5.0;
  std::string oversample_class;  // oversampling_class: target category value
};

struct severity_schedule {
  std::vector<double> levels;  // percentages, first must be 0, increasing

  void validate() const {
    if (levels.empty() || levels.front() != 0.0)
      raise(errc::invalid_spec, "schedule must start at level 0");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] < 0.0 || levels[i] > 100.0)
        raise(errc::invalid_spec, "schedule level outside [0,100]");
      if (i && levels[i] <= levels[i - 1])
        raise(errc::invalid_spec, "schedule levels must be strictly increasing");
    }
  }

  bool contains(double level) const {
    return std::find(levels.begin(), levels.end(), level) != levels.end();
  }

  double max_level() const { return levels.back(); }

  friend bool operator==(const severity_schedule&, const severity_schedule&) = default;
};

enum class predicate_op { eq, ne, lt, le, gt, ge };

inline const char* predicate_op_name(predicate_op op) {
  switch (op) {
    case predicate_op::eq: return "==";
    case predicate_op::ne: return "!=";
    case predicate_op::lt: return "<";
    case predicate_op::le: return "<=";
    case predicate_op::gt: return ">";
    case predicate_op::ge: return ">=";
  }
  return "?";
}

inline std::optional<predicate_op> predicate_op_from(std::string_view s) {
  if (s == "==") return predicate_op::eq;
  if (s == "!=") return predicate_op::ne;
  if (s == "<") return predicate_op::lt;
  if (s == "<=") return predicate_op::le;
  if (s == ">") return predicate_op::gt;
  if (s == ">=") return predicate_op::ge;
  return std::nullopt;
}

/// One (column, comparator, literal) atom; a predicate is a conjunction of
/// atoms. Numeric columns compare numerically, categorical/boolean columns
/// compare the category string lexicographically. Null cells never match.
struct predicate_atom {
  std::string column;
  predicate_op op = predicate_op::eq;
  std::string literal;
};

struct corruption_spec {
  error_type type;
  std::vector<std::string> features;  // empty for row errors and mislabeling
  severity_schedule schedule;
  std::vector<predicate_atom> predicate;  // conjunction; empty = all rows
};

/// What one corrupt() call touched, at one severity level.
struct corruption_trace {
  double level = 0.0;
  std::uint64_t seed = 0;
  // (row id, column name) per rewritten cell; cell and mislabeling errors.
  std::vector<std::pair<std::size_t, std::string>> touched_cells;
  std::size_t added_row_count = 0;  // row errors
};

inline std::uint64_t trace_digest(const corruption_trace& t) {
  std::string buf = std::to_string(t.level) + "|" + std::to_string(t.seed) + "|" +
                    std::to_string(t.added_row_count);
  for (const auto& [row, col] : t.touched_cells)
    buf += "|" + std::to_string(row) + ":" + col;
  return fnv1a64(buf);
}

// ---------------------------------------------------------------------------
// Validation

namespace corrupt_detail {

inline bool atom_matches(const dataset& d, const predicate_atom& atom,
                         std::size_t col, std::size_t row) {
  const cell& v = d.rows[row][col];
  if (v.is_null()) return false;
  int cmp;
  if (d.schema[col].kind == column_kind::numeric) {
    double lit;
    if (!csv_detail::parse_number(atom.literal, lit))
      raise(errc::invalid_spec, "predicate literal '" + atom.literal +
                                    "' is not numeric for column '" + atom.column + "'");
    cmp = v.num < lit ? -1 : (v.num > lit ? 1 : 0);
  } else {
    const std::string& s = d.schema[col].categories[static_cast<std::size_t>(v.cat)];
    cmp = s.compare(atom.literal);
    cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
  }
  switch (atom.op) {
    case predicate_op::eq: return cmp == 0;
    case predicate_op::ne: return cmp != 0;
    case predicate_op::lt: return cmp < 0;
    case predicate_op::le: return cmp <= 0;
    case predicate_op::gt: return cmp > 0;
    case predicate_op::ge: return cmp >= 0;
  }
  return false;
}

inline std::vector<std::size_t> predicate_rows(const dataset& d,
                                               const corruption_spec& spec) {
  std::vector<std::size_t> cols;
  cols.reserve(spec.predicate.size());
  for (const auto& atom : spec.predicate) cols.push_back(d.column_index(atom.column));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    bool ok = true;
    for (std::size_t a = 0; a < spec.predicate.size() && ok; ++a)
      ok = atom_matches(d, spec.predicate[a], cols[a], r);
    if (ok) rows.push_back(r);
  }
  return rows;
}

inline std::size_t floor_count(double level, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(level * static_cast<double>(n) / 100.0 + 1e-9));
}

inline std::uint64_t feature_seed(std::uint64_t seed, std::string_view name) {
  return splitmix64(seed ^ fnv1a64(name));
}

}  // namespace corrupt_detail

/// Validate a spec against a dataset's schema; throws on any breach.
inline void validate_spec(const dataset& d, const corruption_spec& spec) {
  spec.schedule.validate();
  const error_kind k = spec.type.tag;
  if (is_cell_error(k)) {
    if (spec.features.empty())
      raise(errc::empty_feature_list,
            std::string(error_kind_name(k)) + " requires at least one feature");
  } else if (!spec.features.empty()) {
    raise(errc::invalid_spec,
          std::string(error_kind_name(k)) + " takes no feature list");
  }
  for (const auto& f : spec.features) {
    auto idx = d.find_column(f);
    if (!idx) raise(errc::feature_not_found, "feature '" + f + "' not in dataset");
    if (f == d.target)
      raise(errc::invalid_spec, "feature '" + f + "' is the target column");
    if (k == error_kind::outliers && d.schema[*idx].kind != column_kind::numeric)
      raise(errc::outlier_on_categorical,
            "outliers require numeric features; '" + f + "' is " +
                column_kind_name(d.schema[*idx].kind));
  }
  if (k == error_kind::noisy_values && !(spec.type.noise_scale > 0.0))
    raise(errc::invalid_spec, "noise scale must be positive");
  if (k == error_kind::outliers &&
      !(spec.type.outlier_lo > 0.0 && spec.type.outlier_hi >= spec.type.outlier_lo))
    raise(errc::invalid_spec, "outlier magnitude range must satisfy 0 < lo <= hi");
  if (k == error_kind::oversampling_class) {
    const auto& cats = d.schema[d.target_index()].categories;
    if (std::find(cats.begin(), cats.end(), spec.type.oversample_class) == cats.end())
      raise(errc::invalid_spec, "oversample class '" + spec.type.oversample_class +
                                    "' is not a target category");
  }
  for (const auto& atom : spec.predicate) d.column_index(atom.column);
}

struct corruption_result {
  dataset data;
  corruption_trace trace;
};

/// Apply the spec to d0 at one severity level. Always a function of the
/// clean dataset: column statistics, eligibility, and the per-feature
/// permutation are computed on d0, so touched sets are nested by prefix
/// across levels under a shared seed.
inline corruption_result corrupt(const dataset& d0, const corruption_spec& spec,
                                 double level, std::uint64_t seed) {
  validate_spec(d0, spec);
  if (!spec.schedule.contains(level))
    raise(errc::level_not_in_schedule,
          "level " + std::to_string(level) + " not in schedule");

  corruption_result res{d0, {}};
  res.trace.level = level;
  res.trace.seed = seed;
  if (level == 0.0) return res;

  const error_kind k = spec.type.tag;

  if (is_cell_error(k)) {
    for (const auto& fname : spec.features) {
      const std::size_t col = d0.column_index(fname);
      const auto pred_rows = corrupt_detail::predicate_rows(d0, spec);
      std::vector<std::size_t> eligible;
      eligible.reserve(pred_rows.size());
      for (std::size_t r : pred_rows)
        if (!d0.rows[r][col].is_null()) eligible.push_back(r);
      if (eligible.empty())
        raise(errc::predicate_selects_no_rows,
              "no eligible rows for feature '" + fname + "'");

      rng gen(corrupt_detail::feature_seed(seed, fname));
      gen.shuffle(eligible);
      const std::size_t count = corrupt_detail::floor_count(level, eligible.size());

      const bool numeric = d0.schema[col].kind == column_kind::numeric;
      column_moments mom;
      if (numeric && (k == error_kind::noisy_values || k == error_kind::outliers))
        mom = column_mean_std(d0, col);

      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t row = eligible[i];
        cell& target_cell = res.data.rows[row][col];
        switch (k) {
          case error_kind::noisy_values:
            if (numeric) {
              target_cell.num += gen.gaussian() * spec.type.noise_scale * mom.stddev;
            } else {
              const auto n_cats =
                  static_cast<std::uint64_t>(d0.schema[col].categories.size());
              // Uniform over the other categories; single-category columns
              // have no alternative and keep their value.
              const std::uint64_t pick = gen.below(n_cats > 1 ? n_cats - 1 : 1);
              if (n_cats > 1) {
                auto replacement = static_cast<std::int32_t>(pick);
                if (replacement >= target_cell.cat) ++replacement;
                target_cell.cat = replacement;
              }
            }
            break;
          case error_kind::outliers: {
            const double u = gen.uniform_in(spec.type.outlier_lo, spec.type.outlier_hi);
            const double sign = gen.below(2) == 0 ? 1.0 : -1.0;
            target_cell = cell::number(mom.mean + sign * u * mom.stddev);
            break;
          }
          case error_kind::missing_values:
            target_cell = cell::null();
            break;
          default:
            break;
        }
        res.trace.touched_cells.emplace_back(row, fname);
      }
    }
    return res;
  }

  if (k == error_kind::mislabeling) {
    const std::size_t ti = d0.target_index();
    auto eligible = corrupt_detail::predicate_rows(d0, spec);
    std::erase_if(eligible, [&](std::size_t r) { return d0.rows[r][ti].is_null(); });
    if (eligible.empty())
      raise(errc::predicate_selects_no_rows, "no eligible rows for mislabeling");
    rng gen(corrupt_detail::feature_seed(seed, d0.target));
    gen.shuffle(eligible);
    const std::size_t count = corrupt_detail::floor_count(level, eligible.size());
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t row = eligible[i];
      cell& tc = res.data.rows[row][ti];
      tc.cat = 1 - tc.cat;  // binary target: flip to the other class
      res.trace.touched_cells.emplace_back(row, d0.target);
    }
    return res;
  }

  // Row errors: append floor(level% of the ORIGINAL row count) copies.
  const std::size_t ti = d0.target_index();
  auto pool = corrupt_detail::predicate_rows(d0, spec);
  if (k == error_kind::oversampling_class) {
    const auto& cats = d0.schema[ti].categories;
    const auto wanted = static_cast<std::int32_t>(
        std::find(cats.begin(), cats.end(), spec.type.oversample_class) - cats.begin());
    std::erase_if(pool, [&](std::size_t r) {
      const cell& v = d0.rows[r][ti];
      return v.is_null() || v.cat != wanted;
    });
  }
  if (pool.empty())
    raise(errc::predicate_selects_no_rows, "no source rows to duplicate");
  rng gen(corrupt_detail::feature_seed(seed, error_kind_name(k)));
  const std::size_t count = corrupt_detail::floor_count(level, d0.n_rows());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t src = pool[gen.below(pool.size())];
    res.data.rows.push_back(d0.rows[src]);
  }
  res.trace.added_row_count = count;
  return res;
}

// ---------------------------------------------------------------------------
// Predefined strategies

/// One spec per (error type, single feature); error type major, feature
/// minor, both in declaration order.
inline std::vector<corruption_spec> one_feature_at_a_time(
    const dataset& d0, const std::vector<error_type>& error_types,
    const std::vector<std::string>& features, const severity_schedule& schedule) {
  if (features.empty()) raise(errc::empty_feature_list, "no features given");
  for (const auto& t : error_types)
    if (!is_cell_error(t.tag))
      raise(errc::invalid_spec, std::string(error_kind_name(t.tag)) +
                                    " is not a cell error type");
  std::vector<corruption_spec> specs;
  specs.reserve(error_types.size() * features.size());
  for (const auto& t : error_types) {
    for (const auto& f : features) {
      corruption_spec s;
      s.type = t;
      s.features = {f};
      s.schedule = schedule;
      validate_spec(d0, s);
      specs.push_back(std::move(s));
    }
  }
  return specs;
}

/// Groups of numeric non-target features whose pairwise |r| meets the
/// threshold (connected components of the threshold graph, size >= 2);
/// one spec per (error type, group).
inline std::vector<corruption_spec> correlated_features(
    const dataset& d0, const std::vector<error_type>& error_types,
    double threshold, const severity_schedule& schedule) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    raise(errc::invalid_spec, "correlation threshold must be in (0,1]");
  const auto corr = pearson_matrix(d0);
  const std::size_t k = corr.size();

  // Union-find over numeric columns.
  std::vector<std::size_t> parent(k);
  for (std::size_t i = 0; i < k; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (!corr.is_degenerate(i, j) && std::fabs(corr.at(i, j)) >= threshold)
        parent[find(i)] = find(j);

  std::vector<std::vector<std::string>> groups;
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t root = find(i);
    auto it = std::find(roots.begin(), roots.end(), root);
    if (it == roots.end()) {
      roots.push_back(root);
      groups.push_back({corr.columns[i]});
    } else {
      groups[static_cast<std::size_t>(it - roots.begin())].push_back(corr.columns[i]);
    }
  }
  std::erase_if(groups, [](const auto& g) { return g.size() < 2; });

  std::vector<corruption_spec> specs;
  for (const auto& t : error_types) {
    for (const auto& g : groups) {
      corruption_spec s;
      s.type = t;
      s.features = g;
      s.schedule = schedule;
      validate_spec(d0, s);
      specs.push_back(std::move(s));
    }
  }
  return specs;
}

}  // namespace espkit
