#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "espkit/dist.hpp"
#include "espkit/error.hpp"

namespace espkit {

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test (two-sided, classical zero-drop)

enum class wilcoxon_mode { automatic, exact, normal_approx };

struct wilcoxon_result {
  double w = 0.0;          // min(W+, W-), midranks included
  double p_value = 1.0;    // two-sided
  std::size_t n_effective = 0;  // pairs with nonzero difference
  bool all_zero = false;   // every difference was zero; p reported as 1
  bool exact = false;      // exact distribution used (vs normal approx)
};

namespace wilcoxon_detail {

struct ranked {
  std::vector<std::uint64_t> doubled_ranks;  // 2x midrank per pair, integer
  std::uint64_t w2_pos = 0;                  // 2 * W+
  std::vector<std::size_t> tie_sizes;
};

inline ranked rank_differences(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(diffs[a]) < std::fabs(diffs[b]);
  });
  ranked out;
  out.doubled_ranks.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]]))
      ++j;
    // Tied block spans 1-based ranks [i+1, j+1]; midrank = (i+j+2)/2, so the
    // doubled rank (i+j+2) stays integral.
    const std::uint64_t doubled = i + j + 2;
    for (std::size_t k = i; k <= j; ++k) out.doubled_ranks[order[k]] = doubled;
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    if (diffs[k] > 0.0) out.w2_pos += out.doubled_ranks[k];
  return out;
}

/// Exact two-sided tail over all 2^n sign assignments, by subset-sum DP on
/// the doubled ranks: p = P(W+ <= w_min) + P(W+ >= S - w_min), clamped to 1.
inline double exact_p(const ranked& r) {
  const std::size_t n = r.doubled_ranks.size();
  const std::uint64_t total =
      std::accumulate(r.doubled_ranks.begin(), r.doubled_ranks.end(),
                      std::uint64_t{0});
  std::vector<std::uint64_t> dist(total + 1, 0);
  dist[0] = 1;
  std::uint64_t reach = 0;
  for (std::uint64_t dr : r.doubled_ranks) {
    reach += dr;
    for (std::uint64_t s = reach + 1; s-- > dr;) dist[s] += dist[s - dr];
  }
  const std::uint64_t w_min = std::min(r.w2_pos, total - r.w2_pos);
  std::uint64_t count = 0;
  for (std::uint64_t s = 0; s <= w_min; ++s) count += dist[s];
  for (std::uint64_t s = total - w_min; s <= total; ++s) count += dist[s];
  const double p = static_cast<double>(count) / std::ldexp(1.0, static_cast<int>(n));
  return std::min(1.0, p);
}

/// Normal approximation with continuity correction and tie-corrected
/// variance.
inline double approx_p(double w_min, std::size_t n,
                       const std::vector<std::size_t>& tie_sizes) {
  const double dn = static_cast<double>(n);
  const double mu = dn * (dn + 1.0) / 4.0;
  double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0;
  for (std::size_t t : tie_sizes) {
    const double dt = static_cast<double>(t);
    var -= (dt * dt * dt - dt) / 48.0;
  }
  if (var <= 0.0) return 1.0;
  const double z = (w_min - mu + 0.5) / std::sqrt(var);
  return std::clamp(2.0 * dist::normal_cdf(z), 0.0, 1.0);
}

}  // namespace wilcoxon_detail

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are dropped
/// (classical variant); |differences| are ranked with midranks for ties;
/// the statistic is min(W+, W-). Exact distribution up to n_effective = 25,
/// normal approximation with continuity and tie corrections above.
inline wilcoxon_result wilcoxon_signed_rank(
    const std::vector<double>& x, const std::vector<double>& y,
    wilcoxon_mode mode = wilcoxon_mode::automatic) {
  if (x.size() != y.size())
    raise(errc::too_few_pairs, "paired samples differ in length");
  if (x.size() < 2)
    raise(errc::too_few_pairs, "need at least 2 pairs, got " +
                                   std::to_string(x.size()));
  std::vector<double> diffs;
  diffs.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d != 0.0) diffs.push_back(d);
  }

  wilcoxon_result res;
  res.n_effective = diffs.size();
  if (diffs.empty()) {
    res.all_zero = true;
    res.p_value = 1.0;
    return res;
  }

  const auto ranked = wilcoxon_detail::rank_differences(diffs);
  const std::uint64_t total = std::accumulate(
      ranked.doubled_ranks.begin(), ranked.doubled_ranks.end(), std::uint64_t{0});
  const std::uint64_t w2_min = std::min(ranked.w2_pos, total - ranked.w2_pos);
  res.w = static_cast<double>(w2_min) / 2.0;

  const bool use_exact = mode == wilcoxon_mode::exact ||
                         (mode == wilcoxon_mode::automatic && diffs.size() <= 25);
  if (use_exact) {
    res.exact = true;
    res.p_value = wilcoxon_detail::exact_p(ranked);
  } else {
    res.p_value = wilcoxon_detail::approx_p(res.w, diffs.size(), ranked.tie_sizes);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Benjamini-Yekutieli FDR correction

struct by_result {
  std::vector<double> adjusted;       // input order
  std::vector<std::uint8_t> rejected; // adjusted <= alpha
  double alpha = 0.05;
  double c_m = 1.0;                   // harmonic sum over m tests
};

/// Step-up BY adjustment: with c(m) = sum_{i<=m} 1/i and order statistics
/// p_(1) <= ... <= p_(m),
///   adjusted_(i) = min(1, min_{j >= i} (m c(m) / j) p_(j)).
/// Rejecting adjusted <= alpha coincides with the classical BY rule.
inline by_result benjamini_yekutieli(const std::vector<double>& p_values,
                                     double alpha) {
  if (p_values.empty()) raise(errc::empty_input, "no p-values");
  if (!(alpha > 0.0 && alpha < 1.0))
    raise(errc::invalid_spec, "alpha must be in (0,1)");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0))
      raise(errc::p_value_out_of_range, "p-value " + std::to_string(p));

  const std::size_t m = p_values.size();
  by_result out;
  out.alpha = alpha;
  out.c_m = 0.0;
  for (std::size_t i = 1; i <= m; ++i) out.c_m += 1.0 / static_cast<double>(i);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<double> adj_sorted(m);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t j = m; j-- > 0;) {
    const double candidate = static_cast<double>(m) * out.c_m /
                             static_cast<double>(j + 1) * p_values[order[j]];
    running = std::min(running, candidate);
    adj_sorted[j] = std::min(1.0, running);
  }

  out.adjusted.assign(m, 0.0);
  out.rejected.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    out.adjusted[order[j]] = adj_sorted[j];
    out.rejected[order[j]] = adj_sorted[j] <= alpha ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-stage scenario filter

/// Paired per-scenario performance samples: baseline (e=0) vs maximum
/// corruption, one value per run, matched by run seed.
struct scenario_outcome {
  std::string scenario_id;
  std::vector<double> baseline_perf;
  std::vector<double> max_corruption_perf;
  double mean_aepc = 0.0;
};

struct scenario_verdict {
  std::string scenario_id;
  double raw_p = 1.0;
  double adjusted_p = 1.0;
  double w_statistic = 0.0;
  std::size_t n_effective = 0;
  std::size_t n_runs = 0;
  double mean_aepc = 0.0;
  bool all_zero = false;
  bool underpowered = false;  // fewer than 6 paired runs
  bool significant = false;   // stage 1: BY-adjusted p <= alpha
  bool relevant = false;      // stage 2: |mean AEPC| > delta
  bool retained = false;      // significant && relevant
};

struct significance_report {
  std::vector<scenario_verdict> scenarios;
  double alpha = 0.05;
  double delta = 0.05;
  std::size_t m = 0;    // number of tests entering BY
  double c_m = 1.0;
};

/// Stage 1: per-scenario Wilcoxon at maximum corruption vs baseline, BY
/// FDR correction across all scenarios. Stage 2: practical relevance
/// |mean AEPC| > delta. Retained requires both.
inline significance_report two_stage_filter(
    const std::vector<scenario_outcome>& outcomes, double alpha, double delta) {
  if (outcomes.empty()) raise(errc::empty_input, "no scenario outcomes");
  if (!(alpha > 0.0 && alpha < 1.0))
    raise(errc::invalid_spec, "alpha must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    raise(errc::invalid_spec, "delta must be in (0,1)");

  significance_report report;
  report.alpha = alpha;
  report.delta = delta;
  report.m = outcomes.size();

  std::vector<double> raw;
  raw.reserve(outcomes.size());
  for (const auto& oc : outcomes) {
    if (oc.baseline_perf.size() != oc.max_corruption_perf.size())
      raise(errc::too_few_pairs,
            "scenario " + oc.scenario_id + ": unpaired samples");
    const auto wr = wilcoxon_signed_rank(oc.max_corruption_perf, oc.baseline_perf);
    scenario_verdict v;
    v.scenario_id = oc.scenario_id;
    v.raw_p = wr.p_value;
    v.w_statistic = wr.w;
    v.n_effective = wr.n_effective;
    v.n_runs = oc.baseline_perf.size();
    v.mean_aepc = oc.mean_aepc;
    v.all_zero = wr.all_zero;
    v.underpowered = v.n_runs < 6;
    report.scenarios.push_back(std::move(v));
    raw.push_back(wr.p_value);
  }

  const auto by = benjamini_yekutieli(raw, alpha);
  report.c_m = by.c_m;
  for (std::size_t i = 0; i < report.scenarios.size(); ++i) {
    auto& v = report.scenarios[i];
    v.adjusted_p = by.adjusted[i];
    v.significant = by.rejected[i] != 0;
    v.relevant = std::fabs(v.mean_aepc) > delta;
    v.retained = v.significant && v.relevant;
  }
  return report;
}

}  // namespace espkit
