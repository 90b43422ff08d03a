#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "espkit/dist.hpp"
#include "espkit/error.hpp"

namespace espkit {

struct perf_metric {
  enum class kind { f1, accuracy };
  kind tag = kind::f1;
  std::string positive_class;  // f1 only

  friend bool operator==(const perf_metric&, const perf_metric&) = default;
};

inline const char* metric_name(perf_metric::kind k) {
  return k == perf_metric::kind::f1 ? "f1" : "accuracy";
}

struct curve_point {
  double e = 0.0;  // severity percentage
  double p = 0.0;  // metric value
};

/// Per-run error-performance curve, anchored at the clean baseline (e=0).
struct error_performance_curve {
  std::vector<curve_point> points;  // sorted by e, strictly increasing
  perf_metric metric;
  std::uint64_t run_seed = 0;

  void validate() const {
    if (points.size() < 2)
      raise(errc::too_few_points, "curve needs at least 2 points");
    if (points.front().e != 0.0)
      raise(errc::schema_violation, "curve must start at e = 0");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].e <= points[i - 1].e)
        raise(errc::schema_violation, "curve e values must be strictly increasing");
  }

  std::vector<double> levels() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) out.push_back(pt.e);
    return out;
  }
};

/// Error Performance Correlation: the negated Pearson correlation between
/// severity and performance. Positive means performance falls as corruption
/// rises. Zero variance in either sequence yields 0 with the degenerate
/// flag set.
struct epc_value {
  double value = 0.0;
  bool degenerate = false;
};

inline epc_value epc(const error_performance_curve& curve) {
  if (curve.points.size() < 2)
    raise(errc::too_few_points, "EPC needs at least 2 points");
  const auto n = static_cast<double>(curve.points.size());
  double me = 0, mp = 0;
  for (const auto& pt : curve.points) {
    me += pt.e;
    mp += pt.p;
  }
  me /= n;
  mp /= n;
  double see = 0, spp = 0, sep = 0;
  for (const auto& pt : curve.points) {
    see += (pt.e - me) * (pt.e - me);
    spp += (pt.p - mp) * (pt.p - mp);
    sep += (pt.e - me) * (pt.p - mp);
  }
  if (see <= 0.0 || spp <= 0.0) return {0.0, true};
  return {std::clamp(-sep / std::sqrt(see * spp), -1.0, 1.0), false};
}

/// Area between the error-performance curve and the baseline: trapezoidal
/// integral of (p(e) - p0) over [0, e_max], normalized by p0 * e_max.
/// Negative = net degradation, positive = net improvement.
inline double aepc(const error_performance_curve& curve) {
  if (curve.points.size() < 2)
    raise(errc::too_few_points, "AEPC needs at least 2 points");
  const double p0 = curve.points.front().p;
  if (p0 <= 1e-9)
    raise(errc::zero_baseline, "baseline performance is ~0; profile undefined");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.e - a.e) * ((a.p - p0) + (b.p - p0)) / 2.0;
  }
  const double e_max = curve.points.back().e;
  return area / (p0 * e_max);
}

struct slope_region {
  double e_start = 0.0;
  double e_end = 0.0;
  double beta = 0.0;       // OLS slope, metric units per percentage point
  std::size_t n_points = 0;
  bool directional = false;  // exact two-point fit, no residual dof
};

namespace esp_detail {

inline double ols_slope(const std::vector<curve_point>& pts, std::size_t a,
                        std::size_t b) {
  const auto n = static_cast<double>(b - a + 1);
  double me = 0, mp = 0;
  for (std::size_t i = a; i <= b; ++i) {
    me += pts[i].e;
    mp += pts[i].p;
  }
  me /= n;
  mp /= n;
  double num = 0, den = 0;
  for (std::size_t i = a; i <= b; ++i) {
    num += (pts[i].e - me) * (pts[i].p - mp);
    den += (pts[i].e - me) * (pts[i].e - me);
  }
  return num / den;
}

}  // namespace esp_detail

/// Split the curve into maximal monotone regions (boundaries where the sign
/// of consecutive first differences changes; zero differences inherit the
/// neighboring nonzero sign) and fit an OLS slope per region.
inline std::vector<slope_region> piecewise_slopes(
    const error_performance_curve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 2) raise(errc::too_few_points, "slopes need at least 2 points");

  const std::size_t nd = pts.size() - 1;
  std::vector<int> sign(nd, 0);
  for (std::size_t i = 0; i < nd; ++i) {
    const double d = pts[i + 1].p - pts[i].p;
    sign[i] = d > 0 ? 1 : (d < 0 ? -1 : 0);
  }
  // Plateaus never create boundaries: zeros take the previous nonzero sign,
  // a leading zero run takes the first nonzero sign.
  int last = 0;
  for (std::size_t i = 0; i < nd; ++i) {
    if (sign[i] == 0)
      sign[i] = last;
    else
      last = sign[i];
  }
  for (std::size_t i = nd; i-- > 0;) {
    if (sign[i] == 0)
      sign[i] = last;
    else
      last = sign[i];
  }

  std::vector<slope_region> regions;
  std::size_t start = 0;  // point index opening the current region
  for (std::size_t i = 1; i <= nd; ++i) {
    if (i == nd || sign[i] != sign[i - 1]) {
      slope_region r;
      r.e_start = pts[start].e;
      r.e_end = pts[i].e;
      r.n_points = i - start + 1;
      r.directional = r.n_points == 2;
      r.beta = esp_detail::ols_slope(pts, start, i);
      regions.push_back(r);
      start = i;
    }
  }
  return regions;
}

/// Full per-run profile. The source curve is retained so cross-run slope
/// aggregation can re-segment it on the union boundary grid.
struct esp_profile {
  epc_value epc;
  double aepc = 0.0;
  std::vector<slope_region> slopes;
  perf_metric metric;
  error_performance_curve curve;
};

inline esp_profile compute_profile(const error_performance_curve& curve) {
  curve.validate();
  esp_profile prof;
  prof.epc = espkit::epc(curve);
  prof.aepc = espkit::aepc(curve);
  prof.slopes = piecewise_slopes(curve);
  prof.metric = curve.metric;
  prof.curve = curve;
  return prof;
}

/// Sample mean, sample sd, and 95% t-interval.
struct ci_stat {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

inline ci_stat t_interval(const std::vector<double>& xs) {
  ci_stat s;
  s.n = xs.size();
  if (s.n == 0) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  if (s.n == 1) {
    s.ci_lo = s.ci_hi = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  const double t = dist::t_quantile(0.975, static_cast<double>(s.n - 1));
  const double half = t * s.sd / std::sqrt(static_cast<double>(s.n));
  s.ci_lo = s.mean - half;
  s.ci_hi = s.mean + half;
  return s;
}

struct aggregate_region {
  double e_start = 0.0;
  double e_end = 0.0;
  ci_stat beta;
};

struct aggregate_esp {
  ci_stat epc;
  ci_stat aepc;
  std::vector<aggregate_region> slopes;  // on the union boundary grid
  perf_metric metric;
  std::vector<double> schedule_levels;
};

/// Cross-run aggregation per the mean-of-runs definition with 95% t-CIs.
/// Runs may disagree on region boundaries, so every run's curve is
/// re-segmented on the union of all runs' boundaries and slopes are
/// averaged index-wise on that shared grid.
inline aggregate_esp aggregate(const std::vector<esp_profile>& profiles) {
  if (profiles.size() < 2)
    raise(errc::too_few_runs, "aggregation needs at least 2 runs, got " +
                                  std::to_string(profiles.size()));
  const auto levels = profiles.front().curve.levels();
  for (const auto& prof : profiles) {
    if (prof.metric != profiles.front().metric)
      raise(errc::mixed_schedules, "profiles disagree on the metric");
    if (prof.curve.levels() != levels)
      raise(errc::mixed_schedules, "profiles disagree on the severity schedule");
  }

  aggregate_esp agg;
  agg.metric = profiles.front().metric;
  agg.schedule_levels = levels;

  std::vector<double> epcs, aepcs;
  for (const auto& prof : profiles) {
    epcs.push_back(prof.epc.value);
    aepcs.push_back(prof.aepc);
  }
  agg.epc = t_interval(epcs);
  agg.aepc = t_interval(aepcs);

  std::set<double> cuts;
  for (const auto& prof : profiles)
    for (const auto& r : prof.slopes) {
      cuts.insert(r.e_start);
      cuts.insert(r.e_end);
    }
  const std::vector<double> grid(cuts.begin(), cuts.end());

  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    aggregate_region region;
    region.e_start = grid[g];
    region.e_end = grid[g + 1];
    std::vector<double> betas;
    for (const auto& prof : profiles) {
      const auto& pts = prof.curve.points;
      std::size_t a = 0;
      while (pts[a].e < region.e_start) ++a;
      std::size_t b = a;
      while (b + 1 < pts.size() && pts[b + 1].e <= region.e_end) ++b;
      betas.push_back(esp_detail::ols_slope(pts, a, b));
    }
    region.beta = t_interval(betas);
    agg.slopes.push_back(std::move(region));
  }
  return agg;
}

// ---------------------------------------------------------------------------
// Curve interchange JSON

inline nlohmann::ordered_json curves_to_json(
    const std::vector<error_performance_curve>& curves) {
  if (curves.empty()) raise(errc::empty_input, "no curves to serialize");
  nlohmann::ordered_json j;
  j["metric"] = metric_name(curves.front().metric.tag);
  if (curves.front().metric.tag == perf_metric::kind::f1)
    j["positive_class"] = curves.front().metric.positive_class;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& curve : curves) {
    nlohmann::ordered_json run;
    run["seed"] = curve.run_seed;
    run["points"] = nlohmann::ordered_json::array();
    for (const auto& pt : curve.points)
      run["points"].push_back({{"e", pt.e}, {"p", pt.p}});
    j["runs"].push_back(std::move(run));
  }
  return j;
}

/// Parse the curve-interchange schema:
///   {"metric":"f1","positive_class":"...","runs":[{"seed":N,"points":
///    [{"e":0,"p":0.91},...]},...]}
/// e must be strictly increasing per run with e=0 first; p in [0,1].
inline std::vector<error_performance_curve> curves_from_json(
    const nlohmann::json& j) {
  auto fail = [](const std::string& msg) -> void {
    raise(errc::schema_violation, msg);
  };
  if (!j.is_object()) fail("top level must be an object");
  if (!j.contains("metric") || !j["metric"].is_string()) fail("missing 'metric'");
  perf_metric metric;
  const std::string mname = j["metric"].get<std::string>();
  if (mname == "f1") {
    metric.tag = perf_metric::kind::f1;
    if (!j.contains("positive_class") || !j["positive_class"].is_string())
      fail("f1 metric requires 'positive_class'");
    metric.positive_class = j["positive_class"].get<std::string>();
  } else if (mname == "accuracy") {
    metric.tag = perf_metric::kind::accuracy;
  } else {
    fail("unknown metric '" + mname + "'");
  }
  if (!j.contains("runs") || !j["runs"].is_array() || j["runs"].empty())
    fail("missing non-empty 'runs' array");

  std::vector<error_performance_curve> curves;
  for (const auto& run : j["runs"]) {
    if (!run.is_object() || !run.contains("points") || !run["points"].is_array())
      fail("each run needs a 'points' array");
    error_performance_curve curve;
    curve.metric = metric;
    curve.run_seed = run.value("seed", std::uint64_t{0});
    for (const auto& pt : run["points"]) {
      if (!pt.is_object() || !pt.contains("e") || !pt.contains("p") ||
          !pt["e"].is_number() || !pt["p"].is_number())
        fail("each point needs numeric 'e' and 'p'");
      curve_point cp{pt["e"].get<double>(), pt["p"].get<double>()};
      if (cp.p < 0.0 || cp.p > 1.0) fail("p outside [0,1]");
      curve.points.push_back(cp);
    }
    if (curve.points.size() < 2) fail("each run needs at least 2 points");
    if (curve.points.front().e != 0.0) fail("first point must have e = 0");
    for (std::size_t i = 1; i < curve.points.size(); ++i)
      if (curve.points[i].e <= curve.points[i - 1].e)
        fail("e values must be strictly increasing (duplicates not allowed)");
    curves.push_back(std::move(curve));
  }
  return curves;
}

inline std::vector<error_performance_curve> import_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    raise(errc::schema_violation, std::string("invalid JSON: ") + e.what());
  }
  return curves_from_json(j);
}

inline void export_curves(const std::vector<error_performance_curve>& curves,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(errc::io_error, "cannot write '" + path + "'");
  out << curves_to_json(curves).dump(2) << "\n";
}

}  // namespace espkit
