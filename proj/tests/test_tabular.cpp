#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "espkit/tabular.hpp"
#include "helpers.hpp"

using namespace espkit;

namespace {

// Independent two-pass Pearson: explicit means first, then moments.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("load_csv infers kinds and handles nulls") {
  const std::string csv =
      "age,city,member,score,label\n"
      "34,rome,true,1.5,yes\n"
      "28,milan,false,2.25,no\n"
      ",rome,true,,yes\n"
      "51,turin,false,-0.5,no\n";
  const dataset d = load_csv_text(csv, "label");

  REQUIRE(d.n_rows() == 4);
  REQUIRE(d.n_cols() == 5);
  CHECK(d.schema[0].kind == column_kind::numeric);
  CHECK(d.schema[1].kind == column_kind::categorical);
  CHECK(d.schema[1].categories == std::vector<std::string>{"milan", "rome", "turin"});
  CHECK(d.schema[2].kind == column_kind::boolean);
  CHECK(d.schema[3].kind == column_kind::numeric);
  CHECK(d.schema[4].kind == column_kind::boolean);
  CHECK(d.at(2, 0).is_null());
  CHECK(d.at(2, 3).is_null());
  CHECK(d.at(0, 0).num == 34.0);
}

TEST_CASE("load_csv target never infers numeric") {
  const std::string csv = "kredit,hoehe\n1,100\n0,250\n1,80\n";
  const dataset d = load_csv_text(csv, "kredit");
  CHECK(d.schema[0].kind == column_kind::boolean);
  CHECK(d.schema[0].categories == std::vector<std::string>{"0", "1"});
  CHECK(d.schema[1].kind == column_kind::numeric);
}

TEST_CASE("load_csv schema hints override inference") {
  const std::string csv = "a,b,y\n1,2,p\n3,4,q\n";
  const dataset d = load_csv_text(csv, "y", {{"a", column_kind::categorical}});
  CHECK(d.schema[0].kind == column_kind::categorical);
  CHECK(d.schema[0].categories == std::vector<std::string>{"1", "3"});
  CHECK(d.schema[1].kind == column_kind::numeric);
}

TEST_CASE("load_csv error cases") {
  SECTION("missing target") {
    CHECK_THROWS_MATCHES(load_csv_text("a,b\n1,2\n", "z"), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("MissingTarget")));
  }
  SECTION("single row cannot carry two classes") {
    try {
      load_csv_text("a,y\n1,p\n", "y");
      FAIL("expected NonBinaryTarget");
    } catch (const error& e) {
      CHECK(e.code() == errc::non_binary_target);
    }
  }
  SECTION("three-class target") {
    try {
      load_csv_text("a,y\n1,p\n2,q\n3,r\n", "y");
      FAIL("expected NonBinaryTarget");
    } catch (const error& e) {
      CHECK(e.code() == errc::non_binary_target);
    }
  }
  SECTION("header-only file") {
    try {
      load_csv_text("a,y\n", "y");
      FAIL("expected EmptyDataset");
    } catch (const error& e) {
      CHECK(e.code() == errc::empty_dataset);
    }
  }
  SECTION("ragged record reports its position") {
    try {
      load_csv_text("a,b,y\n1,2,p\n1,q\n2,3,q\n", "y");
      FAIL("expected MalformedCsv");
    } catch (const error& e) {
      CHECK(e.code() == errc::malformed_csv);
      CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
  }
  SECTION("unterminated quote") {
    try {
      load_csv_text("a,y\n\"oops,p\n1,q\n", "y");
      FAIL("expected MalformedCsv");
    } catch (const error& e) {
      CHECK(e.code() == errc::malformed_csv);
    }
  }
  SECTION("null target cell rejected") {
    try {
      load_csv_text("a,y\n1,p\n2,\n3,q\n", "y");
      FAIL("expected NonBinaryTarget");
    } catch (const error& e) {
      CHECK(e.code() == errc::non_binary_target);
    }
  }
}

TEST_CASE("rfc4180 quoting round-trips") {
  const std::string csv =
      "name,note,y\n"
      "\"a,b\",\"say \"\"hi\"\"\",p\n"
      "plain,\"line\nbreak\",q\n";
  const dataset d = load_csv_text(csv, "y");
  CHECK(d.schema[0].categories == std::vector<std::string>{"a,b", "plain"});
  CHECK(d.schema[1].categories == std::vector<std::string>{"line\nbreak", "say \"hi\""});

  // Write out and reload with the same schema: identical dataset.
  schema_hints hints;
  for (const auto& col : d.schema) hints[col.name] = col.kind;
  const dataset back = load_csv_text(to_csv_text(d), "y", hints);
  REQUIRE(back.rows == d.rows);
  REQUIRE(back.schema.size() == d.schema.size());
  for (std::size_t c = 0; c < d.schema.size(); ++c)
    CHECK(back.schema[c].categories == d.schema[c].categories);
}

TEST_CASE("csv round-trip reproduces random tables exactly") {
  rng gen(777);
  for (int rep = 0; rep < 20; ++rep) {
    dataset d = testutil::mixed_dataset(30, 30, gen.next_u64());
    // Sprinkle nulls and awkward numerics into non-target cells.
    for (auto& row : d.rows) {
      if (gen.below(4) == 0) row[0] = cell::null();
      if (gen.below(5) == 0) row[1] = cell::number(gen.gaussian() * 1e-7);
      if (gen.below(7) == 0) row[2] = cell::null();
    }
    schema_hints hints;
    for (const auto& col : d.schema) hints[col.name] = col.kind;
    const dataset back = load_csv_text(to_csv_text(d), "y", hints, d.provenance);
    CHECK(back.rows == d.rows);
    CHECK(dataset_digest(back) == dataset_digest(d));
  }
}

TEST_CASE("pearson_matrix basics") {
  dataset d;
  d.target = "y";
  d.schema = {{"a", column_kind::numeric, {}},
              {"b", column_kind::numeric, {}},
              {"c", column_kind::numeric, {}},
              {"y", column_kind::boolean, {"n", "p"}}};
  // b = 2a (r=1), c = -a (r=-1)
  for (int i = 0; i < 6; ++i) {
    const double v = static_cast<double>(i);
    d.rows.push_back({cell::number(v), cell::number(2 * v), cell::number(-v),
                      cell::category(i % 2)});
  }
  const auto m = pearson_matrix(d);
  REQUIRE(m.size() == 3);
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == Catch::Approx(1.0));
  CHECK(m.at(0, 2) == Catch::Approx(-1.0));
  CHECK(m.at(1, 2) == Catch::Approx(-1.0));
  CHECK(m.at(0, 1) == m.at(1, 0));
}

TEST_CASE("pearson_matrix degenerate and null handling") {
  dataset d;
  d.target = "y";
  d.schema = {{"a", column_kind::numeric, {}},
              {"flat", column_kind::numeric, {}},
              {"holey", column_kind::numeric, {}},
              {"y", column_kind::boolean, {"n", "p"}}};
  d.rows = {
      {cell::number(1), cell::number(7), cell::null(), cell::category(0)},
      {cell::number(2), cell::number(7), cell::number(2), cell::category(1)},
      {cell::number(3), cell::number(7), cell::number(3), cell::category(0)},
      {cell::number(4), cell::number(7), cell::null(), cell::category(1)},
  };
  const auto m = pearson_matrix(d);
  CHECK(m.at(0, 1) == 0.0);
  CHECK(m.is_degenerate(0, 1));
  CHECK(m.at(1, 1) == 1.0);
  // holey vs a: pairwise exclusion leaves rows 2,3 -> perfectly correlated.
  CHECK(m.at(0, 2) == Catch::Approx(1.0));
  CHECK_FALSE(m.is_degenerate(0, 2));
}

TEST_CASE("pearson_matrix needs two numeric columns") {
  dataset d = testutil::mixed_dataset(5, 5, 1);
  d.schema[1].kind = column_kind::categorical;  // knock out x1
  d.schema[1].categories = {"v"};
  for (auto& row : d.rows) row[1] = cell::category(0);
  try {
    pearson_matrix(d);
    FAIL("expected InsufficientNumericColumns");
  } catch (const error& e) {
    CHECK(e.code() == errc::insufficient_numeric_columns);
  }
}

TEST_CASE("pearson_matrix matches two-pass oracle on random tables") {
  rng gen(2024);
  for (int rep = 0; rep < 10; ++rep) {
    dataset d = testutil::numeric_dataset(50, 5, gen.next_u64());
    const auto m = pearson_matrix(d);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        std::vector<double> x, y;
        for (const auto& row : d.rows) {
          x.push_back(row[i].num);
          y.push_back(row[j].num);
        }
        CHECK(std::fabs(m.at(i, j) - pearson_oracle(x, y)) < 1e-12);
      }
    }
  }
}

TEST_CASE("target_correlations computes point-biserial r") {
  dataset d;
  d.target = "y";
  d.schema = {{"a", column_kind::numeric, {}},
              {"b", column_kind::numeric, {}},
              {"y", column_kind::boolean, {"n", "p"}}};
  // a tracks the label exactly; b is symmetric noise.
  d.rows = {
      {cell::number(0), cell::number(1), cell::category(0)},
      {cell::number(0), cell::number(-1), cell::category(0)},
      {cell::number(1), cell::number(1), cell::category(1)},
      {cell::number(1), cell::number(-1), cell::category(1)},
  };
  const auto rs = target_correlations(d);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].first == "a");
  CHECK(rs[0].second == Catch::Approx(1.0));
  CHECK(rs[1].second == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("class_balance fractions") {
  SECTION("even split") {
    const dataset d = testutil::mixed_dataset(10, 10, 3);
    const auto cb = class_balance(d);
    REQUIRE(cb.size() == 2);
    CHECK(cb[0] == 0.5);
    CHECK(cb[1] == 0.5);
  }
  SECTION("sums to one, ordered by category index") {
    const dataset d = testutil::mixed_dataset(169, 31, 4);
    const auto cb = class_balance(d);
    CHECK(std::fabs(cb[0] + cb[1] - 1.0) < 1e-12);
    CHECK(cb[0] == Catch::Approx(0.845));
    CHECK(cb[1] == Catch::Approx(0.155));
  }
}

TEST_CASE("stratified_split exact stratification") {
  const dataset d = testutil::mixed_dataset(50, 50, 11);
  const auto sp = stratified_split(d, 0.8, 42);
  REQUIRE(sp.train.n_rows() == 80);
  REQUIRE(sp.test.n_rows() == 20);
  const auto train_cb = class_balance(sp.train);
  const auto test_cb = class_balance(sp.test);
  CHECK(train_cb[0] == 0.5);
  CHECK(test_cb[0] == 0.5);
}

TEST_CASE("stratified_split determinism") {
  const dataset d = testutil::mixed_dataset(60, 40, 12);
  const auto a = stratified_split(d, 0.8, 7);
  const auto b = stratified_split(d, 0.8, 7);
  CHECK(a.train_indices == b.train_indices);
  CHECK(a.test_indices == b.test_indices);
  const auto c = stratified_split(d, 0.8, 8);
  CHECK(a.train_indices != c.train_indices);
}

TEST_CASE("stratified_split rejects tiny classes") {
  const dataset d = testutil::mixed_dataset(9, 1, 13);
  try {
    stratified_split(d, 0.8, 1);
    FAIL("expected ClassTooSmall");
  } catch (const error& e) {
    CHECK(e.code() == errc::class_too_small);
  }
}

TEST_CASE("stratified_split is a partition across seeds") {
  const dataset d = testutil::mixed_dataset(37, 23, 14);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto sp = stratified_split(d, 0.7, seed);
    REQUIRE(sp.train_indices.size() + sp.test_indices.size() == d.n_rows());
    std::set<std::size_t> seen(sp.train_indices.begin(), sp.train_indices.end());
    for (std::size_t idx : sp.test_indices) REQUIRE(seen.insert(idx).second);
    REQUIRE(seen.size() == d.n_rows());
  }
}

TEST_CASE("stratified_split per-class proportions within one row") {
  rng gen(555);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n0 = 5 + gen.below(80);
    const std::size_t n1 = 5 + gen.below(80);
    const double ratio = 0.5 + 0.4 * gen.uniform();
    const dataset d = testutil::mixed_dataset(n0, n1, gen.next_u64());
    const auto sp = stratified_split(d, ratio, gen.next_u64());
    std::size_t train0 = 0;
    const std::size_t ti = d.target_index();
    for (const auto& row : sp.train.rows) train0 += row[ti].cat == 0;
    // Train takes ceil(ratio * n_c) of each class.
    const auto want0 = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(n0) - 1e-9));
    CHECK(train0 == want0);
  }
}
