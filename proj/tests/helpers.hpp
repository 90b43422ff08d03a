#pragma once

// Shared builders for test datasets. Oracles live next to the tests that
// use them, not here, so they stay visibly independent of the library path
// they check.

#include <string>
#include <vector>

#include "espkit/rng.hpp"
#include "espkit/tabular.hpp"

namespace testutil {

// n rows, `numeric` numeric feature columns plus a binary target named "y"
// with categories {"a","b"}; labels alternate a,b,a,b,...
inline espkit::dataset numeric_dataset(std::size_t n, std::size_t numeric,
                                       std::uint64_t seed) {
  espkit::dataset d;
  d.target = "y";
  d.provenance = "testutil";
  for (std::size_t c = 0; c < numeric; ++c)
    d.schema.push_back({"x" + std::to_string(c), espkit::column_kind::numeric, {}});
  d.schema.push_back({"y", espkit::column_kind::boolean, {"a", "b"}});
  espkit::rng gen(seed);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<espkit::cell> row;
    for (std::size_t c = 0; c < numeric; ++c)
      row.push_back(espkit::cell::number(gen.gaussian()));
    row.push_back(espkit::cell::category(static_cast<std::int32_t>(r % 2)));
    d.rows.push_back(std::move(row));
  }
  d.validate();
  return d;
}

// Mixed-kind dataset: numeric x0,x1, categorical c0 (3 cats), boolean flag,
// target "y". Class sizes controllable.
inline espkit::dataset mixed_dataset(std::size_t n_class0, std::size_t n_class1,
                                     std::uint64_t seed) {
  espkit::dataset d;
  d.target = "y";
  d.provenance = "testutil";
  d.schema = {
      {"x0", espkit::column_kind::numeric, {}},
      {"x1", espkit::column_kind::numeric, {}},
      {"c0", espkit::column_kind::categorical, {"red", "green", "blue"}},
      {"flag", espkit::column_kind::boolean, {"false", "true"}},
      {"y", espkit::column_kind::boolean, {"neg", "pos"}},
  };
  espkit::rng gen(seed);
  const std::size_t n = n_class0 + n_class1;
  for (std::size_t r = 0; r < n; ++r) {
    const std::int32_t label = r < n_class0 ? 0 : 1;
    std::vector<espkit::cell> row;
    // Separated class means so the classifiers have signal to find.
    row.push_back(espkit::cell::number(gen.gaussian() + (label ? 2.0 : -2.0)));
    row.push_back(espkit::cell::number(gen.gaussian() * 2.0));
    row.push_back(espkit::cell::category(static_cast<std::int32_t>(gen.below(3))));
    row.push_back(espkit::cell::category(static_cast<std::int32_t>(gen.below(2))));
    row.push_back(espkit::cell::category(label));
    d.rows.push_back(std::move(row));
  }
  d.validate();
  return d;
}

}  // namespace testutil
