#include <doctest.h>

#include "qshadow/binning.hpp"
#include "../test_support.hpp"

using namespace qshadow;
using analysis::DiscBinner;
using analysis::bin_counts;

TEST_CASE("radius 1 binning is the identity") {
  const auto m = testing::random_map(Grid(32, 32), 42, false);
  const auto out = bin_counts(m, DetectionDisc(1));
  for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(out.values[i] == m.values[i]);
}

TEST_CASE("uniform map: interior disc sums count lattice points") {
  Grid g(64, 64);
  ScalarMap m(g, MapRole::Intensity, 2.5);
  const auto out = bin_counts(m, DetectionDisc(5));
  CHECK(testing::brute_force_disc_count(5) == 69);
  CHECK(out.at(32, 32) == doctest::Approx(2.5 * 69).epsilon(1e-12));
  DiscBinner binner(g, DetectionDisc(5));
  CHECK(binner.footprint() == 69);
}

TEST_CASE("fast binning equals the brute-force oracle bitwise on integers") {
  for (int radius : {1, 2, 3, 5, 8}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto m = testing::random_map(Grid(32, 32), seed * 17 + radius, true);
      const auto fast = bin_counts(m, DetectionDisc(radius));
      const auto slow = testing::brute_force_bin(m, radius);
      for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(fast.values[i] == slow.values[i]);
    }
  }
}

TEST_CASE("fast binning matches brute force on real-valued maps") {
  for (int radius : {2, 5, 9}) {
    const auto m = testing::random_map(Grid(32, 24), 1000 + radius, false);
    const auto fast = bin_counts(m, DetectionDisc(radius));
    const auto slow = testing::brute_force_bin(m, radius);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      CHECK(fast.values[i] == doctest::Approx(slow.values[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("binning handles discs larger than the frame") {
  const auto m = testing::random_map(Grid(8, 8), 3, true);
  const auto fast = bin_counts(m, DetectionDisc(20));
  const auto slow = testing::brute_force_bin(m, 20);
  double total = 0.0;
  for (double v : m.values) total += v;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    CHECK(fast.values[i] == slow.values[i]);
    CHECK(fast.values[i] == total);  // disc covers the whole frame everywhere
  }
}

TEST_CASE("binning is linear") {
  Grid g(24, 24);
  const auto a = testing::random_map(g, 7, false);
  const auto b = testing::random_map(g, 8, false);
  ScalarMap combo(g, MapRole::Intensity);
  for (std::size_t i = 0; i < combo.values.size(); ++i) {
    combo.values[i] = 2.0 * a.values[i] - 3.0 * b.values[i];
  }
  const auto ba = bin_counts(a, DetectionDisc(4));
  const auto bb = bin_counts(b, DetectionDisc(4));
  const auto bc = bin_counts(combo, DetectionDisc(4));
  for (std::size_t i = 0; i < bc.values.size(); ++i) {
    CHECK(bc.values[i] == doctest::Approx(2.0 * ba.values[i] - 3.0 * bb.values[i]).epsilon(1e-10));
  }
}

TEST_CASE("sum_at agrees with the full map") {
  Grid g(32, 32);
  const auto m = testing::random_map(g, 9, false);
  DiscBinner binner(g, DetectionDisc(6));
  const auto full = bin_counts(m, DetectionDisc(6));
  for (int y : {0, 3, 16, 31}) {
    for (int x : {0, 5, 16, 31}) {
      CHECK(binner.sum_at(m.values.data(), x, y) ==
            doctest::Approx(full.at(x, y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("disc radius must be positive") {
  CHECK_THROWS_AS(DetectionDisc(0), ParameterError);
  CHECK_THROWS_AS(DetectionDisc(-3), ParameterError);
}
