#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixad/error.hpp"
#include "mixad/interpret.hpp"
#include "mixad/rng.hpp"

using namespace mixad;

namespace {

Tensor scores_from(const std::vector<std::vector<double>>& cols) {
  // cols[i] is feature i's trace; returns T x N.
  const std::size_t n = cols.size(), t = cols[0].size();
  Tensor s = Tensor::zeros({t, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < t; ++r) s.values_mut()[r * n + i] = cols[i][r];
  return s;
}

double pearson_ref(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0 || vb == 0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("segment_detected finds maximal runs") {
  const std::vector<char> flagged = {0, 1, 1, 0, 1};
  auto segments = segment_detected(flagged);
  REQUIRE(segments.size() == 2);
  CHECK(segments[0] == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(segments[1] == std::pair<std::size_t, std::size_t>{4, 4});

  CHECK(segment_detected(std::vector<char>{0, 0, 0}).empty());
  CHECK(segment_detected(std::vector<char>{}).empty());

  auto all = segment_detected(std::vector<char>{1, 1, 1});
  REQUIRE(all.size() == 1);
  CHECK(all[0] == std::pair<std::size_t, std::size_t>{0, 2});
}

TEST_CASE("segment_detected matches a run-length oracle on random input") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<char> flagged(40);
    for (char& f : flagged) f = rng.uniform() < 0.4;
    auto segments = segment_detected(flagged);
    // Oracle: reconstruct the mask from the segments and check maximality.
    std::vector<char> rebuilt(flagged.size(), 0);
    for (auto [s, e] : segments) {
      CHECK(s <= e);
      for (std::size_t t = s; t <= e; ++t) rebuilt[t] = 1;
      if (s > 0) CHECK_FALSE(static_cast<bool>(flagged[s - 1]));
      if (e + 1 < flagged.size()) CHECK_FALSE(static_cast<bool>(flagged[e + 1]));
    }
    CHECK(rebuilt == flagged);
  }
}

TEST_CASE("identical traces tie at |r|=1 and break by index") {
  // Features 1 and 2 identical; feature 0 is noise-free distinct.
  Tensor s = scores_from({{0.0, 0.1, 0.0, 0.2}, {0.1, 0.9, 0.4, 0.3}, {0.1, 0.9, 0.4, 0.3}});
  AnomalySegment seg = rank_causes(s, 0, 3);
  CHECK(seg.anchor == 1);  // highest score, lower index of the identical pair
  REQUIRE(seg.ranking.size() == 3);
  CHECK(seg.ranking[0].first == 1);
  CHECK(seg.ranking[0].second == doctest::Approx(1.0));
  CHECK(seg.ranking[1].first == 2);
  CHECK(seg.ranking[1].second == doctest::Approx(1.0));
}

TEST_CASE("anti-correlated traces rank alongside the anchor") {
  const std::vector<double> anchor = {0.0, 1.0, 0.2, 0.8};
  // Negative affine image of the anchor: |r| = 1 but a strictly lower peak,
  // so the anchor choice is not contested.
  std::vector<double> negated(anchor.size());
  for (std::size_t i = 0; i < anchor.size(); ++i) negated[i] = 0.9 - 0.8 * anchor[i];
  Tensor s = scores_from({negated, {0.3, 0.1, 0.25, 0.31}, anchor});
  AnomalySegment seg = rank_causes(s, 0, 3);
  CHECK(seg.anchor == 2);
  CHECK(seg.ranking[0].first == 2);
  CHECK(seg.ranking[1].first == 0);  // |r| = 1 via anti-correlation
  CHECK(seg.ranking[1].second == doctest::Approx(1.0));
}

TEST_CASE("five-feature ranking matches the covariance-formula oracle") {
  Rng rng(7);
  std::vector<std::vector<double>> cols(5, std::vector<double>(12));
  for (auto& col : cols)
    for (double& v : col) v = rng.uniform(0.0, 1.0);
  Tensor s = scores_from(cols);
  AnomalySegment seg = rank_causes(s, 2, 9);

  // Oracle on the segment slice.
  std::vector<std::vector<double>> slice(5);
  for (std::size_t i = 0; i < 5; ++i)
    slice[i] = std::vector<double>(cols[i].begin() + 2, cols[i].begin() + 10);
  double best = -1;
  std::size_t anchor = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (double v : slice[i])
      if (v > best) {
        best = v;
        anchor = i;
      }
  CHECK(seg.anchor == anchor);
  for (const auto& [feature, weight] : seg.ranking) {
    const double expect =
        feature == anchor ? 1.0 : std::fabs(pearson_ref(slice[feature], slice[anchor]));
    CHECK(weight == doctest::Approx(expect).epsilon(1e-12));
    CHECK(weight <= 1.0 + 1e-12);
  }
  for (std::size_t r = 1; r + 1 < seg.ranking.size(); ++r)
    CHECK(seg.ranking[r].second >= seg.ranking[r + 1].second);
}

TEST_CASE("ranking is invariant to positive affine rescaling") {
  Rng rng(11);
  std::vector<std::vector<double>> cols(4, std::vector<double>(10));
  for (auto& col : cols)
    for (double& v : col) v = rng.uniform(0.0, 1.0);
  // Make feature 3 clearly maximal so the anchor survives rescaling.
  for (double& v : cols[3]) v += 2.0;
  Tensor s1 = scores_from(cols);
  AnomalySegment seg1 = rank_causes(s1, 0, 9);

  auto rescaled = cols;
  for (double& v : rescaled[1]) v = 0.3 * v + 0.05;  // positive affine
  Tensor s2 = scores_from(rescaled);
  AnomalySegment seg2 = rank_causes(s2, 0, 9);
  REQUIRE(seg1.ranking.size() == seg2.ranking.size());
  for (std::size_t r = 0; r < seg1.ranking.size(); ++r) {
    CHECK(seg1.ranking[r].first == seg2.ranking[r].first);
    CHECK(seg1.ranking[r].second == doctest::Approx(seg2.ranking[r].second).epsilon(1e-10));
  }
}

TEST_CASE("constant-in-segment features get weight zero") {
  Tensor s = scores_from({{0.5, 0.5, 0.5}, {0.1, 0.9, 0.2}});
  AnomalySegment seg = rank_causes(s, 0, 2);
  CHECK(seg.anchor == 1);
  CHECK(seg.ranking[1].first == 0);
  CHECK(seg.ranking[1].second == 0.0);
}

TEST_CASE("length-1 segments fall back to raw score ranking") {
  Tensor s = scores_from({{0.2}, {0.9}, {0.5}});
  AnomalySegment seg = rank_causes(s, 0, 0);
  CHECK(seg.anchor == 1);
  REQUIRE(seg.ranking.size() == 3);
  CHECK(seg.ranking[0].first == 1);
  CHECK(seg.ranking[1].first == 2);
  CHECK(seg.ranking[2].first == 0);
  CHECK(seg.ranking[0].second == doctest::Approx(0.9));
}

TEST_CASE("segment bounds are validated") {
  Tensor s = scores_from({{0.1, 0.2}});
  CHECK_THROWS_AS(rank_causes(s, 1, 0), ValueError);
  CHECK_THROWS_AS(rank_causes(s, 0, 5), ValueError);
}
