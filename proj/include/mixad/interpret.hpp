#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

// Ranked explanation of one detected segment. The anchor (feature with the
// highest score in the segment) always ranks first with weight 1; the rest
// are ordered by |Pearson r| against the anchor trace, descending, ties by
// ascending feature index. For length-1 segments, where correlation is
// undefined, the weights are the raw s' values at that timestamp.
struct AnomalySegment {
  std::size_t start = 0, end = 0;  // inclusive
  std::size_t anchor = 0;
  std::vector<std::pair<std::size_t, double>> ranking;  // (feature, weight)
};

// Maximal runs of flagged timestamps as (start, end) inclusive spans.
std::vector<std::pair<std::size_t, std::size_t>> segment_detected(
    const std::vector<char>& flagged);

// Pearson correlation of two equal-length traces; 0 when either is constant.
double pearson(std::span<const double> a, std::span<const double> b);

AnomalySegment rank_causes(const Tensor& s_prime, std::size_t start, std::size_t end);

}  // namespace mixad
