#include "mixad/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixad/error.hpp"

namespace mixad {

std::vector<std::pair<std::size_t, std::size_t>> segment_detected(
    const std::vector<char>& flagged) {
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  std::size_t i = 0;
  while (i < flagged.size()) {
    if (!flagged[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < flagged.size() && flagged[j + 1]) ++j;
    segments.emplace_back(i, j);
    i = j + 1;
  }
  return segments;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw ValueError("pearson: traces must have equal length >= 2");
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
    const double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  // Constant traces carry no co-movement evidence.
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

AnomalySegment rank_causes(const Tensor& s_prime, std::size_t start, std::size_t end) {
  if (s_prime.rank() != 2) throw ShapeError("rank_causes: expected T x N scores");
  if (start > end || end >= s_prime.rows())
    throw ValueError("rank_causes: segment [" + std::to_string(start) + ", " +
                     std::to_string(end) + "] out of range");
  const std::size_t n = s_prime.cols();
  const std::size_t len = end - start + 1;

  AnomalySegment seg;
  seg.start = start;
  seg.end = end;

  // Anchor: feature with the highest score anywhere in the segment.
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t t = start; t <= end; ++t) peak = std::max(peak, s_prime.at(t, i));
    if (peak > best_score) {
      best_score = peak;
      seg.anchor = i;
    }
  }

  std::vector<std::pair<std::size_t, double>> weights(n);
  if (len == 1) {
    for (std::size_t i = 0; i < n; ++i) weights[i] = {i, s_prime.at(start, i)};
  } else {
    std::vector<double> anchor_trace(len), trace(len);
    for (std::size_t t = 0; t < len; ++t) anchor_trace[t] = s_prime.at(start + t, seg.anchor);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == seg.anchor) {
        weights[i] = {i, 1.0};
        continue;
      }
      for (std::size_t t = 0; t < len; ++t) trace[t] = s_prime.at(start + t, i);
      weights[i] = {i, std::fabs(pearson(trace, anchor_trace))};
    }
  }

  std::stable_sort(weights.begin(), weights.end(), [&seg](const auto& a, const auto& b) {
    if (a.first == seg.anchor) return b.first != seg.anchor;
    if (b.first == seg.anchor) return false;
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  seg.ranking = std::move(weights);
  return seg;
}

}  // namespace mixad
