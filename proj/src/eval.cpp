#include "mixad/eval.hpp"

#include <algorithm>
#include <string>

#include "mixad/error.hpp"
#include "mixad/log.hpp"

namespace mixad {

std::vector<char> point_adjust(const std::vector<char>& pred, const std::vector<char>& labels) {
  if (pred.size() != labels.size())
    throw ShapeError("point_adjust: predictions and labels differ in length");
  std::vector<char> adjusted = pred;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (!labels[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < labels.size() && labels[j + 1]) ++j;
    bool hit = false;
    for (std::size_t t = i; t <= j && !hit; ++t) hit = pred[t];
    if (hit)
      for (std::size_t t = i; t <= j; ++t) adjusted[t] = 1;
    i = j + 1;
  }
  return adjusted;
}

Prf prf1(const std::vector<char>& pred, const std::vector<char>& labels) {
  if (pred.size() != labels.size())
    throw ShapeError("prf1: predictions and labels differ in length");
  Prf out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && labels[i]) ++out.tp;
    else if (pred[i] && !labels[i]) ++out.fp;
    else if (!pred[i] && labels[i]) ++out.fn;
  }
  const std::size_t predicted = out.tp + out.fp;
  const std::size_t actual = out.tp + out.fn;
  out.precision = predicted > 0 ? static_cast<double>(out.tp) / static_cast<double>(predicted) : 0.0;
  out.recall = actual > 0 ? static_cast<double>(out.tp) / static_cast<double>(actual) : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double hitrate(const std::vector<std::pair<std::size_t, double>>& ranking,
               const std::vector<std::size_t>& ground_truth, std::size_t p_pct) {
  if (ground_truth.empty()) throw ValueError("hitrate: empty ground-truth set");
  const std::size_t gt_size = ground_truth.size();
  std::size_t k = (p_pct * gt_size) / 100;  // floor(P% * |GT|)
  k = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t feature = ranking[r].first;
    if (std::find(ground_truth.begin(), ground_truth.end(), feature) != ground_truth.end())
      ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gt_size);
}

EvalReport evaluate_run(const Tensor& s_prime, std::span<const double> agg, double threshold,
                        const GroundTruth& gt) {
  if (agg.size() != gt.labels.size())
    throw ShapeError("evaluate_run: scores and labels differ in length");
  std::vector<char> pred(agg.size());
  for (std::size_t i = 0; i < agg.size(); ++i) pred[i] = agg[i] > threshold;
  const std::vector<char> adjusted = point_adjust(pred, gt.labels);
  const Prf metrics = prf1(adjusted, gt.labels);

  EvalReport report;
  report.precision = metrics.precision;
  report.recall = metrics.recall;
  report.f1 = metrics.f1;
  report.threshold = threshold;

  double sum100 = 0.0, sum150 = 0.0;
  for (const CausalSegment& seg : gt.segments) {
    if (seg.end >= gt.labels.size() || seg.start > seg.end)
      throw ValueError("evaluate_run: ground-truth segment out of range");
    SegmentReport sr;
    sr.start = seg.start;
    sr.end = seg.end;
    if (seg.causes.empty()) {
      log_info("evaluate_run: segment " + std::to_string(seg.start) + ".." +
               std::to_string(seg.end) + " has no causal features, skipped");
      continue;
    }
    for (std::size_t t = seg.start; t <= seg.end && !sr.detected; ++t) sr.detected = adjusted[t];
    if (sr.detected) {
      const AnomalySegment ranked = rank_causes(s_prime, seg.start, seg.end);
      sr.anchor = ranked.anchor;
      sr.hit100 = hitrate(ranked.ranking, seg.causes, 100);
      sr.hit150 = hitrate(ranked.ranking, seg.causes, 150);
      for (std::size_t r = 0; r < std::min(seg.causes.size(), ranked.ranking.size()); ++r)
        sr.top_features.push_back(ranked.ranking[r].first);
    } else {
      ++report.missed_segments;
    }
    sum100 += sr.hit100;
    sum150 += sr.hit150;
    report.segments.push_back(std::move(sr));
  }
  if (!report.segments.empty()) {
    report.hitrate100 = sum100 / static_cast<double>(report.segments.size());
    report.hitrate150 = sum150 / static_cast<double>(report.segments.size());
  }
  return report;
}

double recall_on_spans(const std::vector<char>& adjusted_pred, const std::vector<char>& labels,
                       const std::vector<std::pair<std::size_t, std::size_t>>& spans) {
  std::size_t tp = 0, total = 0;
  for (const auto& [start, end] : spans) {
    for (std::size_t t = start; t <= end && t < labels.size(); ++t) {
      if (!labels[t]) continue;
      ++total;
      if (adjusted_pred[t]) ++tp;
    }
  }
  return total > 0 ? static_cast<double>(tp) / static_cast<double>(total) : 0.0;
}

}  // namespace mixad
