#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

// One attention snapshot (N x m) per window end: snapshot j belongs to
// timestamp w - 1 + j of the scored series.
struct AttentionTrace {
  std::size_t window = 0;
  std::size_t series_len = 0;
  std::vector<Tensor> snapshots;
};

// Jensen-Shannon divergence with base-2 logs, bounded to [0, 1]. Inputs must
// be nonnegative and sum to 1 within 1e-6; they are renormalized internally.
double jsd(std::span<const double> p, std::span<const double> q);

// s[t][i] = jsd of node i's attention rows at t-1 and t. Timestamps before
// the second snapshot score 0.
Tensor attention_scores(const AttentionTrace& trace);

// Dominant period from the real-FFT modulus spectrum: P = round(T / k*) with
// k* the argmax over non-DC bins. Returns nullopt for flat spectra
// (max modulus < 3x median modulus off DC) and constant series.
std::optional<std::size_t> detect_period(std::span<const double> series);

// Per feature: when a period P < T/2 is detected, estimate the seasonal
// component (centered moving-average detrend, then mean-centered phase means)
// and subtract it; otherwise the column passes through unchanged.
Tensor deseasonalize(const Tensor& s, std::vector<std::optional<std::size_t>>* periods_out);

// agg_t = max over features of s'[t].
std::vector<double> aggregate_max(const Tensor& s_prime);

struct ScoreSeries {
  Tensor s;        // T x N
  Tensor s_prime;  // T x N
  std::vector<double> agg;
  std::vector<std::optional<std::size_t>> period;
};

ScoreSeries score_trace(const AttentionTrace& trace);

struct Threshold {
  double cut = 0;
  std::vector<char> flagged;  // flagged[t] = agg[t] > cut
  double precision = 0, recall = 0, f1 = 0;
  bool degenerate_labels = false;
};

// Grid search over evenly spaced quantiles of agg, scoring each candidate by
// point-adjusted F1; ties resolve to the lower threshold (higher recall).
Threshold best_f1_threshold(std::span<const double> agg, const std::vector<char>& labels,
                            std::size_t grid = 200);

}  // namespace mixad
