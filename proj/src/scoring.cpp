#include "mixad/scoring.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "mixad/error.hpp"
#include "mixad/eval.hpp"
#include "mixad/log.hpp"

namespace mixad {

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty())
    throw ShapeError("jsd: distributions must have equal nonzero length");
  double sp = 0.0, sq = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ValueError("jsd: negative entry in p");
    sp += v;
  }
  for (double v : q) {
    if (v < 0.0) throw ValueError("jsd: negative entry in q");
    sq += v;
  }
  if (std::fabs(sp - 1.0) > 1e-6 || std::fabs(sq - 1.0) > 1e-6)
    throw ValueError("jsd: input does not sum to 1 within 1e-6");

  double div = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i] / sp;
    const double qi = q[i] / sq;
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) div += 0.5 * pi * std::log2(pi / mi);
    if (qi > 0.0) div += 0.5 * qi * std::log2(qi / mi);
  }
  return std::clamp(div, 0.0, 1.0);
}

Tensor attention_scores(const AttentionTrace& trace) {
  if (trace.snapshots.size() < 2)
    throw ValueError("attention_scores: need at least 2 snapshots, got " +
                     std::to_string(trace.snapshots.size()));
  if (trace.series_len != trace.window - 1 + trace.snapshots.size())
    throw ValueError("attention_scores: trace length inconsistent with series length");
  const std::size_t n = trace.snapshots[0].rows();
  const std::size_t m = trace.snapshots[0].cols();
  Tensor s = Tensor::zeros({trace.series_len, n});
  for (std::size_t j = 1; j < trace.snapshots.size(); ++j) {
    const Tensor& prev = trace.snapshots[j - 1];
    const Tensor& cur = trace.snapshots[j];
    if (prev.shape() != cur.shape())
      throw ShapeError("attention_scores: snapshot shape changed mid-trace");
    const std::size_t t = trace.window - 1 + j;
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> prow(prev.values().data() + i * m, m);
      const std::span<const double> crow(cur.values().data() + i * m, m);
      s.values_mut()[t * n + i] = jsd(prow, crow);
    }
  }
  return s;
}

std::optional<std::size_t> detect_period(std::span<const double> series) {
  const std::size_t t = series.size();
  if (t < 4) throw ValueError("detect_period: need at least 4 samples");
  for (double v : series)
    if (!std::isfinite(v)) throw NumericError("detect_period: non-finite sample");

  const std::size_t bins = t / 2 + 1;
  std::vector<double> input(series.begin(), series.end());
  std::vector<fftw_complex> output(bins);
  fftw_plan plan =
      fftw_plan_dft_r2c_1d(static_cast<int>(t), input.data(), output.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> modulus(bins);
  for (std::size_t k = 0; k < bins; ++k)
    modulus[k] = std::hypot(output[k][0], output[k][1]);

  // Constant (or numerically constant) series: nothing off DC.
  double peak = 0.0;
  std::size_t peak_bin = 1;
  for (std::size_t k = 1; k < bins; ++k) {
    if (modulus[k] > peak) {
      peak = modulus[k];
      peak_bin = k;
    }
  }
  if (peak < 1e-9 * std::max(1.0, modulus[0])) return std::nullopt;

  // Flatness rule: a real peak must dominate the off-DC median.
  std::vector<double> off_dc(modulus.begin() + 1, modulus.end());
  std::nth_element(off_dc.begin(), off_dc.begin() + off_dc.size() / 2, off_dc.end());
  const double median = off_dc[off_dc.size() / 2];
  if (peak < 3.0 * median) return std::nullopt;

  const auto period = static_cast<std::size_t>(
      std::llround(static_cast<double>(t) / static_cast<double>(peak_bin)));
  if (period < 2) return std::nullopt;
  return period;
}

namespace {

// Seasonal component of one series: detrend with a centered moving average of
// width p (the classic 2xP scheme for even p), average the detrended values
// by phase, and center the phase means.
std::vector<double> seasonal_component(std::span<const double> x, std::size_t p) {
  const std::size_t t = x.size();
  const std::size_t half = p / 2;
  std::vector<double> detrended(t, 0.0);
  std::vector<char> valid(t, 0);
  for (std::size_t i = half; i + half < t; ++i) {
    double trend;
    if (p % 2 == 0) {
      double acc = 0.5 * x[i - half] + 0.5 * x[i + half];
      for (std::size_t j = i - half + 1; j < i + half; ++j) acc += x[j];
      trend = acc / static_cast<double>(p);
    } else {
      double acc = 0.0;
      for (std::size_t j = i - half; j <= i + half; ++j) acc += x[j];
      trend = acc / static_cast<double>(p);
    }
    detrended[i] = x[i] - trend;
    valid[i] = 1;
  }

  std::vector<double> phase_sum(p, 0.0);
  std::vector<std::size_t> phase_count(p, 0);
  for (std::size_t i = 0; i < t; ++i) {
    if (!valid[i]) continue;
    phase_sum[i % p] += detrended[i];
    ++phase_count[i % p];
  }
  std::vector<double> seasonal(p, 0.0);
  double mean = 0.0;
  for (std::size_t ph = 0; ph < p; ++ph) {
    seasonal[ph] = phase_count[ph] > 0 ? phase_sum[ph] / static_cast<double>(phase_count[ph])
                                       : 0.0;
    mean += seasonal[ph];
  }
  mean /= static_cast<double>(p);
  for (double& v : seasonal) v -= mean;
  return seasonal;
}

}  // namespace

Tensor deseasonalize(const Tensor& s, std::vector<std::optional<std::size_t>>* periods_out) {
  if (s.rank() != 2) throw ShapeError("deseasonalize: expected T x N scores");
  const std::size_t t = s.rows(), n = s.cols();
  Tensor out = Tensor::zeros({t, n});
  if (periods_out != nullptr) periods_out->assign(n, std::nullopt);

  std::vector<double> column(t);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < t; ++r) column[r] = s.at(r, i);
    std::optional<std::size_t> period = detect_period(column);
    if (period.has_value() && 2 * *period >= t) period = std::nullopt;
    if (!period.has_value()) {
      for (std::size_t r = 0; r < t; ++r) out.values_mut()[r * n + i] = column[r];
      continue;
    }
    if (periods_out != nullptr) (*periods_out)[i] = period;
    const std::vector<double> seasonal = seasonal_component(column, *period);
    for (std::size_t r = 0; r < t; ++r)
      out.values_mut()[r * n + i] = column[r] - seasonal[r % *period];
  }
  return out;
}

std::vector<double> aggregate_max(const Tensor& s_prime) {
  const std::size_t t = s_prime.rows(), n = s_prime.cols();
  std::vector<double> agg(t);
  for (std::size_t r = 0; r < t; ++r) {
    double best = s_prime.at(r, 0);
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, s_prime.at(r, i));
    agg[r] = best;
  }
  return agg;
}

ScoreSeries score_trace(const AttentionTrace& trace) {
  ScoreSeries out;
  out.s = attention_scores(trace);
  out.s_prime = deseasonalize(out.s, &out.period);
  out.agg = aggregate_max(out.s_prime);
  return out;
}

Threshold best_f1_threshold(std::span<const double> agg, const std::vector<char>& labels,
                            std::size_t grid) {
  if (agg.size() != labels.size())
    throw ShapeError("best_f1_threshold: scores and labels differ in length");
  if (agg.empty()) throw ValueError("best_f1_threshold: empty input");
  if (grid < 2) throw ValueError("best_f1_threshold: grid must be >= 2");

  bool any_true = false, any_false = false;
  for (char l : labels) (l ? any_true : any_false) = true;
  Threshold best;
  best.degenerate_labels = !(any_true && any_false);
  if (best.degenerate_labels)
    log_info("best_f1_threshold: degenerate labels (all " +
             std::string(any_true ? "anomalous" : "normal") + "); metrics will be 0");

  std::vector<double> sorted(agg.begin(), agg.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&sorted](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };

  double best_f1 = -1.0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double cut = quantile(static_cast<double>(g) / static_cast<double>(grid - 1));
    std::vector<char> flagged(agg.size());
    for (std::size_t i = 0; i < agg.size(); ++i) flagged[i] = agg[i] > cut;
    const std::vector<char> adjusted = point_adjust(flagged, labels);
    const Prf metrics = prf1(adjusted, labels);
    if (metrics.f1 > best_f1) {
      best_f1 = metrics.f1;
      best.cut = cut;
      best.flagged = std::move(flagged);
      best.precision = metrics.precision;
      best.recall = metrics.recall;
      best.f1 = metrics.f1;
    }
  }
  return best;
}

}  // namespace mixad
