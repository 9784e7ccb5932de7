#include "mixad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixad/csv.hpp"
#include "mixad/error.hpp"
#include "mixad/rng.hpp"

namespace mixad {

const char* anomaly_kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::spike: return "spike";
    case AnomalyKind::level_shift: return "shift";
    case AnomalyKind::correlation_break: return "corr";
  }
  return "unknown";
}

GroundTruth DatasetBundle::ground_truth() const {
  GroundTruth gt;
  gt.labels = labels;
  for (const InterpretationEntry& e : interpretation)
    gt.segments.push_back(CausalSegment{e.start, e.end, e.causes});
  return gt;
}

void DatasetBundle::validate() const {
  if (train.rank() != 2 || test.rank() != 2)
    throw ValueError("dataset: train/test must be N x T matrices");
  if (train.rows() != test.rows())
    throw ValueError("dataset: train has " + std::to_string(train.rows()) +
                     " features but test has " + std::to_string(test.rows()));
  if (labels.size() != test.cols())
    throw ValueError("dataset: labels length " + std::to_string(labels.size()) +
                     " does not match test length " + std::to_string(test.cols()));
  for (const InterpretationEntry& e : interpretation) {
    if (e.start > e.end)
      throw ValueError("dataset: interpretation segment start " + std::to_string(e.start) +
                       " > end " + std::to_string(e.end));
    if (e.end >= test.cols())
      throw ValueError("dataset: interpretation segment end " + std::to_string(e.end) +
                       " out of bounds (T_test=" + std::to_string(test.cols()) + ")");
    if (e.causes.empty()) throw ValueError("dataset: empty causal set in interpretation");
    for (std::size_t c : e.causes)
      if (c >= train.rows())
        throw ValueError("dataset: causal feature index " + std::to_string(c) +
                         " out of bounds (N=" + std::to_string(train.rows()) + ")");
  }
}

namespace {

// rows = timestamps, columns = features; returns N x T.
Tensor read_series_csv(const std::filesystem::path& path, std::vector<std::string>* names_out) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.size() < 2) throw IoError(path.string() + ": expected header plus data rows");
  const std::vector<std::string> header = csv::split(lines[0], ',');
  const std::size_t n = header.size();
  const std::size_t t = lines.size() - 1;
  Tensor series = Tensor::zeros({n, t});
  for (std::size_t row = 0; row < t; ++row) {
    const std::string context = path.string() + ":" + std::to_string(row + 2);
    const std::vector<std::string> fields = csv::split(lines[row + 1], ',');
    if (fields.size() != n)
      throw IoError(context + ": ragged row (" + std::to_string(fields.size()) + " cells, header has " +
                    std::to_string(n) + ")");
    for (std::size_t i = 0; i < n; ++i) {
      const double v = csv::parse_double(fields[i], context);
      if (!std::isfinite(v)) throw IoError(context + ": non-finite value '" + fields[i] + "'");
      series.values_mut()[i * t + row] = v;
    }
  }
  if (names_out != nullptr) *names_out = header;
  return series;
}

void write_series_csv(const std::filesystem::path& path, const Tensor& series,
                      const std::vector<std::string>& names) {
  const std::size_t n = series.rows(), t = series.cols();
  std::ostringstream out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << names[i];
  }
  out << '\n';
  for (std::size_t row = 0; row < t; ++row) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out << ',';
      out << csv::format(series.at(i, row));
    }
    out << '\n';
  }
  csv::atomic_write(path, out.str());
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  for (const char* name : {"train.csv", "test.csv", "labels.csv", "interpretation.csv"})
    if (!std::filesystem::exists(dir / name))
      throw IoError("dataset: missing file " + (dir / name).string());

  DatasetBundle bundle;
  bundle.train = read_series_csv(dir / "train.csv", &bundle.feature_names);
  std::vector<std::string> test_names;
  bundle.test = read_series_csv(dir / "test.csv", &test_names);
  if (test_names != bundle.feature_names)
    throw IoError("dataset: train.csv and test.csv disagree on feature names");

  {
    const std::filesystem::path path = dir / "labels.csv";
    const std::vector<std::string> lines = csv::read_lines(path);
    if (lines.empty() || lines[0] != "label")
      throw IoError(path.string() + ": expected header 'label'");
    for (std::size_t row = 1; row < lines.size(); ++row) {
      const std::string context = path.string() + ":" + std::to_string(row + 1);
      if (lines[row] == "0") bundle.labels.push_back(0);
      else if (lines[row] == "1") bundle.labels.push_back(1);
      else throw IoError(context + ": label must be 0 or 1, got '" + lines[row] + "'");
    }
  }

  {
    const std::filesystem::path path = dir / "interpretation.csv";
    const std::vector<std::string> lines = csv::read_lines(path);
    if (lines.empty() || lines[0] != "start,end,causes")
      throw IoError(path.string() + ": expected header 'start,end,causes'");
    for (std::size_t row = 1; row < lines.size(); ++row) {
      const std::string context = path.string() + ":" + std::to_string(row + 1);
      const std::vector<std::string> fields = csv::split(lines[row], ',');
      if (fields.size() != 3) throw IoError(context + ": expected start,end,causes");
      InterpretationEntry entry;
      entry.start = csv::parse_index(fields[0], context);
      entry.end = csv::parse_index(fields[1], context);
      if (entry.start > entry.end)
        throw IoError(context + ": segment start " + fields[0] + " > end " + fields[1]);
      for (const std::string& c : csv::split(fields[2], ';'))
        entry.causes.push_back(csv::parse_index(c, context));
      bundle.interpretation.push_back(std::move(entry));
    }
  }

  try {
    bundle.validate();
  } catch (const ValueError& e) {
    throw IoError("dataset: " + dir.string() + ": " + e.what());
  }
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  bundle.validate();
  std::filesystem::create_directories(dir);
  write_series_csv(dir / "train.csv", bundle.train, bundle.feature_names);
  write_series_csv(dir / "test.csv", bundle.test, bundle.feature_names);

  {
    std::ostringstream out;
    out << "label\n";
    for (char l : bundle.labels) out << (l ? '1' : '0') << '\n';
    csv::atomic_write(dir / "labels.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "start,end,causes\n";
    for (const InterpretationEntry& e : bundle.interpretation) {
      out << e.start << ',' << e.end << ',';
      for (std::size_t i = 0; i < e.causes.size(); ++i) {
        if (i) out << ';';
        out << e.causes[i];
      }
      out << '\n';
    }
    csv::atomic_write(dir / "interpretation.csv", out.str());
  }
}

namespace {

struct NodeSignal {
  double period1 = 0, period2 = 0;
  double amp1 = 0, amp2 = 0;
  double phase1 = 0, phase2 = 0;

  double eval(double t) const {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    return amp1 * std::sin(two_pi * t / period1 + phase1) +
           amp2 * std::sin(two_pi * t / period2 + phase2);
  }
};

struct CouplingEdge {
  std::size_t source = 0;
  double weight = 0;
  std::size_t lag = 0;
};

double stddev(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

}  // namespace

DatasetBundle generate_synthetic(const SynthConfig& cfg) {
  if (cfg.nodes < 2) throw ValueError("synth: need at least 2 nodes");
  if (cfg.period_pool.size() < 2) throw ValueError("synth: need at least 2 base periods");
  for (const AnomalySpec& spec : cfg.anomalies) {
    if (spec.span == 0) throw ValueError("synth: zero-length anomaly span");
    if (spec.causes == 0 || spec.causes > cfg.nodes)
      throw ValueError("synth: causal set size must be in [1, N]");
  }

  Rng rng(cfg.seed);
  const std::size_t n = cfg.nodes;
  const std::size_t t_total = cfg.t_train + cfg.t_test;

  // Per-node sinusoid mixtures. Periods are dealt from a shuffled pool so
  // that, when the pool holds at least 2N entries, no two nodes share a
  // frequency; shared frequencies would keep node pairs correlated even with
  // their coupling removed, hiding correlation-break anomalies.
  const std::size_t pool_size = cfg.period_pool.size();
  std::vector<std::size_t> period_deal(pool_size);
  std::iota(period_deal.begin(), period_deal.end(), 0);
  rng.shuffle(period_deal);
  std::vector<NodeSignal> signals(n);
  for (std::size_t i = 0; i < n; ++i) {
    signals[i].period1 = cfg.period_pool[period_deal[i % pool_size]];
    signals[i].period2 = cfg.period_pool[period_deal[(n + i) % pool_size]];
    signals[i].amp1 = rng.uniform(0.6, 1.0);
    signals[i].amp2 = rng.uniform(0.2, 0.35);
    signals[i].phase1 = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    signals[i].phase2 = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  }

  // Sparse directed coupling graph.
  std::vector<std::vector<CouplingEdge>> incoming(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < cfg.coupling_density)
        incoming[i].push_back({j, rng.uniform(0.4, 0.7), 1 + static_cast<std::size_t>(rng.integer(5))});
    }
  }

  // Components are kept separate so the correlation break can swap out just
  // the coupling term.
  std::vector<std::vector<double>> base(n, std::vector<double>(t_total));
  std::vector<std::vector<double>> coupling(n, std::vector<double>(t_total));
  std::vector<std::vector<double>> noise(n, std::vector<double>(t_total));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < t_total; ++t) base[i][t] = signals[i].eval(static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < t_total; ++t) {
      double acc = 0;
      for (const CouplingEdge& e : incoming[i])
        acc += e.weight * signals[e.source].eval(static_cast<double>(t) - static_cast<double>(e.lag));
      coupling[i][t] = acc;
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < t_total; ++t) noise[i][t] = cfg.noise_sigma * rng.normal();

  // Anomaly placement: evenly spaced inside the test span with margins, in
  // the order the specs are listed. Margins scale with the test length so
  // small desk configs stay feasible; the head margin keeps an anomaly-free
  // run for scoring to settle on.
  const std::size_t margin_head = std::max<std::size_t>(30, cfg.t_test / 10);
  const std::size_t margin_tail = std::max<std::size_t>(10, cfg.t_test / 40);
  const std::size_t min_gap = std::max<std::size_t>(10, cfg.t_test / 30);
  std::size_t span_sum = 0;
  for (const AnomalySpec& spec : cfg.anomalies) span_sum += spec.span;
  const std::size_t k = cfg.anomalies.size();
  if (k > 0) {
    const std::size_t needed = margin_head + margin_tail + span_sum + (k - 1) * min_gap;
    if (needed > cfg.t_test)
      throw ValueError("synth: anomaly spans infeasible, need " + std::to_string(needed) +
                       " test steps but have " + std::to_string(cfg.t_test));
  }

  std::vector<std::pair<std::size_t, std::size_t>> spans;  // test-relative
  if (k > 0) {
    const std::size_t slack = cfg.t_test - margin_head - margin_tail - span_sum;
    const std::size_t gap = k > 1 ? std::max(min_gap, slack / (k - 1)) : 0;
    std::size_t cursor = margin_head;
    for (const AnomalySpec& spec : cfg.anomalies) {
      spans.emplace_back(cursor, cursor + spec.span - 1);
      cursor += spec.span + gap;
    }
  }

  // Causal sets. Correlation breaks need nodes with real incoming coupling,
  // picked by descending coupling strength with a per-segment offset.
  std::vector<double> coupling_strength(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    coupling_strength[i] = stddev(
        std::span<const double>(coupling[i].data(), cfg.t_train));
  std::vector<std::size_t> by_strength(n);
  std::iota(by_strength.begin(), by_strength.end(), 0);
  std::stable_sort(by_strength.begin(), by_strength.end(), [&](std::size_t a, std::size_t b) {
    return coupling_strength[a] > coupling_strength[b];
  });
  std::size_t eligible = 0;
  while (eligible < n && !incoming[by_strength[eligible]].empty()) ++eligible;

  std::vector<std::vector<std::size_t>> causal_sets(k);
  std::size_t corr_break_count = 0;
  for (std::size_t s = 0; s < k; ++s) {
    const AnomalySpec& spec = cfg.anomalies[s];
    if (spec.kind == AnomalyKind::correlation_break) {
      if (eligible < spec.causes)
        throw ValueError("synth: correlation break needs " + std::to_string(spec.causes) +
                         " coupled nodes but only " + std::to_string(eligible) + " have coupling");
      for (std::size_t c = 0; c < spec.causes; ++c)
        causal_sets[s].push_back(by_strength[(corr_break_count * spec.causes + c) % eligible]);
      ++corr_break_count;
    } else {
      std::vector<std::size_t> pool(n);
      std::iota(pool.begin(), pool.end(), 0);
      rng.shuffle(pool);
      causal_sets[s].assign(pool.begin(), pool.begin() + spec.causes);
    }
    std::sort(causal_sets[s].begin(), causal_sets[s].end());
  }

  // Compose the clean series, then inject.
  DatasetBundle bundle;
  bundle.train = Tensor::zeros({n, cfg.t_train});
  bundle.test = Tensor::zeros({n, cfg.t_test});
  bundle.labels.assign(cfg.t_test, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < cfg.t_train; ++t)
      bundle.train.values_mut()[i * cfg.t_train + t] = base[i][t] + coupling[i][t] + noise[i][t];
    for (std::size_t t = 0; t < cfg.t_test; ++t) {
      const std::size_t g = cfg.t_train + t;
      bundle.test.values_mut()[i * cfg.t_test + t] = base[i][g] + coupling[i][g] + noise[i][g];
    }
  }

  std::vector<double> train_sigma(n);
  for (std::size_t i = 0; i < n; ++i)
    train_sigma[i] =
        stddev(std::span<const double>(bundle.train.values().data() + i * cfg.t_train,
                                       cfg.t_train));

  for (std::size_t s = 0; s < k; ++s) {
    const AnomalySpec& spec = cfg.anomalies[s];
    const auto [start, end] = spans[s];
    for (std::size_t t = start; t <= end; ++t) bundle.labels[t] = 1;
    for (std::size_t i : causal_sets[s]) {
      double* row = bundle.test.values_mut().data() + i * cfg.t_test;
      switch (spec.kind) {
        case AnomalyKind::spike:
          for (std::size_t t = start; t <= end; ++t) row[t] += 6.0 * train_sigma[i];
          break;
        case AnomalyKind::level_shift:
          for (std::size_t t = start; t <= end; ++t) row[t] += 4.0 * train_sigma[i];
          break;
        case AnomalyKind::correlation_break: {
          const double sigma_c = coupling_strength[i];
          for (std::size_t t = start; t <= end; ++t) {
            const std::size_t g = cfg.t_train + t;
            row[t] = base[i][g] + sigma_c * rng.normal() + noise[i][g];
          }
          break;
        }
      }
    }
    InterpretationEntry entry;
    entry.start = start;
    entry.end = end;
    entry.causes = causal_sets[s];
    entry.kind = anomaly_kind_name(spec.kind);
    bundle.interpretation.push_back(std::move(entry));
  }

  bundle.feature_names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) bundle.feature_names.push_back("f" + std::to_string(i));
  bundle.sampling_note = "synthetic, unit sampling interval";
  bundle.validate();
  return bundle;
}

}  // namespace mixad
