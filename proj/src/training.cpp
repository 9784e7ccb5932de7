#include "mixad/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mixad/adam.hpp"
#include "mixad/error.hpp"
#include "mixad/kernels.hpp"
#include "mixad/log.hpp"
#include "mixad/ops.hpp"

namespace mixad {

NormalizationStats fit_normalizer(const Tensor& train) {
  if (train.rank() != 2) throw ShapeError("fit_normalizer: expected N x T series");
  const std::size_t n = train.rows(), t = train.cols();
  NormalizationStats stats;
  stats.min.resize(n);
  stats.max.resize(n);
  stats.degenerate.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = train.values().data() + i * t;
    double lo = row[0], hi = row[0];
    for (std::size_t j = 1; j < t; ++j) {
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    stats.min[i] = lo;
    stats.max[i] = hi;
    stats.degenerate[i] = (hi == lo);
  }
  return stats;
}

Tensor apply_normalizer(const Tensor& x, const NormalizationStats& stats) {
  if (x.rank() != 2 || x.rows() != stats.min.size())
    throw ShapeError("apply_normalizer: series shape " + shape_str(x.shape()) +
                     " does not match stats for " + std::to_string(stats.min.size()) +
                     " features");
  const std::size_t n = x.rows(), t = x.cols();
  Tensor out = Tensor::zeros({n, t});
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = x.values().data() + i * t;
    double* dst = out.values_mut().data() + i * t;
    if (stats.degenerate[i]) {
      std::fill_n(dst, t, 0.5);
    } else {
      const double lo = stats.min[i], range = stats.max[i] - stats.min[i];
      for (std::size_t j = 0; j < t; ++j) dst[j] = (src[j] - lo) / range;
    }
  }
  return out;
}

std::vector<Tensor> make_windows(const Tensor& series, std::size_t w, std::size_t stride) {
  if (series.rank() != 2) throw ShapeError("make_windows: expected N x T series");
  if (w == 0 || stride == 0) throw ValueError("make_windows: w and stride must be positive");
  const std::size_t n = series.rows(), t = series.cols();
  if (t < w)
    throw ValueError("make_windows: series length " + std::to_string(t) +
                     " shorter than window " + std::to_string(w));
  std::vector<Tensor> windows;
  for (std::size_t start = 0; start + w <= t; start += stride) {
    Tensor win = Tensor::zeros({n, w});
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(series.values().data() + i * t + start, w,
                  win.values_mut().data() + i * w);
    windows.push_back(std::move(win));
  }
  return windows;
}

ModelConfig TrainConfig::model_config(std::size_t nodes) const {
  ModelConfig mc;
  mc.nodes = nodes;
  mc.window = window;
  mc.mem_items = mem_items;
  mc.mem_dim = mem_dim;
  mc.hidden = hidden;
  mc.cheb_k = cheb_k;
  mc.tau = tau;
  return mc;
}

void TrainConfig::validate() const {
  if (window < 2) throw ValueError("train config: window must be >= 2");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ValueError("train config: val_fraction must be in (0, 1)");
  if (patience > max_epochs) throw ValueError("train config: patience must be <= max_epochs");
  if (batch == 0 || max_epochs == 0) throw ValueError("train config: batch and epochs positive");
  if (mem_items < 2) throw ValueError("train config: mem_items must be >= 2");
  if (!(loss.margin > 0.0)) throw ValueError("train config: margin must be > 0");
  if (loss.lambda1 < 0.0 || loss.lambda2 < 0.0 || loss.lambda3 < 0.0)
    throw ValueError("train config: loss weights must be >= 0");
}

namespace {

Tensor mean_of(const std::vector<Tensor>& parts) {
  Tensor sum = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) sum = add(sum, parts[i]);
  return mul_scalar(sum, 1.0 / static_cast<double>(parts.size()));
}

void clip_gradients(std::vector<std::pair<std::string, Tensor>>& params, double max_norm) {
  if (!(max_norm > 0.0)) return;
  const auto& kt = kernels::active();
  double sq = 0.0;
  for (auto& [name, p] : params) {
    const auto g = p.grad();
    if (!g.empty()) sq += kt.dot(g.data(), g.data(), g.size());
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double factor = max_norm / norm;
  for (auto& [name, p] : params) {
    auto g = p.grad_mut();
    kt.scale(factor, g.data(), g.data(), g.size());
  }
}

struct BatchLosses {
  Tensor total;
  double mae, triplet, compact, uniform;
};

BatchLosses batch_losses(MixadModel& model, const std::vector<Tensor>& windows,
                         const std::vector<std::size_t>& order, std::size_t begin,
                         std::size_t end, const Tensor& a_norm, const LossConfig& loss_cfg) {
  std::vector<Tensor> maes, triplets, compacts;
  Tensor att_mass;
  for (std::size_t b = begin; b < end; ++b) {
    const Tensor& window = windows[order[b]];
    ForwardResult res = model.forward(window, a_norm);
    maes.push_back(reconstruction_loss(window, res.reconstruction, loss_cfg.recon));
    triplets.push_back(triplet_loss(res.memory.snapshot.q, model.memory().items,
                                    res.memory.snapshot.pos, res.memory.snapshot.neg,
                                    loss_cfg.margin));
    compacts.push_back(compact_loss(res.memory.snapshot.q, model.memory().items,
                                    res.memory.snapshot.pos));
    Tensor mass = sum_axis0(res.memory.snapshot.att);
    att_mass = att_mass.defined() ? add(att_mass, mass) : mass;
  }
  LossParts parts{mean_of(maes), mean_of(triplets), mean_of(compacts),
                  kl_uniform_loss(att_mass)};
  BatchLosses out;
  out.total = total_loss(parts, loss_cfg);
  out.mae = parts.recon.item();
  out.triplet = parts.triplet.item();
  out.compact = parts.compact.item();
  out.uniform = parts.uniform.item();
  return out;
}

}  // namespace

TrainResult train(MixadModel& model, const Tensor& series, const TrainConfig& cfg) {
  cfg.validate();
  if (series.rank() != 2 || series.rows() != model.config().nodes)
    throw ShapeError("train: series shape " + shape_str(series.shape()) +
                     " does not match model nodes");
  const std::size_t t_total = series.cols();
  const std::size_t t_split =
      t_total - static_cast<std::size_t>(static_cast<double>(t_total) * cfg.val_fraction);
  if (t_split < cfg.window || t_total - t_split < cfg.window)
    throw ValueError("train: series too short for window " + std::to_string(cfg.window) +
                     " after the 80/20 split");

  // Chronological split; windows are built per part so none straddles it.
  const std::size_t n = series.rows();
  auto slice_part = [&](std::size_t c0, std::size_t c1) {
    Tensor part = Tensor::zeros({n, c1 - c0});
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(series.values().data() + i * t_total + c0, c1 - c0,
                  part.values_mut().data() + i * (c1 - c0));
    return part;
  };
  const std::vector<Tensor> train_windows = make_windows(slice_part(0, t_split), cfg.window,
                                                         cfg.stride);
  const std::vector<Tensor> val_windows = make_windows(slice_part(t_split, t_total), cfg.window,
                                                       cfg.stride);

  Tape tape;
  auto params = model.parameters();
  for (auto& [name, p] : params) tape.watch(p);
  Adam opt(params, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), 0);

  auto validation_losses = [&](double* out_mae) {
    NoGradGuard guard(tape);
    Tensor a_eval = model.sample_graph(GraphMode::eval, nullptr);
    double total_sum = 0.0, mae_sum = 0.0;
    std::size_t count = 0;
    std::vector<std::size_t> val_order(val_windows.size());
    std::iota(val_order.begin(), val_order.end(), 0);
    for (std::size_t begin = 0; begin < val_windows.size(); begin += cfg.batch) {
      const std::size_t end = std::min(val_windows.size(), begin + cfg.batch);
      BatchLosses bl = batch_losses(model, val_windows, val_order, begin, end, a_eval, cfg.loss);
      total_sum += bl.total.item() * static_cast<double>(end - begin);
      mae_sum += bl.mae * static_cast<double>(end - begin);
      count += end - begin;
    }
    if (out_mae != nullptr) *out_mae = mae_sum / static_cast<double>(count);
    return total_sum / static_cast<double>(count);
  };

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double mae_sum = 0, l1_sum = 0, l2_sum = 0, l3_sum = 0, total_sum = 0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch);
      try {
        Tensor a_norm = model.sample_graph(GraphMode::train, &rng);
        BatchLosses bl = batch_losses(model, train_windows, order, begin, end, a_norm, cfg.loss);
        if (!std::isfinite(bl.total.item()))
          throw NumericError("non-finite total loss");
        tape.backward(bl.total);
        clip_gradients(params, cfg.clip_norm);
        opt.step();
        opt.zero_grad();
        tape.reset();
        const double weight = static_cast<double>(end - begin);
        mae_sum += bl.mae * weight;
        l1_sum += bl.triplet * weight;
        l2_sum += bl.compact * weight;
        l3_sum += bl.uniform * weight;
        total_sum += bl.total.item() * weight;
        seen += end - begin;
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(begin / cfg.batch) + ": " + e.what());
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    const double denom = static_cast<double>(seen);
    entry.mae = mae_sum / denom;
    entry.triplet = l1_sum / denom;
    entry.compact = l2_sum / denom;
    entry.uniform = l3_sum / denom;
    entry.total = total_sum / denom;
    entry.val_total = validation_losses(&entry.val_mae);
    result.log.push_back(entry);
    log_debug("epoch " + std::to_string(epoch) + " total " + std::to_string(entry.total) +
              " val " + std::to_string(entry.val_total));

    if (entry.val_total < best_val) {
      best_val = entry.val_total;
      result.best = model.to_checkpoint();
      result.best_epoch = epoch;
      bad_epochs = 0;
    } else {
      ++bad_epochs;
      if (bad_epochs >= cfg.patience) break;
    }
  }

  result.best_val = best_val;
  // Leave the model at its best parameters.
  for (auto& [name, p] : params) {
    const Tensor& stored = result.best.require(name);
    std::copy(stored.values().begin(), stored.values().end(), p.values_mut().begin());
  }
  return result;
}

}  // namespace mixad
