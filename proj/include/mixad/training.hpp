#pragma once

#include <cstdint>
#include <vector>

#include "mixad/checkpoint.hpp"
#include "mixad/losses.hpp"
#include "mixad/model.hpp"
#include "mixad/tensor.hpp"

namespace mixad {

// Feature-wise min-max over the training series. Degenerate features
// (max == min) map to the constant 0.5 and are flagged.
struct NormalizationStats {
  std::vector<double> min, max;
  std::vector<bool> degenerate;
};

NormalizationStats fit_normalizer(const Tensor& train);
// Test data uses the training stats and may leave [0, 1]; values are not
// clipped so anomalies stay visible.
Tensor apply_normalizer(const Tensor& x, const NormalizationStats& stats);

// Sliding windows over columns: window j covers [j*stride, j*stride + w).
std::vector<Tensor> make_windows(const Tensor& series, std::size_t w, std::size_t stride = 1);

struct TrainConfig {
  std::size_t window = 30;
  std::size_t batch = 256;
  double lr = 1e-3;
  std::size_t max_epochs = 30;
  std::size_t patience = 10;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t mem_items = 4;
  std::size_t mem_dim = 16;
  std::size_t hidden = 16;
  std::size_t cheb_k = 2;
  double tau = 0.5;
  std::size_t stride = 1;     // training-window stride, desk-scale escape hatch
  double clip_norm = 5.0;     // global gradient-norm clip
  LossConfig loss;

  ModelConfig model_config(std::size_t nodes) const;
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mae = 0, triplet = 0, compact = 0, uniform = 0, total = 0;
  double val_total = 0, val_mae = 0;
};

struct TrainResult {
  Checkpoint best;  // model parameters at the best validation epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val = 0;
};

// Chronological 80/20 split, seeded shuffling, Adam with gradient clipping,
// early stopping on validation total loss. The model is left holding the
// best parameters on return.
TrainResult train(MixadModel& model, const Tensor& series_normalized, const TrainConfig& cfg);

}  // namespace mixad
