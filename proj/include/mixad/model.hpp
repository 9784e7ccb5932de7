#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixad/checkpoint.hpp"
#include "mixad/graph.hpp"
#include "mixad/memory.hpp"
#include "mixad/rng.hpp"
#include "mixad/tensor.hpp"

namespace mixad {

// Graph-convolutional GRU cell: every gate transform is a K-order polynomial
// graph convolution over [X_t || H] with per-order kernels of shape
// (c_in + h) x h.
struct StrgcCell {
  std::size_t in_dim = 1;
  std::size_t hidden = 1;
  std::vector<Tensor> w_r, w_u, w_c;  // K+1 kernels each
  Tensor b_r, b_u, b_c;               // 1 x h
};

// One recurrent update: reset/update gates from [X || H], candidate from
// [X || r*H], convex combination via the update gate.
Tensor strgc_step(const StrgcCell& cell, const Tensor& x_t, const Tensor& h_prev,
                  const Tensor& a_norm);

struct ModelConfig {
  std::size_t nodes = 8;
  std::size_t window = 30;
  std::size_t mem_items = 4;
  std::size_t mem_dim = 16;
  std::size_t hidden = 16;
  std::size_t cheb_k = 2;
  double tau = 0.5;
};

struct ForwardResult {
  Tensor reconstruction;  // N x w, forward time order
  MemoryReadout memory;   // encoder-final attention readout
};

// Encoder-decoder reconstruction model with a memory-augmented bottleneck and
// a learned graph. The decoder starts from the zero input and feeds its own
// previous output back, emitting the window in reverse time order; forward()
// returns it flipped to forward order.
class MixadModel {
 public:
  MixadModel(const ModelConfig& cfg, std::uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  const MemoryBank& memory() const { return memory_; }
  const GraphGenParams& graphgen() const { return graphgen_; }
  const StrgcCell& encoder() const { return encoder_; }
  const StrgcCell& decoder() const { return decoder_; }

  // Fixed registration order; names are stable across runs and checkpoints.
  std::vector<std::pair<std::string, Tensor>> parameters();

  // Generated adjacency (before normalization) and the normalized operator
  // actually used by the cells.
  Tensor sample_adjacency(GraphMode mode, Rng* rng) const;
  Tensor sample_graph(GraphMode mode, Rng* rng) const;

  ForwardResult forward(const Tensor& window, const Tensor& a_norm) const;
  // Encoder plus memory read only; the scoring pass never needs the decoder.
  MemoryReadout encode_attention(const Tensor& window, const Tensor& a_norm) const;

  Checkpoint to_checkpoint();
  static MixadModel from_checkpoint(const Checkpoint& ckpt);

 private:
  ModelConfig cfg_;
  StrgcCell encoder_, decoder_;
  MemoryBank memory_;
  GraphGenParams graphgen_;
  Tensor w_proj_, b_proj_;  // (h+d) x h, 1 x h
  Tensor w_out_, b_out_;    // h x 1, 1 x 1
};

}  // namespace mixad
