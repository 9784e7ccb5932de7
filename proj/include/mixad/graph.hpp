#pragma once

#include <vector>

#include "mixad/rng.hpp"
#include "mixad/tensor.hpp"

namespace mixad {

enum class GraphMode { train, eval };

// Learned graph-generation parameters: an N x m projection of the memory
// bank into node embeddings plus the relaxation temperature.
struct GraphGenParams {
  Tensor embed;  // W_E: N x m
  double tau = 0.5;
};

// Symmetric normalization with self-loops: D^(-1/2) (A + I) D^(-1/2) where D
// is the degree matrix of A + I. Differentiable in A; rejects negative or
// non-finite entries.
Tensor normalize_adjacency(const Tensor& a);

// Polynomial graph convolution: sum_k A~^k X W_k with A~^0 = I and
// weights[k] of shape c_in x c_out.
Tensor graph_conv(const Tensor& x, const Tensor& a_norm, const std::vector<Tensor>& weights);

// Edge probabilities theta = sigmoid((W_E M)(W_E M)^T), strictly inside (0,1).
Tensor edge_probabilities(const Tensor& memory, const GraphGenParams& params);

// Relaxed adjacency sample with zeroed diagonal. Train mode draws two Gumbel
// noise matrices from rng; eval mode is deterministic. The output feeds
// normalize_adjacency, which re-introduces self-loops.
Tensor generate_graph(const Tensor& memory, const GraphGenParams& params, GraphMode mode,
                      Rng* rng);

// Same as train-mode generate_graph but with caller-supplied noise, for
// frozen-noise gradient checks. g1 and g2 are N x N.
Tensor generate_graph_with_noise(const Tensor& memory, const GraphGenParams& params,
                                 const Tensor& g1, const Tensor& g2);

}  // namespace mixad
