#include "mixad/graph.hpp"

#include <cmath>
#include <string>

#include "mixad/error.hpp"
#include "mixad/ops.hpp"

namespace mixad {

namespace {

void check_square(const char* op, const Tensor& a) {
  if (a.rank() != 2 || a.rows() != a.cols())
    throw ShapeError(std::string(op) + ": expected square matrix, got " + shape_str(a.shape()));
}

Tensor offdiag_mask(std::size_t n) {
  Tensor mask = Tensor::full({n, n}, 1.0);
  for (std::size_t i = 0; i < n; ++i) mask.values_mut()[i * n + i] = 0.0;
  return mask;
}

}  // namespace

Tensor normalize_adjacency(const Tensor& a) {
  check_square("normalize_adjacency", a);
  for (double v : a.values()) {
    if (!std::isfinite(v)) throw NumericError("normalize_adjacency: non-finite entry");
    if (v < 0.0) throw ValueError("normalize_adjacency: negative entry");
  }
  const std::size_t n = a.rows();
  Tensor with_loops = add(a, Tensor::eye(n));
  Tensor degrees = sum_axis1(with_loops);  // >= 1, so log is safe
  Tensor inv_sqrt = exp(mul_scalar(log(degrees), -0.5));
  Tensor scaling = matmul(inv_sqrt, transpose(inv_sqrt));
  return mul(scaling, with_loops);
}

Tensor graph_conv(const Tensor& x, const Tensor& a_norm, const std::vector<Tensor>& weights) {
  if (weights.empty()) throw ValueError("graph_conv: no kernel weights (K+1 >= 1 required)");
  check_square("graph_conv", a_norm);
  if (x.rank() != 2 || x.rows() != a_norm.rows())
    throw ShapeError("graph_conv: input " + shape_str(x.shape()) + " incompatible with graph " +
                     shape_str(a_norm.shape()));
  for (const Tensor& w : weights) {
    if (w.rank() != 2 || w.rows() != x.cols() || w.shape() != weights[0].shape())
      throw ShapeError("graph_conv: kernel " + shape_str(w.shape()) + " incompatible with input " +
                       shape_str(x.shape()));
  }
  Tensor power = x;  // A~^k X, starting at k = 0
  Tensor out = matmul(power, weights[0]);
  for (std::size_t k = 1; k < weights.size(); ++k) {
    power = matmul(a_norm, power);
    out = add(out, matmul(power, weights[k]));
  }
  return out;
}

Tensor edge_probabilities(const Tensor& memory, const GraphGenParams& params) {
  Tensor embedded = matmul(params.embed, memory);  // N x d
  Tensor scores = matmul(embedded, transpose(embedded));
  return sigmoid(scores);
}

namespace {

// Shared core: A = sigmoid((S + noise) / tau) with zeroed diagonal, where
// S are the raw embedding scores. logit(sigmoid(S)) collapses back to S, so
// the published logit(theta) form is computed without the round trip.
Tensor relaxed_adjacency(const Tensor& memory, const GraphGenParams& params,
                         const Tensor* noise) {
  if (!(params.tau > 0.0)) throw ValueError("generate_graph: tau must be > 0");
  Tensor embedded = matmul(params.embed, memory);
  Tensor scores = matmul(embedded, transpose(embedded));
  if (noise != nullptr) scores = add(scores, *noise);
  Tensor relaxed = sigmoid(mul_scalar(scores, 1.0 / params.tau));
  return mul(relaxed, offdiag_mask(relaxed.rows()));
}

}  // namespace

Tensor generate_graph(const Tensor& memory, const GraphGenParams& params, GraphMode mode,
                      Rng* rng) {
  if (mode == GraphMode::eval) return relaxed_adjacency(memory, params, nullptr);
  if (rng == nullptr) throw ValueError("generate_graph: train mode requires an rng");
  const std::size_t n = params.embed.rows();
  Tensor noise = Tensor::zeros({n, n});
  auto nv = noise.values_mut();
  for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = rng->gumbel() - rng->gumbel();
  return relaxed_adjacency(memory, params, &noise);
}

Tensor generate_graph_with_noise(const Tensor& memory, const GraphGenParams& params,
                                 const Tensor& g1, const Tensor& g2) {
  Tensor noise = sub(g1.detach(), g2.detach());
  return relaxed_adjacency(memory, params, &noise);
}

}  // namespace mixad
