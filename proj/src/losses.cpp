#include "mixad/losses.hpp"

#include <cmath>

#include "mixad/error.hpp"
#include "mixad/ops.hpp"

namespace mixad {

namespace {

// Per-node squared distances ||Q_i - M[idx_i]||^2 as an N x 1 tensor.
Tensor squared_distances(const Tensor& q, const Tensor& memory,
                         const std::vector<std::size_t>& idx) {
  Tensor diff = sub(q, gather_rows(memory, idx));
  return sum_axis1(mul(diff, diff));
}

}  // namespace

Tensor triplet_loss(const Tensor& q, const Tensor& memory, const std::vector<std::size_t>& pos,
                    const std::vector<std::size_t>& neg, double margin) {
  if (pos.size() != q.rows() || neg.size() != q.rows())
    throw ShapeError("triplet_loss: index count does not match query rows");
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (pos[i] == neg[i]) throw ValueError("triplet_loss: pos == neg at node " + std::to_string(i));
  Tensor gap = sub(squared_distances(q, memory, pos), squared_distances(q, memory, neg));
  return sum_all(max_scalar(add_scalar(gap, margin), 0.0));
}

Tensor compact_loss(const Tensor& q, const Tensor& memory, const std::vector<std::size_t>& pos) {
  if (pos.size() != q.rows())
    throw ShapeError("compact_loss: index count does not match query rows");
  return sum_all(squared_distances(q, memory, pos));
}

Tensor kl_uniform_loss(const Tensor& att_mass) {
  if (att_mass.rank() != 2 || att_mass.rows() != 1)
    throw ShapeError("kl_uniform_loss: expected 1 x m attention mass, got " +
                     shape_str(att_mass.shape()));
  const double m = static_cast<double>(att_mass.cols());
  Tensor mean_log_prob = mul_scalar(sum_all(log_row_softmax(att_mass)), 1.0 / m);
  return add_scalar(neg(mean_log_prob), -std::log(m));
}

Tensor reconstruction_loss(const Tensor& target, const Tensor& recon, ReconLossKind kind) {
  if (target.shape() != recon.shape())
    throw ShapeError("reconstruction_loss: shape mismatch " + shape_str(target.shape()) + " vs " +
                     shape_str(recon.shape()));
  Tensor diff = sub(recon, target);
  if (kind == ReconLossKind::mse) return mean_all(mul(diff, diff));
  return mean_all(abs(diff));
}

Tensor total_loss(const LossParts& parts, const LossConfig& cfg) {
  Tensor total = parts.recon;
  total = add(total, mul_scalar(parts.triplet, cfg.lambda1));
  total = add(total, mul_scalar(parts.compact, cfg.lambda2));
  total = add(total, mul_scalar(parts.uniform, cfg.lambda3));
  return total;
}

}  // namespace mixad
