#pragma once

#include <cstddef>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

enum class ReconLossKind { mae, mse };

struct LossConfig {
  double margin = 1.0;     // triplet margin
  double lambda1 = 0.01;   // triplet weight
  double lambda2 = 0.1;    // compactness weight
  double lambda3 = 1e-4;   // attention-uniformity weight
  ReconLossKind recon = ReconLossKind::mae;
};

// Hinge over nodes: sum_i max{ ||Q_i - M[pos_i]||^2 - ||Q_i - M[neg_i]||^2
// + margin, 0 }. Natural logs and sums throughout; batch averaging is the
// caller's concern.
Tensor triplet_loss(const Tensor& q, const Tensor& memory, const std::vector<std::size_t>& pos,
                    const std::vector<std::size_t>& neg, double margin);

// sum_i ||Q_i - M[pos_i]||^2
Tensor compact_loss(const Tensor& q, const Tensor& memory, const std::vector<std::size_t>& pos);

// KL(Uniform(m) || softmax(att_mass)) where att_mass (1 x m) is attention
// summed over nodes and windows. Zero exactly when the mass is uniform.
Tensor kl_uniform_loss(const Tensor& att_mass);

// Mean absolute (or squared) error over all entries.
Tensor reconstruction_loss(const Tensor& target, const Tensor& recon,
                           ReconLossKind kind = ReconLossKind::mae);

struct LossParts {
  Tensor recon;    // L_MAE
  Tensor triplet;  // L1
  Tensor compact;  // L2
  Tensor uniform;  // L3
};

// recon + lambda1 L1 + lambda2 L2 + lambda3 L3
Tensor total_loss(const LossParts& parts, const LossConfig& cfg);

}  // namespace mixad
