#pragma once

#include <cstddef>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

// Learnable memory: m x d prototype items plus the query projection. m >= 2
// because the triplet loss needs a distinct second-nearest item.
struct MemoryBank {
  Tensor items;  // M: m x d
  Tensor w_q;    // h x d
  Tensor b_q;    // 1 x d
};

// One attention read: row-stochastic scores, the query matrix, and per-node
// nearest / second-nearest item indices. Exact ties resolve to the lower
// index for pos; neg is the best of the remaining items.
struct AttentionSnapshot {
  Tensor att;  // N x m
  Tensor q;    // N x d
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
};

struct MemoryReadout {
  AttentionSnapshot snapshot;
  Tensor h_aug;  // N x d
};

// Q = H W_Q + b_Q; Att = row_softmax(Q M^T); H_aug = Att M. Differentiable
// end to end; pos/neg come from the attention values.
MemoryReadout query_memory(const Tensor& h, const MemoryBank& bank);

// Decoder initial state: [H || H_aug] projected by w_proj ((h+d) x h_dec)
// plus bias (1 x h_dec).
Tensor concat_augment(const Tensor& h, const Tensor& h_aug, const Tensor& w_proj,
                      const Tensor& b_proj);

}  // namespace mixad
