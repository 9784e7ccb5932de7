#include "mixad/memory.hpp"

#include "mixad/error.hpp"
#include "mixad/ops.hpp"

namespace mixad {

MemoryReadout query_memory(const Tensor& h, const MemoryBank& bank) {
  const std::size_t m = bank.items.rows();
  if (m < 2) throw ValueError("query_memory: need at least 2 memory items, got " +
                              std::to_string(m));
  MemoryReadout out;
  out.snapshot.q = add_rowvec(matmul(h, bank.w_q), bank.b_q);
  out.snapshot.att = row_softmax(matmul(out.snapshot.q, transpose(bank.items)));
  out.h_aug = matmul(out.snapshot.att, bank.items);

  const std::size_t n = out.snapshot.att.rows();
  out.snapshot.pos.resize(n);
  out.snapshot.neg.resize(n);
  const auto att = out.snapshot.att.values();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = att.data() + i * m;
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j)
      if (row[j] > row[best]) best = j;
    std::size_t second = best == 0 ? 1 : 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == best) continue;
      if (row[j] > row[second]) second = j;
    }
    out.snapshot.pos[i] = best;
    out.snapshot.neg[i] = second;
  }
  return out;
}

Tensor concat_augment(const Tensor& h, const Tensor& h_aug, const Tensor& w_proj,
                      const Tensor& b_proj) {
  return add_rowvec(matmul(concat_cols(h, h_aug), w_proj), b_proj);
}

}  // namespace mixad
