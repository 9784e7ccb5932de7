#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

// Primitive differentiable ops. Forward values are computed through
// mixad::kernels; when any input sits on a recording tape, a backward closure
// with the exact analytic adjoint is recorded. Shape mismatches throw
// ShapeError naming the op; non-finite outputs throw NumericError.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

// Broadcast bias add: a is r x c, v is 1 x c. The only tensor-tensor
// broadcast the model needs; anything else is rejected loudly by add().
Tensor add_rowvec(const Tensor& a, const Tensor& v);

Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
// Elementwise max(a, s); gradient passes only where a > s.
Tensor max_scalar(const Tensor& a, double s);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);

Tensor sum_all(const Tensor& a);   // 1-element result
Tensor mean_all(const Tensor& a);  // 1-element result
// 1-element result; gradient routes to the first argmax.
Tensor max_all(const Tensor& a);

Tensor sum_axis0(const Tensor& a);  // column sums, 1 x c
Tensor sum_axis1(const Tensor& a);  // row sums, r x 1

Tensor row_softmax(const Tensor& a);
Tensor log_row_softmax(const Tensor& a);

Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_cols(std::span<const Tensor> parts);
// Columns [j0, j1) of a.
Tensor slice_cols(const Tensor& a, std::size_t j0, std::size_t j1);
// Row gather: out row i = a row idx[i]; backward scatter-adds.
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx);

inline Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }
inline Tensor one_minus(const Tensor& a) { return add_scalar(mul_scalar(a, -1.0), 1.0); }

}  // namespace mixad
