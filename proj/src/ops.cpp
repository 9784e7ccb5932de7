#include "mixad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "mixad/error.hpp"
#include "mixad/kernels.hpp"

namespace mixad {

namespace {

using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

void check_defined(const char* op, std::initializer_list<const Tensor*> ins) {
  for (const Tensor* t : ins)
    if (!t->defined()) throw ValueError(std::string(op) + ": undefined input tensor");
}

// The tape the result records on: nullptr when no input is on a tape or
// recording is paused. Mixing tapes is a logic error.
Tape* grad_tape(std::initializer_list<const Tensor*> ins) {
  Tape* tape = nullptr;
  for (const Tensor* t : ins) {
    Tape* it = t->tape();
    if (it == nullptr) continue;
    if (tape != nullptr && tape != it)
      throw ValueError("op: input tensors belong to different tapes");
    tape = it;
  }
  if (tape != nullptr && !tape->recording()) return nullptr;
  return tape;
}

bool wants_grad(const TensorImpl& t) { return t.requires_grad || t.tape != nullptr; }

void ensure_grad(TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.value.size(), 0.0);
}

void check_finite(const char* op, const Tensor& out) {
  for (double v : out.values())
    if (!std::isfinite(v))
      throw NumericError(std::string(op) + ": non-finite output");
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

void check_rank2(const char* op, const Tensor& a) {
  if (a.rank() != 2)
    throw ShapeError(std::string(op) + ": expected rank-2 tensor, got shape " +
                     shape_str(a.shape()));
}

void transpose_into(const double* src, std::size_t rows, std::size_t cols, double* dst) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

Tensor finish(const char* op, Tensor out, Tape* tape, std::function<void()> backward) {
  check_finite(op, out);
  if (tape != nullptr) {
    out.impl()->tape = tape;
    tape->record(std::move(backward));
  }
  return out;
}

// Elementwise unary op with adjoint dx += g * dfdx(x, y).
template <typename Fwd, typename Dfdx>
Tensor unary_elementwise(const char* op, const Tensor& a, Fwd fwd, Dfdx dfdx) {
  check_defined(op, {&a});
  Tensor out = Tensor::zeros(a.shape());
  const auto av = a.values();
  auto ov = out.values_mut();
  for (std::size_t i = 0; i < av.size(); ++i) ov[i] = fwd(av[i]);
  Tape* tape = grad_tape({&a});
  return finish(op, out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), dfdx] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    const std::size_t n = ai->value.size();
    for (std::size_t i = 0; i < n; ++i)
      ai->grad[i] += oi->grad[i] * dfdx(ai->value[i], oi->value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined("matmul", {&a, &b});
  check_rank2("matmul", a);
  check_rank2("matmul", b);
  if (a.cols() != b.rows())
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n});
  kernels::active().matmul_acc(a.values().data(), b.values().data(), out.values_mut().data(), m,
                               k, n);
  Tape* tape = grad_tape({&a, &b});
  return finish("matmul", out, tape,
                [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr(), m, k, n] {
                  if (oi->grad.empty()) return;
                  const auto& kt = kernels::active();
                  if (wants_grad(*ai)) {
                    ensure_grad(*ai);
                    std::vector<double> bt(k * n);
                    transpose_into(bi->value.data(), k, n, bt.data());
                    kt.matmul_acc(oi->grad.data(), bt.data(), ai->grad.data(), m, n, k);
                  }
                  if (wants_grad(*bi)) {
                    ensure_grad(*bi);
                    std::vector<double> at(m * k);
                    transpose_into(ai->value.data(), m, k, at.data());
                    kt.matmul_acc(at.data(), oi->grad.data(), bi->grad.data(), k, m, n);
                  }
                });
}

Tensor transpose(const Tensor& a) {
  check_defined("transpose", {&a});
  check_rank2("transpose", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({c, r});
  transpose_into(a.values().data(), r, c, out.values_mut().data());
  Tape* tape = grad_tape({&a});
  return finish("transpose", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < r; ++j) ai->grad[j * c + i] += oi->grad[i * r + j];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_defined("add", {&a, &b});
  check_same_shape("add", a, b);
  Tensor out = Tensor::zeros(a.shape());
  kernels::active().add(a.values().data(), b.values().data(), out.values_mut().data(), a.numel());
  Tape* tape = grad_tape({&a, &b});
  return finish("add", out, tape, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
    if (oi->grad.empty()) return;
    const auto& kt = kernels::active();
    if (wants_grad(*ai)) {
      ensure_grad(*ai);
      kt.axpy(1.0, oi->grad.data(), ai->grad.data(), ai->value.size());
    }
    if (wants_grad(*bi)) {
      ensure_grad(*bi);
      kt.axpy(1.0, oi->grad.data(), bi->grad.data(), bi->value.size());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_defined("sub", {&a, &b});
  check_same_shape("sub", a, b);
  Tensor out = Tensor::zeros(a.shape());
  kernels::active().sub(a.values().data(), b.values().data(), out.values_mut().data(), a.numel());
  Tape* tape = grad_tape({&a, &b});
  return finish("sub", out, tape, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
    if (oi->grad.empty()) return;
    const auto& kt = kernels::active();
    if (wants_grad(*ai)) {
      ensure_grad(*ai);
      kt.axpy(1.0, oi->grad.data(), ai->grad.data(), ai->value.size());
    }
    if (wants_grad(*bi)) {
      ensure_grad(*bi);
      kt.axpy(-1.0, oi->grad.data(), bi->grad.data(), bi->value.size());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_defined("mul", {&a, &b});
  check_same_shape("mul", a, b);
  Tensor out = Tensor::zeros(a.shape());
  kernels::active().mul(a.values().data(), b.values().data(), out.values_mut().data(), a.numel());
  Tape* tape = grad_tape({&a, &b});
  return finish("mul", out, tape, [ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
    if (oi->grad.empty()) return;
    const auto& kt = kernels::active();
    if (wants_grad(*ai)) {
      ensure_grad(*ai);
      kt.mul_acc(oi->grad.data(), bi->value.data(), ai->grad.data(), ai->value.size());
    }
    if (wants_grad(*bi)) {
      ensure_grad(*bi);
      kt.mul_acc(oi->grad.data(), ai->value.data(), bi->grad.data(), bi->value.size());
    }
  });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  check_defined("add_rowvec", {&a, &v});
  check_rank2("add_rowvec", a);
  check_rank2("add_rowvec", v);
  if (v.rows() != 1 || v.cols() != a.cols())
    throw ShapeError("add_rowvec: bias " + shape_str(v.shape()) + " does not broadcast over " +
                     shape_str(a.shape()));
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros(a.shape());
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < r; ++i)
    kt.add(a.values().data() + i * c, v.values().data(), out.values_mut().data() + i * c, c);
  Tape* tape = grad_tape({&a, &v});
  return finish("add_rowvec", out, tape,
                [ai = a.impl_ptr(), vi = v.impl_ptr(), oi = out.impl_ptr(), r, c] {
                  if (oi->grad.empty()) return;
                  const auto& kt = kernels::active();
                  if (wants_grad(*ai)) {
                    ensure_grad(*ai);
                    kt.axpy(1.0, oi->grad.data(), ai->grad.data(), ai->value.size());
                  }
                  if (wants_grad(*vi)) {
                    ensure_grad(*vi);
                    for (std::size_t i = 0; i < r; ++i)
                      kt.axpy(1.0, oi->grad.data() + i * c, vi->grad.data(), c);
                  }
                });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary_elementwise(
      "add_scalar", a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  check_defined("mul_scalar", {&a});
  Tensor out = Tensor::zeros(a.shape());
  kernels::active().scale(s, a.values().data(), out.values_mut().data(), a.numel());
  Tape* tape = grad_tape({&a});
  return finish("mul_scalar", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), s] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    kernels::active().axpy(s, oi->grad.data(), ai->grad.data(), ai->value.size());
  });
}

Tensor max_scalar(const Tensor& a, double s) {
  return unary_elementwise(
      "max_scalar", a, [s](double x) { return x > s ? x : s; },
      [s](double x, double) { return x > s ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_elementwise(
      "sigmoid", a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_elementwise(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary_elementwise(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary_elementwise(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor abs(const Tensor& a) {
  return unary_elementwise(
      "abs", a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor sum_all(const Tensor& a) {
  check_defined("sum_all", {&a});
  Tensor out = Tensor::scalar(kernels::active().sum(a.values().data(), a.numel()));
  Tape* tape = grad_tape({&a});
  return finish("sum_all", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr()] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    const double g = oi->grad[0];
    for (double& d : ai->grad) d += g;
  });
}

Tensor mean_all(const Tensor& a) {
  check_defined("mean_all", {&a});
  const double n = static_cast<double>(a.numel());
  Tensor out = Tensor::scalar(kernels::active().sum(a.values().data(), a.numel()) / n);
  Tape* tape = grad_tape({&a});
  return finish("mean_all", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), n] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    const double g = oi->grad[0] / n;
    for (double& d : ai->grad) d += g;
  });
}

Tensor max_all(const Tensor& a) {
  check_defined("max_all", {&a});
  const auto av = a.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < av.size(); ++i)
    if (av[i] > av[best]) best = i;
  Tensor out = Tensor::scalar(av[best]);
  Tape* tape = grad_tape({&a});
  return finish("max_all", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), best] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    ai->grad[best] += oi->grad[0];
  });
}

Tensor sum_axis0(const Tensor& a) {
  check_defined("sum_axis0", {&a});
  check_rank2("sum_axis0", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({1, c});
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < r; ++i)
    kt.axpy(1.0, a.values().data() + i * c, out.values_mut().data(), c);
  Tape* tape = grad_tape({&a});
  return finish("sum_axis0", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < r; ++i) kt.axpy(1.0, oi->grad.data(), ai->grad.data() + i * c, c);
  });
}

Tensor sum_axis1(const Tensor& a) {
  check_defined("sum_axis1", {&a});
  check_rank2("sum_axis1", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({r, 1});
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < r; ++i)
    out.values_mut()[i] = kt.sum(a.values().data() + i * c, c);
  Tape* tape = grad_tape({&a});
  return finish("sum_axis1", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < r; ++i) {
      const double g = oi->grad[i];
      double* row = ai->grad.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += g;
    }
  });
}

Tensor row_softmax(const Tensor& a) {
  check_defined("row_softmax", {&a});
  check_rank2("row_softmax", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = a.values().data() + i * c;
    double* orow = out.values_mut().data() + i * c;
    double m = row[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      orow[j] = std::exp(row[j] - m);
      s += orow[j];
    }
    for (std::size_t j = 0; j < c; ++j) orow[j] /= s;
  }
  Tape* tape = grad_tape({&a});
  return finish("row_softmax", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < r; ++i) {
      const double* p = oi->value.data() + i * c;
      const double* g = oi->grad.data() + i * c;
      double* da = ai->grad.data() + i * c;
      const double gp = kernels::active().dot(g, p, c);
      for (std::size_t j = 0; j < c; ++j) da[j] += p[j] * (g[j] - gp);
    }
  });
}

Tensor log_row_softmax(const Tensor& a) {
  check_defined("log_row_softmax", {&a});
  check_rank2("log_row_softmax", a);
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out = Tensor::zeros({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = a.values().data() + i * c;
    double* orow = out.values_mut().data() + i * c;
    double m = row[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < c; ++j) orow[j] = row[j] - lse;
  }
  Tape* tape = grad_tape({&a});
  return finish("log_row_softmax", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < r; ++i) {
      const double* ls = oi->value.data() + i * c;
      const double* g = oi->grad.data() + i * c;
      double* da = ai->grad.data() + i * c;
      double gs = 0.0;
      for (std::size_t j = 0; j < c; ++j) gs += g[j];
      for (std::size_t j = 0; j < c; ++j) da[j] += g[j] - std::exp(ls[j]) * gs;
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  const Tensor parts[2] = {a, b};
  return concat_cols(std::span<const Tensor>(parts, 2));
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ValueError("concat_cols: no inputs");
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    check_defined("concat_cols", {&t});
    check_rank2("concat_cols", t);
    if (t.rows() != parts[0].rows())
      throw ShapeError("concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(t.shape()));
    total += t.cols();
  }
  const std::size_t r = parts[0].rows();
  Tensor out = Tensor::zeros({r, total});
  std::size_t off = 0;
  for (const Tensor& t : parts) {
    const std::size_t c = t.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(t.values().data() + i * c, c, out.values_mut().data() + i * total + off);
    off += c;
  }
  Tape* tape = nullptr;
  for (const Tensor& t : parts) {
    Tape* it = grad_tape({&t});
    if (it != nullptr) {
      if (tape != nullptr && tape != it)
        throw ValueError("concat_cols: input tensors belong to different tapes");
      tape = it;
    }
  }
  std::vector<ImplPtr> impls;
  impls.reserve(parts.size());
  for (const Tensor& t : parts) impls.push_back(t.impl_ptr());
  return finish("concat_cols", out, tape, [impls = std::move(impls), oi = out.impl_ptr(), r, total] {
    if (oi->grad.empty()) return;
    std::size_t off = 0;
    for (const ImplPtr& ai : impls) {
      const std::size_t c = ai->shape[1];
      if (wants_grad(*ai)) {
        ensure_grad(*ai);
        for (std::size_t i = 0; i < r; ++i)
          kernels::active().axpy(1.0, oi->grad.data() + i * total + off, ai->grad.data() + i * c,
                                 c);
      }
      off += c;
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t j0, std::size_t j1) {
  check_defined("slice_cols", {&a});
  check_rank2("slice_cols", a);
  if (j0 >= j1 || j1 > a.cols())
    throw ShapeError("slice_cols: range [" + std::to_string(j0) + ", " + std::to_string(j1) +
                     ") invalid for shape " + shape_str(a.shape()));
  const std::size_t r = a.rows(), c = a.cols(), w = j1 - j0;
  Tensor out = Tensor::zeros({r, w});
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(a.values().data() + i * c + j0, w, out.values_mut().data() + i * w);
  Tape* tape = grad_tape({&a});
  return finish("slice_cols", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), r, c, w, j0] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < r; ++i)
      kernels::active().axpy(1.0, oi->grad.data() + i * w, ai->grad.data() + i * c + j0, w);
  });
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
  check_defined("gather_rows", {&a});
  check_rank2("gather_rows", a);
  if (idx.empty()) throw ValueError("gather_rows: empty index list");
  const std::size_t r = a.rows(), c = a.cols();
  for (std::size_t i : idx)
    if (i >= r)
      throw ShapeError("gather_rows: index " + std::to_string(i) + " out of range for shape " +
                       shape_str(a.shape()));
  Tensor out = Tensor::zeros({idx.size(), c});
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(a.values().data() + idx[i] * c, c, out.values_mut().data() + i * c);
  Tape* tape = grad_tape({&a});
  return finish("gather_rows", out, tape, [ai = a.impl_ptr(), oi = out.impl_ptr(), idx, c] {
    if (oi->grad.empty() || !wants_grad(*ai)) return;
    ensure_grad(*ai);
    for (std::size_t i = 0; i < idx.size(); ++i)
      kernels::active().axpy(1.0, oi->grad.data() + i * c, ai->grad.data() + idx[i] * c, c);
  });
}

}  // namespace mixad
