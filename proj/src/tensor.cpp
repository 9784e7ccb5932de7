#include "mixad/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "mixad/error.hpp"

namespace mixad {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << "x";
    os << s[i];
  }
  os << ")";
  return os.str();
}

namespace {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

void validate_shape(const Shape& s) {
  if (s.empty()) throw ShapeError("tensor: empty shape");
  for (std::size_t d : s)
    if (d == 0) throw ShapeError("tensor: zero dimension in shape " + shape_str(s));
}

}  // namespace

Tensor Tensor::zeros(Shape shape) {
  validate_shape(shape);
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->value.assign(shape_numel(shape), 0.0);
  impl->shape = std::move(shape);
  return wrap(std::move(impl));
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t = zeros(std::move(shape));
  std::fill(t.impl()->value.begin(), t.impl()->value.end(), v);
  return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
  validate_shape(shape);
  if (shape_numel(shape) != data.size())
    throw ShapeError("tensor: data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_str(shape));
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = std::move(shape);
  impl->value = std::move(data);
  return wrap(std::move(impl));
}

Tensor Tensor::scalar(double v) { return from_data({1}, {v}); }

Tensor Tensor::eye(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t.impl()->value[i * n + i] = 1.0;
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::rank() const { return impl_->shape.size(); }
std::size_t Tensor::numel() const { return impl_->value.size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("tensor: rows() on rank-" + std::to_string(rank()) + " tensor");
  return impl_->shape[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("tensor: cols() on rank-" + std::to_string(rank()) + " tensor");
  return impl_->shape[1];
}

std::span<const double> Tensor::values() const { return impl_->value; }
std::span<double> Tensor::values_mut() { return impl_->value; }

std::span<const double> Tensor::grad() const { return impl_->grad; }

std::span<double> Tensor::grad_mut() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->value.size(), 0.0);
  return impl_->grad;
}

bool Tensor::has_grad() const { return !impl_->grad.empty(); }

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::item() const {
  if (numel() != 1)
    throw ShapeError("tensor: item() on tensor with " + std::to_string(numel()) + " elements");
  return impl_->value[0];
}

double Tensor::at(std::size_t i) const { return impl_->value.at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
  return impl_->value.at(i * cols() + j);
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
Tape* Tensor::tape() const { return impl_->tape; }

Tensor Tensor::detach() const {
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->value = impl_->value;
  return wrap(std::move(impl));
}

Tensor Tensor::clone() const { return detach(); }

Tensor Tensor::wrap(std::shared_ptr<detail::TensorImpl> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

Tape::~Tape() {
  for (Tensor& t : watched_)
    if (t.defined()) t.impl()->tape = nullptr;
}

void Tape::watch(Tensor& t) {
  if (!t.defined()) throw ValueError("tape: watch() on undefined tensor");
  if (t.impl()->tape == this && t.impl()->requires_grad) return;
  if (t.impl()->tape != nullptr && t.impl()->tape != this)
    throw ValueError("tape: tensor already belongs to another tape");
  t.impl()->tape = this;
  t.impl()->requires_grad = true;
  watched_.push_back(t);
}

void Tape::record(std::function<void()> backward) {
  nodes_.push_back(std::move(backward));
}

void Tape::backward(const Tensor& root) {
  if (!root.defined()) throw ValueError("backward: undefined root");
  if (root.tape() == nullptr)
    throw ValueError("backward: root is detached from the tape");
  if (root.tape() != this) throw ValueError("backward: root belongs to another tape");
  if (root.numel() != 1)
    throw ShapeError("backward: root must be scalar, got shape " + shape_str(root.shape()));
  if (backward_done_)
    throw ValueError("backward: already called on this tape; reset() first");

  for (Tensor& leaf : watched_) leaf.grad_mut();  // populate, keeps zeros if unused
  Tensor r = root;
  r.grad_mut()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  backward_done_ = true;
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace mixad
