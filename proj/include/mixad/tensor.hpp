#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mixad {

class Tape;

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until backward() touches it
  bool requires_grad = false;
  Tape* tape = nullptr;  // non-null while the tensor participates in recording
};

}  // namespace detail

// Handle to a dense row-major f64 array. Copies of a Tensor alias the same
// buffer; clone() makes an independent one. Rank is 1 or 2 everywhere in this
// codebase, with scalars represented as shape {1}.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double v);
  static Tensor from_data(Shape shape, std::vector<double> data);
  static Tensor scalar(double v);
  static Tensor eye(std::size_t n);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const;
  std::size_t numel() const;
  // Rank-2 accessors; throw on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  std::span<double> values_mut();
  std::span<const double> grad() const;  // empty when absent
  std::span<double> grad_mut();          // allocates zeros when absent
  bool has_grad() const;
  void zero_grad();

  double item() const;  // numel() == 1
  double at(std::size_t i) const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  Tape* tape() const;
  // Same values, no tape, no grad tracking.
  Tensor detach() const;
  // Deep copy of values (no grad, no tape).
  Tensor clone() const;

  detail::TensorImpl* impl() const { return impl_.get(); }
  const std::shared_ptr<detail::TensorImpl>& impl_ptr() const { return impl_; }
  static Tensor wrap(std::shared_ptr<detail::TensorImpl> impl);

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Records primitive ops during a forward pass and replays their adjoints in
// reverse order, which is a valid reverse-topological order because every op
// is recorded after its inputs exist. Single writer during forward/backward;
// reset() between optimization steps.
class Tape {
 public:
  Tape() = default;
  // Watched leaves are released (tape pointer cleared) so parameters frozen
  // at the end of a training run cannot dangle into a dead tape. Op outputs
  // other than watched leaves must not be fed into new ops after their tape
  // is gone.
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Marks a leaf as differentiable and keeps it watched across reset().
  void watch(Tensor& t);
  const std::vector<Tensor>& watched() const { return watched_; }

  void record(std::function<void()> backward);
  bool recording() const { return pause_depth_ == 0; }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and accumulates gradients into every tensor on
  // the tape; every watched leaf ends with a populated (possibly zero) grad.
  // A second call without reset() is rejected.
  void backward(const Tensor& root);

  // Drops recorded nodes; watched leaves stay watched. Does not zero grads.
  void reset();

 private:
  friend class NoGradGuard;
  std::vector<std::function<void()>> nodes_;
  std::vector<Tensor> watched_;
  int pause_depth_ = 0;
  bool backward_done_ = false;
};

// Disables recording on a tape for a scope (validation passes, frozen
// forward runs inside a training loop).
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape) { ++tape_.pause_depth_; }
  ~NoGradGuard() { --tape_.pause_depth_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape& tape_;
};

}  // namespace mixad
