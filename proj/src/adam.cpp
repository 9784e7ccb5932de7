#include "mixad/adam.hpp"

#include <cmath>

#include "mixad/error.hpp"

namespace mixad {

Adam::Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  slots_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const std::size_t n = params_[i].second.numel();
    slots_[i].m.assign(n, 0.0);
    slots_[i].v.assign(n, 0.0);
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].second;
    if (!p.has_grad())
      throw ValueError("adam: missing gradient for parameter " + params_[i].first);
    auto value = p.values_mut();
    const auto grad = p.grad();
    Slot& s = slots_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      s.m[j] = cfg_.beta1 * s.m[j] + (1.0 - cfg_.beta1) * g;
      s.v[j] = cfg_.beta2 * s.v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = s.m[j] / bc1;
      const double vhat = s.v[j] / bc2;
      value[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      if (!std::isfinite(value[j]))
        throw NumericError("adam: non-finite parameter " + params_[i].first + " after update");
    }
  }
}

void Adam::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace mixad
