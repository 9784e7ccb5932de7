#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mixad/tensor.hpp"

namespace testsupport {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Central finite differences against tape gradients. `forward` must rebuild
// the scalar loss from the current leaf values on every call. Relative error
// uses the standard gradcheck floor: |fd - grad| / max(1, |fd|, |grad|).
inline GradCheckReport gradcheck(mixad::Tape& tape,
                                 std::vector<std::pair<std::string, mixad::Tensor>>& leaves,
                                 const std::function<mixad::Tensor()>& forward,
                                 double h = 1e-4) {
  tape.reset();
  for (auto& [name, leaf] : leaves) leaf.zero_grad();
  mixad::Tensor loss = forward();
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (auto& [name, leaf] : leaves)
    analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());
  tape.reset();

  GradCheckReport report;
  mixad::NoGradGuard guard(tape);
  for (std::size_t p = 0; p < leaves.size(); ++p) {
    auto values = leaves[p].second.values_mut();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double f_plus = forward().item();
      values[i] = saved - h;
      const double f_minus = forward().item();
      values[i] = saved;
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double grad = analytic[p][i];
      const double denom = std::max({1.0, std::fabs(fd), std::fabs(grad)});
      const double rel = std::fabs(fd - grad) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = leaves[p].first;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace testsupport
