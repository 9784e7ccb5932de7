#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mixad/tensor.hpp"

namespace mixad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed set of named parameters. Moment buffers
// mirror parameter shapes; the step counter advances once per step() call.
class Adam {
 public:
  Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg = {});

  // Applies one update; every parameter must carry a populated gradient.
  void step();
  void zero_grad();

  std::uint64_t steps() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

  // Moment access for tests: first/second moment buffers of parameter i.
  const std::vector<double>& first_moment(std::size_t i) const { return slots_[i].m; }
  const std::vector<double>& second_moment(std::size_t i) const { return slots_[i].v; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
};

}  // namespace mixad
