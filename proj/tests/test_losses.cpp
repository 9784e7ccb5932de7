#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixad/error.hpp"
#include "mixad/losses.hpp"
#include "mixad/ops.hpp"
#include "mixad/rng.hpp"
#include "support/gradcheck.hpp"
#include "support/testutil.hpp"

using namespace mixad;
using testsupport::random_tensor;

namespace {

// Scalar-loop oracles.
double triplet_ref(const Tensor& q, const Tensor& m, const std::vector<std::size_t>& pos,
                   const std::vector<std::size_t>& neg, double margin) {
  double total = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double dp = 0.0, dn = 0.0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
      dp += (q.at(i, j) - m.at(pos[i], j)) * (q.at(i, j) - m.at(pos[i], j));
      dn += (q.at(i, j) - m.at(neg[i], j)) * (q.at(i, j) - m.at(neg[i], j));
    }
    total += std::max(dp - dn + margin, 0.0);
  }
  return total;
}

double compact_ref(const Tensor& q, const Tensor& m, const std::vector<std::size_t>& pos) {
  double total = 0.0;
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j)
      total += (q.at(i, j) - m.at(pos[i], j)) * (q.at(i, j) - m.at(pos[i], j));
  return total;
}

double mae_ref(const Tensor& a, const Tensor& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) total += std::fabs(a.values()[i] - b.values()[i]);
  return total / static_cast<double>(a.numel());
}

}  // namespace

TEST_CASE("triplet: satisfied margin contributes zero") {
  // Q = M[pos]; distance to neg is 2*margin, so max{0 - 2m + m, 0} = 0.
  const double margin = 1.0;
  Tensor m = Tensor::from_data({2, 2}, {0.0, 0.0, std::sqrt(2.0 * margin), 0.0});
  Tensor q = Tensor::from_data({1, 2}, {0.0, 0.0});
  Tensor loss = triplet_loss(q, m, {0}, {1}, margin);
  CHECK(loss.item() == doctest::Approx(0.0));
}

TEST_CASE("triplet: equidistant queries pay the margin per node") {
  const double margin = 0.7;
  Tensor m = Tensor::from_data({2, 2}, {1.0, 0.0, -1.0, 0.0});
  Tensor q = Tensor::from_data({3, 2}, {0.0, 0.5, 0.0, -1.0, 0.0, 0.0});
  Tensor loss = triplet_loss(q, m, {0, 0, 0}, {1, 1, 1}, margin);
  CHECK(loss.item() == doctest::Approx(3.0 * margin));
}

TEST_CASE("triplet and compact match scalar-loop oracles") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor q = random_tensor({5, 3}, rng);
    Tensor m = random_tensor({4, 3}, rng);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < 5; ++i) {
      const std::size_t p = static_cast<std::size_t>(rng.integer(4));
      pos.push_back(p);
      neg.push_back((p + 1 + static_cast<std::size_t>(rng.integer(3))) % 4);
    }
    CHECK(triplet_loss(q, m, pos, neg, 0.5).item() ==
          doctest::Approx(triplet_ref(q, m, pos, neg, 0.5)).epsilon(1e-12));
    CHECK(compact_loss(q, m, pos).item() ==
          doctest::Approx(compact_ref(q, m, pos)).epsilon(1e-12));
  }
}

TEST_CASE("compact loss is zero iff queries sit on their items") {
  Tensor m = Tensor::from_data({2, 2}, {0.25, -1.0, 2.0, 0.5});
  Tensor q = gather_rows(m, {1, 0});
  CHECK(compact_loss(q, m, {1, 0}).item() == doctest::Approx(0.0));

  Tensor q2 = Tensor::from_data({1, 2}, {1.0, 1.0});
  Tensor m2 = Tensor::from_data({2, 2}, {0.0, 0.0, 5.0, 5.0});
  CHECK(compact_loss(q2, m2, {0}).item() == doctest::Approx(2.0));
}

TEST_CASE("compact loss scales quadratically") {
  Rng rng(6);
  Tensor q = random_tensor({4, 3}, rng);
  Tensor m = random_tensor({3, 3}, rng);
  const std::vector<std::size_t> pos = {0, 2, 1, 0};
  const double base = compact_loss(q, m, pos).item();
  const double c = 3.7;
  const double scaled = compact_loss(mul_scalar(q, c), mul_scalar(m, c), pos).item();
  CHECK(scaled == doctest::Approx(c * c * base).epsilon(1e-10));
}

TEST_CASE("uniform attention mass gives zero KL") {
  Tensor mass = Tensor::full({1, 5}, 3.21);
  CHECK(kl_uniform_loss(mass).item() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("KL against softmax (0.9, 0.1)") {
  // Masses whose softmax is (0.9, 0.1): difference of logits log(9).
  Tensor mass = Tensor::from_data({1, 2}, {std::log(9.0), 0.0});
  const double expect = -std::log(2.0) - 0.5 * (std::log(0.9) + std::log(0.1));
  CHECK(kl_uniform_loss(mass).item() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(kl_uniform_loss(mass).item() == doctest::Approx(0.510825623765991).epsilon(1e-9));
}

TEST_CASE("KL nonnegativity over random masses") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor mass = random_tensor({1, 6}, rng, -5.0, 5.0);
    CHECK(kl_uniform_loss(mass).item() >= -1e-12);
  }
}

TEST_CASE("reconstruction loss basics") {
  Tensor w = Tensor::from_data({1, 2}, {0.0, 1.0});
  CHECK(reconstruction_loss(w, w).item() == doctest::Approx(0.0));
  Tensor wh = Tensor::from_data({1, 2}, {1.0, 1.0});
  CHECK(reconstruction_loss(w, wh).item() == doctest::Approx(0.5));

  Rng rng(8);
  Tensor a = random_tensor({4, 6}, rng);
  Tensor b = random_tensor({4, 6}, rng);
  CHECK(reconstruction_loss(a, b).item() == doctest::Approx(mae_ref(a, b)).epsilon(1e-12));

  // MSE flag for ablations.
  double mse = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = b.values()[i] - a.values()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.numel());
  CHECK(reconstruction_loss(a, b, ReconLossKind::mse).item() ==
        doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("total loss weights the parts exactly") {
  LossConfig cfg;
  cfg.lambda1 = 0.01;
  cfg.lambda2 = 0.1;
  cfg.lambda3 = 0.0001;
  LossParts parts{Tensor::scalar(1.0), Tensor::scalar(1.0), Tensor::scalar(1.0),
                  Tensor::scalar(1.0)};
  CHECK(total_loss(parts, cfg).item() == doctest::Approx(1.1101).epsilon(1e-12));

  cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = 0.0;
  LossParts parts2{Tensor::scalar(0.37), Tensor::scalar(9.0), Tensor::scalar(4.0),
                   Tensor::scalar(2.0)};
  CHECK(total_loss(parts2, cfg).item() == doctest::Approx(0.37));
}

TEST_CASE("all four terms are nonnegative on random inputs") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor q = random_tensor({4, 3}, rng);
    Tensor m = random_tensor({3, 3}, rng);
    std::vector<std::size_t> pos = {0, 1, 2, 0}, neg = {1, 2, 0, 1};
    CHECK(triplet_loss(q, m, pos, neg, 1.0).item() >= 0.0);
    CHECK(compact_loss(q, m, pos).item() >= 0.0);
    CHECK(kl_uniform_loss(random_tensor({1, 4}, rng, -3.0, 3.0)).item() >= -1e-12);
    CHECK(reconstruction_loss(random_tensor({3, 5}, rng), random_tensor({3, 5}, rng)).item() >=
          0.0);
  }
}

TEST_CASE("gradients of the combined loss pass finite differences") {
  Rng rng(10);
  Tape tape;
  Tensor q_src = random_tensor({4, 3}, rng);
  Tensor m = random_tensor({3, 3}, rng);
  Tensor target = random_tensor({4, 3}, rng);
  tape.watch(q_src);
  tape.watch(m);
  const std::vector<std::size_t> pos = {0, 1, 2, 0}, neg = {2, 0, 1, 1};
  LossConfig cfg;

  std::vector<std::pair<std::string, Tensor>> leaves = {{"q_src", q_src}, {"m", m}};
  auto forward = [&] {
    Tensor q = tanh(q_src);  // keeps hinge boundaries off exact zero
    LossParts parts{reconstruction_loss(target, q), triplet_loss(q, m, pos, neg, cfg.margin),
                    compact_loss(q, m, pos), kl_uniform_loss(sum_axis0(row_softmax(q)))};
    return total_loss(parts, cfg);
  };
  auto report = testsupport::gradcheck(tape, leaves, forward);
  INFO("worst ", report.worst_param, " idx ", report.worst_index);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("pos == neg is rejected") {
  Tensor q = Tensor::zeros({2, 2});
  Tensor m = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(triplet_loss(q, m, {0, 1}, {0, 2}, 1.0), ValueError);
}
