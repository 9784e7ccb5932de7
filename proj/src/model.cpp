#include "mixad/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mixad/error.hpp"
#include "mixad/ops.hpp"

namespace mixad {

namespace {

Tensor uniform_init(Shape shape, double bound, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.values_mut()) v = rng.uniform(-bound, bound);
  return t;
}

std::vector<Tensor> init_gate(std::size_t orders, std::size_t fan_in, std::size_t hidden,
                              Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<Tensor> w;
  w.reserve(orders);
  for (std::size_t k = 0; k < orders; ++k) w.push_back(uniform_init({fan_in, hidden}, bound, rng));
  return w;
}

StrgcCell init_cell(std::size_t in_dim, std::size_t hidden, std::size_t cheb_k, Rng& rng) {
  StrgcCell cell;
  cell.in_dim = in_dim;
  cell.hidden = hidden;
  const std::size_t orders = cheb_k + 1;
  const std::size_t fan_in = in_dim + hidden;
  cell.w_r = init_gate(orders, fan_in, hidden, rng);
  cell.w_u = init_gate(orders, fan_in, hidden, rng);
  cell.w_c = init_gate(orders, fan_in, hidden, rng);
  cell.b_r = Tensor::zeros({1, hidden});
  cell.b_u = Tensor::zeros({1, hidden});
  cell.b_c = Tensor::zeros({1, hidden});
  return cell;
}

}  // namespace

Tensor strgc_step(const StrgcCell& cell, const Tensor& x_t, const Tensor& h_prev,
                  const Tensor& a_norm) {
  if (x_t.rank() != 2 || x_t.cols() != cell.in_dim)
    throw ShapeError("strgc_step: input " + shape_str(x_t.shape()) + " does not match in_dim " +
                     std::to_string(cell.in_dim));
  if (h_prev.rank() != 2 || h_prev.cols() != cell.hidden || h_prev.rows() != x_t.rows())
    throw ShapeError("strgc_step: state " + shape_str(h_prev.shape()) +
                     " does not match input " + shape_str(x_t.shape()));

  // Reset and update gates convolve the same [X || H], so the propagated
  // powers A~^k [X || H] are shared between them.
  Tensor xh = concat_cols(x_t, h_prev);
  Tensor power = xh;
  Tensor r_pre = matmul(power, cell.w_r[0]);
  Tensor u_pre = matmul(power, cell.w_u[0]);
  for (std::size_t k = 1; k < cell.w_r.size(); ++k) {
    power = matmul(a_norm, power);
    r_pre = add(r_pre, matmul(power, cell.w_r[k]));
    u_pre = add(u_pre, matmul(power, cell.w_u[k]));
  }
  Tensor reset = sigmoid(add_rowvec(r_pre, cell.b_r));
  Tensor update = sigmoid(add_rowvec(u_pre, cell.b_u));

  Tensor candidate_in = concat_cols(x_t, mul(reset, h_prev));
  Tensor candidate =
      tanh(add_rowvec(graph_conv(candidate_in, a_norm, cell.w_c), cell.b_c));

  return add(mul(update, h_prev), mul(one_minus(update), candidate));
}

MixadModel::MixadModel(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.mem_items < 2) throw ValueError("model: mem_items must be >= 2");
  if (cfg.nodes == 0 || cfg.window == 0 || cfg.hidden == 0 || cfg.mem_dim == 0)
    throw ValueError("model: zero dimension in config");
  Rng rng(init_seed);
  encoder_ = init_cell(1, cfg.hidden, cfg.cheb_k, rng);
  decoder_ = init_cell(1, cfg.hidden, cfg.cheb_k, rng);

  const double mem_bound = 1.0 / std::sqrt(static_cast<double>(cfg.mem_dim));
  memory_.items = uniform_init({cfg.mem_items, cfg.mem_dim}, mem_bound, rng);
  memory_.w_q = uniform_init({cfg.hidden, cfg.mem_dim},
                             1.0 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
  memory_.b_q = Tensor::zeros({1, cfg.mem_dim});

  graphgen_.embed = uniform_init({cfg.nodes, cfg.mem_items},
                                 1.0 / std::sqrt(static_cast<double>(cfg.mem_items)), rng);
  graphgen_.tau = cfg.tau;

  const std::size_t concat_dim = cfg.hidden + cfg.mem_dim;
  w_proj_ = uniform_init({concat_dim, cfg.hidden},
                         1.0 / std::sqrt(static_cast<double>(concat_dim)), rng);
  b_proj_ = Tensor::zeros({1, cfg.hidden});
  w_out_ = uniform_init({cfg.hidden, 1}, 1.0 / std::sqrt(static_cast<double>(cfg.hidden)), rng);
  b_out_ = Tensor::zeros({1, 1});
}

std::vector<std::pair<std::string, Tensor>> MixadModel::parameters() {
  std::vector<std::pair<std::string, Tensor>> params;
  auto add_cell = [&params](const std::string& prefix, StrgcCell& cell) {
    for (std::size_t k = 0; k < cell.w_r.size(); ++k)
      params.emplace_back(prefix + ".w_r." + std::to_string(k), cell.w_r[k]);
    for (std::size_t k = 0; k < cell.w_u.size(); ++k)
      params.emplace_back(prefix + ".w_u." + std::to_string(k), cell.w_u[k]);
    for (std::size_t k = 0; k < cell.w_c.size(); ++k)
      params.emplace_back(prefix + ".w_c." + std::to_string(k), cell.w_c[k]);
    params.emplace_back(prefix + ".b_r", cell.b_r);
    params.emplace_back(prefix + ".b_u", cell.b_u);
    params.emplace_back(prefix + ".b_c", cell.b_c);
  };
  add_cell("encoder", encoder_);
  add_cell("decoder", decoder_);
  params.emplace_back("memory.items", memory_.items);
  params.emplace_back("memory.w_q", memory_.w_q);
  params.emplace_back("memory.b_q", memory_.b_q);
  params.emplace_back("graph.embed", graphgen_.embed);
  params.emplace_back("proj.w", w_proj_);
  params.emplace_back("proj.b", b_proj_);
  params.emplace_back("head.w", w_out_);
  params.emplace_back("head.b", b_out_);
  return params;
}

Tensor MixadModel::sample_adjacency(GraphMode mode, Rng* rng) const {
  return generate_graph(memory_.items, graphgen_, mode, rng);
}

Tensor MixadModel::sample_graph(GraphMode mode, Rng* rng) const {
  return normalize_adjacency(sample_adjacency(mode, rng));
}

MemoryReadout MixadModel::encode_attention(const Tensor& window, const Tensor& a_norm) const {
  if (window.rank() != 2 || window.rows() != cfg_.nodes)
    throw ShapeError("forward: window " + shape_str(window.shape()) + " does not match N=" +
                     std::to_string(cfg_.nodes));
  const std::size_t w = window.cols();
  if (w < 1) throw ShapeError("forward: empty window");
  Tensor h = Tensor::zeros({cfg_.nodes, cfg_.hidden});
  for (std::size_t t = 0; t < w; ++t) {
    try {
      h = strgc_step(encoder_, slice_cols(window, t, t + 1), h, a_norm);
    } catch (const NumericError& e) {
      throw NumericError("forward: encoder step " + std::to_string(t) + ": " + e.what());
    }
  }
  return query_memory(h, memory_);
}

ForwardResult MixadModel::forward(const Tensor& window, const Tensor& a_norm) const {
  if (window.rank() != 2 || window.rows() != cfg_.nodes)
    throw ShapeError("forward: window " + shape_str(window.shape()) + " does not match N=" +
                     std::to_string(cfg_.nodes));
  const std::size_t w = window.cols();
  if (w < 1) throw ShapeError("forward: empty window");

  Tensor h = Tensor::zeros({cfg_.nodes, cfg_.hidden});
  for (std::size_t t = 0; t < w; ++t) {
    try {
      h = strgc_step(encoder_, slice_cols(window, t, t + 1), h, a_norm);
    } catch (const NumericError& e) {
      throw NumericError("forward: encoder step " + std::to_string(t) + ": " + e.what());
    }
  }

  ForwardResult result;
  result.memory = query_memory(h, memory_);
  Tensor h_dec = concat_augment(h, result.memory.h_aug, w_proj_, b_proj_);

  // Reverse-order reconstruction: step s emits the window column w-1-s.
  std::vector<Tensor> reversed_cols;
  reversed_cols.reserve(w);
  Tensor step_in = Tensor::zeros({cfg_.nodes, 1});
  for (std::size_t s = 0; s < w; ++s) {
    try {
      h_dec = strgc_step(decoder_, step_in, h_dec, a_norm);
    } catch (const NumericError& e) {
      throw NumericError("forward: decoder step " + std::to_string(s) + ": " + e.what());
    }
    Tensor out = add_rowvec(matmul(h_dec, w_out_), b_out_);
    reversed_cols.push_back(out);
    step_in = out;
  }
  std::vector<Tensor> forward_cols(reversed_cols.rbegin(), reversed_cols.rend());
  result.reconstruction = concat_cols(forward_cols);
  return result;
}

Checkpoint MixadModel::to_checkpoint() {
  Checkpoint ckpt;
  ckpt.metadata["format"] = "mixad-model";
  ckpt.metadata["nodes"] = std::to_string(cfg_.nodes);
  ckpt.metadata["window"] = std::to_string(cfg_.window);
  ckpt.metadata["mem_items"] = std::to_string(cfg_.mem_items);
  ckpt.metadata["mem_dim"] = std::to_string(cfg_.mem_dim);
  ckpt.metadata["hidden"] = std::to_string(cfg_.hidden);
  ckpt.metadata["cheb_k"] = std::to_string(cfg_.cheb_k);
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg_.tau);
    ckpt.metadata["tau"] = buf;
  }
  for (auto& [name, tensor] : parameters()) ckpt.tensors.emplace(name, tensor.detach());
  return ckpt;
}

MixadModel MixadModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.require_meta("format") != "mixad-model")
    throw IoError("checkpoint: not a model checkpoint");
  ModelConfig cfg;
  cfg.nodes = std::stoull(ckpt.require_meta("nodes"));
  cfg.window = std::stoull(ckpt.require_meta("window"));
  cfg.mem_items = std::stoull(ckpt.require_meta("mem_items"));
  cfg.mem_dim = std::stoull(ckpt.require_meta("mem_dim"));
  cfg.hidden = std::stoull(ckpt.require_meta("hidden"));
  cfg.cheb_k = std::stoull(ckpt.require_meta("cheb_k"));
  cfg.tau = std::stod(ckpt.require_meta("tau"));

  MixadModel model(cfg, 0);
  for (auto& [name, tensor] : model.parameters()) {
    const Tensor& stored = ckpt.require(name);
    if (stored.shape() != tensor.shape())
      throw IoError("checkpoint: tensor " + name + " has shape " + shape_str(stored.shape()) +
                    ", expected " + shape_str(tensor.shape()));
    std::copy(stored.values().begin(), stored.values().end(), tensor.values_mut().begin());
  }
  return model;
}

}  // namespace mixad
