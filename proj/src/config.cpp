#include "mixad/config.hpp"

#include <algorithm>

#include "mixad/csv.hpp"
#include "mixad/error.hpp"

namespace mixad {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::size_t to_size(const std::string& v, const std::string& context) {
  return csv::parse_index(v, context);
}

double to_double(const std::string& v, const std::string& context) {
  return csv::parse_double(v, context);
}

}  // namespace

std::vector<AnomalySpec> parse_anomaly_specs(const std::string& text,
                                             const std::string& context) {
  std::vector<AnomalySpec> specs;
  if (trim(text).empty()) return specs;
  for (const std::string& item : csv::split(text, ',')) {
    const std::vector<std::string> parts = csv::split(trim(item), ':');
    if (parts.size() != 3)
      throw ValueError(context + ": anomaly spec '" + item + "' is not kind:span:causes");
    AnomalySpec spec;
    if (parts[0] == "spike") spec.kind = AnomalyKind::spike;
    else if (parts[0] == "shift") spec.kind = AnomalyKind::level_shift;
    else if (parts[0] == "corr") spec.kind = AnomalyKind::correlation_break;
    else throw ValueError(context + ": unknown anomaly kind '" + parts[0] + "'");
    spec.span = to_size(parts[1], context);
    spec.causes = to_size(parts[2], context);
    specs.push_back(spec);
  }
  return specs;
}

void RunConfig::apply(const std::string& key, const std::string& value,
                      const std::string& context) {
  if (key == "window") train.window = to_size(value, context);
  else if (key == "batch") train.batch = to_size(value, context);
  else if (key == "lr") train.lr = to_double(value, context);
  else if (key == "max_epochs") train.max_epochs = to_size(value, context);
  else if (key == "patience") train.patience = to_size(value, context);
  else if (key == "val_fraction") train.val_fraction = to_double(value, context);
  else if (key == "seed") train.seed = to_size(value, context);
  else if (key == "mem_items") train.mem_items = to_size(value, context);
  else if (key == "mem_dim") train.mem_dim = to_size(value, context);
  else if (key == "hidden") train.hidden = to_size(value, context);
  else if (key == "cheb_k") train.cheb_k = to_size(value, context);
  else if (key == "tau") train.tau = to_double(value, context);
  else if (key == "stride") train.stride = to_size(value, context);
  else if (key == "clip_norm") train.clip_norm = to_double(value, context);
  else if (key == "margin") train.loss.margin = to_double(value, context);
  else if (key == "lambda1") train.loss.lambda1 = to_double(value, context);
  else if (key == "lambda2") train.loss.lambda2 = to_double(value, context);
  else if (key == "lambda3") train.loss.lambda3 = to_double(value, context);
  else if (key == "recon_loss") {
    if (value == "mae") train.loss.recon = ReconLossKind::mae;
    else if (value == "mse") train.loss.recon = ReconLossKind::mse;
    else throw ValueError(context + ": recon_loss must be mae or mse, got '" + value + "'");
  } else if (key == "synth_nodes") synth.nodes = to_size(value, context);
  else if (key == "synth_t_train") synth.t_train = to_size(value, context);
  else if (key == "synth_t_test") synth.t_test = to_size(value, context);
  else if (key == "synth_coupling_density") synth.coupling_density = to_double(value, context);
  else if (key == "synth_noise_sigma") synth.noise_sigma = to_double(value, context);
  else if (key == "synth_seed") synth.seed = to_size(value, context);
  else if (key == "synth_anomalies") synth.anomalies = parse_anomaly_specs(value, context);
  else if (key == "synth_period_pool") {
    synth.period_pool.clear();
    for (const std::string& p : csv::split(value, ';'))
      synth.period_pool.push_back(to_double(trim(p), context));
  } else {
    throw ValueError(context + ": unknown config key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  const std::vector<std::string> lines = csv::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string context = path.string() + ":" + std::to_string(i + 1);
    std::string line = lines[i];
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ValueError(context + ": expected key=value");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), context);
  }
  return cfg;
}

}  // namespace mixad
