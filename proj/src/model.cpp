#include "xneusm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "xneusm/error.hpp"
#include "xneusm/rng.hpp"

namespace xneusm {

using ad::Tensor;

const char* hop_schedule_name(HopSchedule s) {
  switch (s) {
    case HopSchedule::one: return "one";
    case HopSchedule::increasing: return "increasing";
    case HopSchedule::interleaved: return "interleaved";
  }
  return "interleaved";
}

HopSchedule hop_schedule_from_name(const std::string& name) {
  if (name == "one" || name == "1-hop") return HopSchedule::one;
  if (name == "increasing") return HopSchedule::increasing;
  if (name == "interleaved") return HopSchedule::interleaved;
  fail(Errc::domain_error, "unknown hop schedule '" + name + "'");
}

namespace {

Tensor init_weight(int rows, int cols, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (double& x : data) x = rng.uniform(-bound, bound);
  return Tensor::param(rows, cols, std::move(data));
}

GlemaLayerParams init_glema_layer(int in_dim, int hidden, int heads, double slope, Rng& rng) {
  GlemaLayerParams layer;
  layer.leaky_slope = slope;
  for (int h = 0; h < heads; ++h) {
    GlemaHeadParams head;
    head.w_h = init_weight(hidden, in_dim, in_dim, rng);
    head.w_e = init_weight(hidden, hidden, hidden, rng);
    head.w_beta = init_weight(2 * hidden, 1, 2 * hidden, rng);
    head.b_beta = Tensor::param(1, 1, {0.0});
    layer.heads.push_back(std::move(head));
  }
  layer.w_o = init_weight(heads * hidden, hidden, heads * hidden, rng);
  return layer;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  if (config.t_v < 1) fail(Errc::domain_error, "model config needs t_v >= 1");
  if (config.num_layers < 1 || config.fc_layers < 1 || config.num_heads < 1)
    fail(Errc::domain_error, "model config needs positive layer/head counts");

  Rng rng(seed);
  ModelParams p;
  p.config = config;
  const int hidden = config.hidden_dim;

  for (int l = 0; l < config.num_layers; ++l) {
    const int in_dim = l == 0 ? 2 * config.t_v : hidden;
    Layer layer;
    layer.intra = init_glema_layer(in_dim, hidden, config.num_heads, config.leaky_slope, rng);
    layer.cross = config.shared_branches
                      ? layer.intra
                      : init_glema_layer(in_dim, hidden, config.num_heads, config.leaky_slope, rng);
    p.layers.push_back(std::move(layer));
  }

  int width = hidden;
  for (int i = 0; i < config.fc_layers - 1; ++i) {
    p.fc_w.push_back(init_weight(config.fc_hidden, width, width, rng));
    p.fc_b.push_back(Tensor::param(1, config.fc_hidden,
                                   std::vector<double>(config.fc_hidden, 0.0)));
    width = config.fc_hidden;
  }
  p.out_w = init_weight(1, width, width, rng);
  p.out_b = Tensor::param(1, 1, {0.0});
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor>> named;
  auto add_layer = [&](const std::string& prefix, GlemaLayerParams& lp) {
    for (std::size_t h = 0; h < lp.heads.size(); ++h) {
      const std::string hp = prefix + ".h" + std::to_string(h);
      named.emplace_back(hp + ".w_h", lp.heads[h].w_h);
      named.emplace_back(hp + ".w_e", lp.heads[h].w_e);
      named.emplace_back(hp + ".w_beta", lp.heads[h].w_beta);
      named.emplace_back(hp + ".b_beta", lp.heads[h].b_beta);
    }
    named.emplace_back(prefix + ".w_o", lp.w_o);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    add_layer("g" + std::to_string(l) + ".in", layers[l].intra);
    if (!config.shared_branches) add_layer("g" + std::to_string(l) + ".cr", layers[l].cross);
  }
  for (std::size_t i = 0; i < fc_w.size(); ++i) {
    named.emplace_back("fc" + std::to_string(i) + ".w", fc_w[i]);
    named.emplace_back("fc" + std::to_string(i) + ".b", fc_b[i]);
  }
  named.emplace_back("out.w", out_w);
  named.emplace_back("out.b", out_b);
  return named;
}

ForwardResult model_forward(const JointInput& input, const ModelParams& params) {
  const auto& cfg = params.config;
  if (input.t_v != cfg.t_v)
    fail(Errc::shape_mismatch, "input encoded with t_v " + std::to_string(input.t_v) +
                                   " but model expects " + std::to_string(cfg.t_v));

  const int n = input.n;
  Tensor x = Tensor::constant(n, 2 * cfg.t_v, input.x);
  Tensor mask_in = Tensor::constant(n, n, input.a_in);
  Tensor mask_cr = Tensor::constant(n, n, input.a_cr);

  ForwardResult result;
  result.pattern_count = input.pattern_count;

  for (int l = 0; l < cfg.num_layers; ++l) {
    const int hops = cfg.hops_for_layer(l + 1);
    GlemaOutput intra = glema_forward(x, mask_in, params.layers[l].intra, hops, input.directed);
    GlemaOutput cross = glema_forward(x, mask_cr, params.layers[l].cross, hops, input.directed);
    x = ad::sub(cross.x_hat, intra.x_hat);
    if (l == cfg.num_layers - 1) result.cross_attention = std::move(cross.attention);
  }

  // Readout over pattern rows only.
  std::vector<int> pattern_rows(input.pattern_count);
  for (int i = 0; i < input.pattern_count; ++i) pattern_rows[i] = i;
  Tensor repr = ad::mean_rows_subset(x, pattern_rows);

  for (std::size_t i = 0; i < params.fc_w.size(); ++i) {
    repr = ad::leaky_relu(ad::add(ad::matmul_nt(repr, params.fc_w[i]), params.fc_b[i]), 0.0);
  }
  result.y_hat = ad::sigmoid(ad::add(ad::matmul_nt(repr, params.out_w), params.out_b));
  return result;
}

Explanation extract_mapping(const std::vector<Tensor>& cross_attention, int pattern_count,
                            double epsilon) {
  if (cross_attention.empty()) fail(Errc::domain_error, "no attention heads");
  const int n = cross_attention.front().rows();
  const int target_count = n - pattern_count;
  const double head_norm = 1.0 / static_cast<double>(cross_attention.size());

  Explanation ex;
  ex.rankings.resize(pattern_count);
  for (int i = 0; i < pattern_count; ++i) {
    for (int j = 0; j < target_count; ++j) {
      double p = 0.0;
      for (const Tensor& a : cross_attention)
        p += 0.5 * (a.at(i, pattern_count + j) + a.at(pattern_count + j, i));
      p *= head_norm;
      if (p <= 0.0) continue;
      ex.rankings[i].push_back({pattern_count + j, p});
      if (p >= epsilon) ex.triples.push_back({i, pattern_count + j, p});
    }
    std::stable_sort(ex.rankings[i].begin(), ex.rankings[i].end(),
                     [](const auto& a, const auto& b) {
                       if (a.second != b.second) return a.second > b.second;
                       return a.first < b.first;
                     });
    // Report target-local node ids.
    for (auto& [node, p] : ex.rankings[i]) node -= pattern_count;
  }
  for (auto& t : ex.triples) t.target_node -= pattern_count;
  return ex;
}

// ---------------------------------------------------------------------------
// Checkpoints: flat config header followed by named tensor dumps.
// ---------------------------------------------------------------------------

void save_checkpoint(ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  const auto& c = params.config;
  out << "tv = " << c.t_v << '\n'
      << "hidden_dim = " << c.hidden_dim << '\n'
      << "num_layers = " << c.num_layers << '\n'
      << "num_heads = " << c.num_heads << '\n'
      << "fc_layers = " << c.fc_layers << '\n'
      << "fc_hidden = " << c.fc_hidden << '\n'
      << "leaky_slope = " << c.leaky_slope << '\n'
      << "hop_schedule = " << hop_schedule_name(c.hop_schedule) << '\n'
      << "shared_branches = " << (c.shared_branches ? 1 : 0) << '\n'
      << "epsilon = " << c.epsilon << '\n'
      << "lambda = " << c.lambda << '\n';

  char buf[32];
  for (auto& [name, tensor] : params.named_tensors()) {
    out << "tensor " << name << ' ' << tensor.rows() << ' ' << tensor.cols() << '\n';
    const auto& v = tensor.value();
    for (int r = 0; r < tensor.rows(); ++r) {
      for (int col = 0; col < tensor.cols(); ++col) {
        std::snprintf(buf, sizeof buf, "%.17g", v[static_cast<std::size_t>(r) * tensor.cols() + col]);
        out << buf << (col + 1 == tensor.cols() ? "" : " ");
      }
      out << '\n';
    }
  }
  if (!out) fail(Errc::io_error, "write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  std::streampos tensors_start = in.tellg();
  while (std::getline(in, line)) {
    if (line.rfind("tensor ", 0) == 0) break;
    tensors_start = in.tellg();
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key >> eq >> value) || eq != "=")
      fail(Errc::io_error, "malformed checkpoint header line: " + line);
    kv[key] = value;
  }

  auto get = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(Errc::io_error, "checkpoint missing config key " + key);
    return it->second;
  };

  ModelConfig cfg;
  cfg.t_v = std::stoi(get("tv"));
  cfg.hidden_dim = std::stoi(get("hidden_dim"));
  cfg.num_layers = std::stoi(get("num_layers"));
  cfg.num_heads = std::stoi(get("num_heads"));
  cfg.fc_layers = std::stoi(get("fc_layers"));
  cfg.fc_hidden = std::stoi(get("fc_hidden"));
  cfg.leaky_slope = std::stod(get("leaky_slope"));
  cfg.hop_schedule = hop_schedule_from_name(get("hop_schedule"));
  cfg.shared_branches = std::stoi(get("shared_branches")) != 0;
  cfg.epsilon = std::stod(get("epsilon"));
  cfg.lambda = std::stod(get("lambda"));

  ModelParams params = ModelParams::init(cfg, 0);

  in.clear();
  in.seekg(tensors_start);
  std::map<std::string, Tensor> by_name;
  for (auto& [name, tensor] : params.named_tensors()) by_name.emplace(name, tensor);

  std::size_t loaded = 0;
  std::string tag, name;
  int rows, cols;
  while (in >> tag) {
    if (tag != "tensor" || !(in >> name >> rows >> cols))
      fail(Errc::io_error, "malformed tensor header in " + path);
    auto it = by_name.find(name);
    if (it == by_name.end()) fail(Errc::io_error, "unexpected tensor " + name);
    Tensor t = it->second;
    if (t.rows() != rows || t.cols() != cols)
      fail(Errc::shape_mismatch, "tensor " + name + " has unexpected shape in " + path);
    for (double& x : t.raw_value())
      if (!(in >> x)) fail(Errc::io_error, "truncated tensor " + name);
    ++loaded;
  }
  if (loaded != by_name.size()) fail(Errc::io_error, "checkpoint is missing tensors");
  return params;
}

}  // namespace xneusm
