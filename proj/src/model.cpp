#include "stagnn/model.hpp"

#include <cmath>

#include "stagnn/errors.hpp"
#include "stagnn/ops.hpp"
#include "stagnn/rng.hpp"

namespace stagnn {

namespace {

constexpr double kMaskedScore = -1e30;

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "gnn") return Variant::kGnn;
  if (name == "agnn") return Variant::kAgnn;
  if (name == "tcn") return Variant::kTcn;
  if (name == "atcn") return Variant::kAtcn;
  if (name == "stgnn") return Variant::kStgnn;
  if (name == "stagnn") return Variant::kStagnn;
  throw ParameterError("unknown variant '" + std::string(name) + "'");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kGnn: return "gnn";
    case Variant::kAgnn: return "agnn";
    case Variant::kTcn: return "tcn";
    case Variant::kAtcn: return "atcn";
    case Variant::kStgnn: return "stgnn";
    case Variant::kStagnn: return "stagnn";
  }
  throw ParameterError("invalid variant value");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> order{Variant::kGnn,  Variant::kAgnn,
                                          Variant::kTcn,  Variant::kAtcn,
                                          Variant::kStgnn, Variant::kStagnn};
  return order;
}

bool uses_graph(Variant v) {
  return v == Variant::kGnn || v == Variant::kAgnn || v == Variant::kStgnn ||
         v == Variant::kStagnn;
}

bool uses_tcn(Variant v) {
  return v == Variant::kTcn || v == Variant::kAtcn || v == Variant::kStgnn ||
         v == Variant::kStagnn;
}

bool has_spatial_attention(Variant v) {
  return v == Variant::kAgnn || v == Variant::kStagnn;
}

bool has_temporal_attention(Variant v) {
  return v == Variant::kAtcn || v == Variant::kStagnn;
}

Tensor gcn_layer(Tape& tape, const Tensor& a_hat, const Tensor& h, const Tensor& w) {
  return relu(tape, matmul(tape, matmul(tape, a_hat, h), w));
}

Tensor spatial_attention(Tape& tape, const Tensor& h, const std::vector<Tensor>& head_weights,
                         const Tensor& mask, double slope,
                         std::vector<std::vector<double>>* alphas) {
  if (head_weights.empty()) throw ParameterError("spatial attention needs at least one head");
  const std::int64_t width = h.dim(1);
  Tensor acc;
  for (const Tensor& wg : head_weights) {
    if (wg.ndim() != 2 || wg.dim(0) != 2 * width || wg.dim(1) != 1) {
      throw DimensionError("spatial head weight must be " + std::to_string(2 * width) + "x1");
    }
    Tensor source = matmul(tape, h, slice_rows(tape, wg, 0, width));
    Tensor target = matmul(tape, h, slice_rows(tape, wg, width, 2 * width));
    Tensor scores = leaky_relu(tape, add(tape, source, transpose(tape, target)), slope);
    Tensor alpha = softmax(tape, add(tape, scores, mask), 1);
    if (alphas) alphas->push_back(alpha.data_vec());
    Tensor mixed = matmul(tape, alpha, h);
    acc = acc.defined() ? add(tape, acc, mixed) : mixed;
  }
  return mul_scalar(tape, acc, 1.0 / static_cast<double>(head_weights.size()));
}

Tensor tcn_block(Tape& tape, const Tensor& x, const Tensor& conv1_w, const Tensor& conv2_w,
                 const Tensor* project_w, std::int64_t dilation, double dropout_p,
                 bool training, std::mt19937_64* rng) {
  Tensor h = conv1d_causal(tape, x, conv1_w, dilation);
  h = dropout(tape, relu(tape, h), dropout_p, training, rng);
  h = conv1d_causal(tape, h, conv2_w, dilation);
  h = dropout(tape, relu(tape, h), dropout_p, training, rng);
  Tensor res = project_w ? conv1d_causal(tape, x, *project_w, 1) : x;
  return add(tape, h, res);
}

Tensor temporal_attention(Tape& tape, const Tensor& h_t, const std::vector<Tensor>& weights,
                          const std::vector<Tensor>& biases,
                          std::vector<std::vector<double>>* betas) {
  if (weights.empty() || weights.size() != biases.size()) {
    throw ParameterError("temporal attention needs matching weight/bias heads");
  }
  Tensor acc;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    Tensor gate = sigmoid(tape, add(tape, matmul(tape, h_t, weights[m]), biases[m]));
    Tensor beta = softmax(tape, gate, 0);
    if (betas) betas->push_back(beta.data_vec());
    Tensor weighted = mul(tape, h_t, beta);
    acc = acc.defined() ? add(tape, acc, weighted) : weighted;
  }
  return mul_scalar(tape, acc, 1.0 / static_cast<double>(weights.size()));
}

Model::Model(ModelConfig cfg, std::vector<double> propagation) : cfg_(cfg) {
  if (cfg.nodes < 1) throw ConfigError("nodes must be positive");
  if (cfg.window < 1) throw ConfigError("window must be positive");
  if (cfg.gcn_hidden < 1) throw ConfigError("gcn_hidden must be positive");
  if (cfg.heads_spatial < 1 || cfg.heads_temporal < 1) {
    throw ConfigError("head counts must be positive");
  }
  if (cfg.kernel_size < 1) throw ConfigError("kernel_size must be positive");
  if (cfg.tcn_channels1 < 1 || cfg.tcn_channels2 < 1) {
    throw ConfigError("tcn channel counts must be positive");
  }
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) {
    throw ConfigError("dropout must be in [0, 1)");
  }
  if (cfg.leaky_slope < 0.0) throw ConfigError("leaky_slope must be non-negative");

  const std::int64_t n = cfg.nodes;
  if (uses_graph(cfg.variant)) {
    if (propagation.empty()) {
      throw ConfigError("variant '" + variant_name(cfg.variant) + "' requires a sensor graph");
    }
    if (propagation.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
      throw DimensionError("propagation matrix does not match node count");
    }
    std::vector<double> mask(propagation.size(), kMaskedScore);
    for (std::size_t i = 0; i < propagation.size(); ++i) {
      if (propagation[i] != 0.0) mask[i] = 0.0;
    }
    prop_ = Tensor::from_data({n, n}, std::move(propagation));
    attn_mask_ = Tensor::from_data({n, n}, std::move(mask));
  }

  const std::int64_t h = cfg.gcn_hidden;
  const std::int64_t c1 = cfg.tcn_channels1;
  const std::int64_t c2 = cfg.tcn_channels2;
  const std::int64_t k = cfg.kernel_size;

  if (uses_graph(cfg.variant)) {
    add_weight("gcn1.weight", {cfg.window, h}, cfg.window);
    if (has_spatial_attention(cfg.variant)) {
      for (int m = 0; m < cfg.heads_spatial; ++m) {
        add_weight("spatial1.head" + std::to_string(m) + ".weight", {2 * h, 1}, 2 * h);
      }
    }
    add_weight("gcn2.weight", {h, h}, h);
    if (has_spatial_attention(cfg.variant)) {
      for (int m = 0; m < cfg.heads_spatial; ++m) {
        add_weight("spatial2.head" + std::to_string(m) + ".weight", {2 * h, 1}, 2 * h);
      }
    }
  }

  if (uses_tcn(cfg.variant)) {
    add_weight("tcn1.conv1.weight", {c1, n, k}, n * k);
    add_weight("tcn1.conv2.weight", {c1, c1, k}, c1 * k);
    if (n != c1) add_weight("tcn1.project.weight", {c1, n, 1}, n);
    if (has_temporal_attention(cfg.variant)) {
      for (int m = 0; m < cfg.heads_temporal; ++m) {
        const std::string head = "temporal1.head" + std::to_string(m);
        add_weight(head + ".weight", {c1, 1}, c1);
        add_bias(head + ".bias");
      }
    }
    add_weight("tcn2.conv1.weight", {c2, c1, k}, c1 * k);
    add_weight("tcn2.conv2.weight", {c2, c2, k}, c2 * k);
    if (c1 != c2) add_weight("tcn2.project.weight", {c2, c1, 1}, c1);
    if (has_temporal_attention(cfg.variant)) {
      for (int m = 0; m < cfg.heads_temporal; ++m) {
        const std::string head = "temporal2.head" + std::to_string(m);
        add_weight(head + ".weight", {c2, 1}, c2);
        add_bias(head + ".bias");
      }
    }
  }

  std::int64_t head_in;
  if (uses_tcn(cfg.variant)) {
    const std::int64_t seq = uses_graph(cfg.variant) ? h : cfg.window;
    head_in = seq * c2;
  } else {
    head_in = n * h;
  }
  add_weight("head.weight", {head_in, 1}, head_in);
  add_bias("head.bias");
}

Tensor Model::add_weight(const std::string& name, const Shape& shape, std::int64_t fan_in) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  auto rng = make_rng(seed_mix(cfg_.seed, fnv1a(name)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : data) v = dist(rng);
  Tensor t = Tensor::from_data(shape, std::move(data), true);
  index_[name] = params_.size();
  params_.push_back({name, t});
  return t;
}

Tensor Model::add_bias(const std::string& name) {
  Tensor t = Tensor::zeros({1, 1}, true);
  index_[name] = params_.size();
  params_.push_back({name, t});
  return t;
}

std::int64_t Model::parameter_count() const {
  std::int64_t total = 0;
  for (const Parameter& p : params_) total += p.value.numel();
  return total;
}

const Tensor& Model::parameter(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParameterError("no parameter named '" + name + "'");
  return params_[it->second].value;
}

bool Model::has_parameter(const std::string& name) const { return index_.count(name) > 0; }

void Model::set_parameter(const std::string& name, const std::vector<double>& values) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ParameterError("no parameter named '" + name + "'");
  Tensor& t = params_[it->second].value;
  if (values.size() != static_cast<std::size_t>(t.numel())) {
    throw DimensionError("parameter '" + name + "' expects " + std::to_string(t.numel()) +
                         " values, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), t.mutable_data());
}

std::vector<Tensor> Model::head_params(const std::string& stem, const std::string& leaf,
                                       int heads) const {
  std::vector<Tensor> out;
  for (int m = 0; m < heads; ++m) {
    out.push_back(parameter(stem + ".head" + std::to_string(m) + "." + leaf));
  }
  return out;
}

Tensor Model::forward(Tape& tape, const Tensor& window, std::mt19937_64* rng,
                      ForwardCapture* capture) const {
  if (window.ndim() != 2 || window.dim(0) != cfg_.window || window.dim(1) != cfg_.nodes) {
    throw DimensionError("window must be " + std::to_string(cfg_.window) + "x" +
                         std::to_string(cfg_.nodes) + ", got " + shape_str(window.shape()));
  }
  if (capture) {
    capture->spatial_alpha.clear();
    capture->temporal_beta.clear();
    capture->features.clear();
  }
  const bool training = rng != nullptr;
  const bool spatial = has_spatial_attention(cfg_.variant) && !cfg_.identity_attention;
  const bool temporal = has_temporal_attention(cfg_.variant) && !cfg_.identity_attention;

  Tensor h = transpose(tape, window);  // nodes x window

  if (uses_graph(cfg_.variant)) {
    for (int layer = 1; layer <= 2; ++layer) {
      h = gcn_layer(tape, prop_, h, parameter("gcn" + std::to_string(layer) + ".weight"));
      if (spatial) {
        std::vector<std::vector<double>> alphas;
        h = spatial_attention(tape, h,
                              head_params("spatial" + std::to_string(layer), "weight",
                                          cfg_.heads_spatial),
                              attn_mask_, cfg_.leaky_slope, capture ? &alphas : nullptr);
        if (capture) capture->spatial_alpha.push_back(std::move(alphas));
      }
    }
  }

  if (uses_tcn(cfg_.variant)) {
    // the node embedding matrix doubles as a multichannel sequence: one
    // channel per node, one step per embedding coordinate
    for (int block = 1; block <= 2; ++block) {
      const std::string prefix = "tcn" + std::to_string(block) + ".";
      const std::string project = prefix + "project.weight";
      const Tensor* proj = has_parameter(project) ? &parameter(project) : nullptr;
      const std::int64_t dilation = std::int64_t{1} << (block - 1);
      h = tcn_block(tape, h, parameter(prefix + "conv1.weight"),
                    parameter(prefix + "conv2.weight"), proj, dilation, cfg_.dropout, training,
                    rng);
      if (temporal) {
        std::vector<std::vector<double>> betas;
        const std::string stem = "temporal" + std::to_string(block);
        Tensor ht = temporal_attention(tape, transpose(tape, h),
                                       head_params(stem, "weight", cfg_.heads_temporal),
                                       head_params(stem, "bias", cfg_.heads_temporal),
                                       capture ? &betas : nullptr);
        if (capture) capture->temporal_beta.push_back(std::move(betas));
        h = transpose(tape, ht);
      }
    }
    h = transpose(tape, h);  // time major for the readout
  }
  h = reshape(tape, h, {1, h.dim(0) * h.dim(1)});

  if (capture) capture->features = h.data_vec();
  return add(tape, matmul(tape, h, parameter("head.weight")), parameter("head.bias"));
}

}  // namespace stagnn
