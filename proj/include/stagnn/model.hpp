#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stagnn/tensor.hpp"

namespace stagnn {

// Ablation family. The full model is a graph stage feeding a temporal stage;
// the other variants drop one stage or the attention inside a stage.
enum class Variant { kGnn, kAgnn, kTcn, kAtcn, kStgnn, kStagnn };

Variant parse_variant(std::string_view name);
std::string variant_name(Variant v);
const std::vector<Variant>& all_variants();

bool uses_graph(Variant v);
bool uses_tcn(Variant v);
bool has_spatial_attention(Variant v);
bool has_temporal_attention(Variant v);

struct ModelConfig {
  Variant variant = Variant::kStagnn;
  int nodes = 24;        // sensor graph size, one node per channel
  int window = 50;       // cycles per input window
  int gcn_hidden = 64;   // graph embedding width; doubles as the sequence
                         // length handed to the temporal stage
  int heads_spatial = 2;
  int heads_temporal = 2;
  int kernel_size = 2;   // temporal convolution width
  int tcn_channels1 = 64;
  int tcn_channels2 = 10;
  double leaky_slope = 0.2;
  double dropout = 0.5;
  std::uint64_t seed = 1;
  // diagnostic switch: attention blocks pass their input through unchanged
  // while their parameters stay registered (and therefore untrained)
  bool identity_attention = false;
};

struct Parameter {
  std::string name;
  Tensor value;
};

// attention weights and the flattened pre-head activations of one forward
// pass, for export and inspection
struct ForwardCapture {
  // spatial_alpha[layer][head]: nodes x nodes, rows sum to one
  std::vector<std::vector<std::vector<double>>> spatial_alpha;
  // temporal_beta[layer][head]: one weight per time step, sums to one
  std::vector<std::vector<std::vector<double>>> temporal_beta;
  std::vector<double> features;
};

// -- building blocks ---------------------------------------------------------

// relu(a_hat * h * w)
Tensor gcn_layer(Tape& tape, const Tensor& a_hat, const Tensor& h, const Tensor& w);

// Multi-head neighbor mixing. Per head, the score of pair (i, j) is
// leaky_relu(wg^T [h_i || h_j]); mask holds 0 on pairs that may attend
// (linked nodes and the diagonal) and a large negative value elsewhere, so
// softmax confines each row to its neighborhood. Head outputs are averaged.
// When alphas is non-null the per-head attention matrices are appended.
Tensor spatial_attention(Tape& tape, const Tensor& h, const std::vector<Tensor>& head_weights,
                         const Tensor& mask, double slope,
                         std::vector<std::vector<double>>* alphas = nullptr);

// Two causal convs sharing one dilation, each relu + dropout, plus a skip
// path (1x1 projection when given). No activation after the sum.
Tensor tcn_block(Tape& tape, const Tensor& x, const Tensor& conv1_w, const Tensor& conv2_w,
                 const Tensor* project_w, std::int64_t dilation, double dropout_p,
                 bool training, std::mt19937_64* rng);

// Multi-head time-step weighting of a time-major sequence h_t (steps x
// channels). Per head, beta = softmax over steps of sigmoid(h_t * w + b) and
// the output scales each step by its weight; heads are averaged.
Tensor temporal_attention(Tape& tape, const Tensor& h_t, const std::vector<Tensor>& weights,
                          const std::vector<Tensor>& biases,
                          std::vector<std::vector<double>>* betas = nullptr);

// -- assembled model ---------------------------------------------------------

class Model {
 public:
  // propagation is the nodes x nodes normalized adjacency from the graph
  // module; variants without a graph stage accept an empty vector
  Model(ModelConfig cfg, std::vector<double> propagation);

  // window must be {cfg.window, cfg.nodes}. A non-null rng enables dropout
  // (training mode). Returns a {1, 1} prediction.
  Tensor forward(Tape& tape, const Tensor& window, std::mt19937_64* rng,
                 ForwardCapture* capture = nullptr) const;

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::int64_t parameter_count() const;
  const ModelConfig& config() const { return cfg_; }

  const Tensor& parameter(const std::string& name) const;
  bool has_parameter(const std::string& name) const;
  void set_parameter(const std::string& name, const std::vector<double>& values);

 private:
  Tensor add_weight(const std::string& name, const Shape& shape, std::int64_t fan_in);
  Tensor add_bias(const std::string& name);
  std::vector<Tensor> head_params(const std::string& stem, const std::string& leaf,
                                  int heads) const;

  ModelConfig cfg_;
  Tensor prop_;       // constant propagation matrix
  Tensor attn_mask_;  // 0 on linked pairs and the diagonal, -1e30 elsewhere
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace stagnn
