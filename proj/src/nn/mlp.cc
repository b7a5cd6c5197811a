#include "nn/mlp.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"

namespace ivae {
namespace {

void ApplyActivation(Activation activation, const Eigen::MatrixXd& pre,
                     Eigen::MatrixXd* out) {
  switch (activation) {
    case Activation::kRelu:
      *out = pre.cwiseMax(0.0);
      return;
    case Activation::kIdentity:
      *out = pre;
      return;
    case Activation::kInvertibleSmooth:
      *out = pre.array() + pre.array().tanh();
      return;
  }
}

// Multiplies `delta` in place by the activation derivative at `pre`.
void ScaleByDerivative(Activation activation, const Eigen::MatrixXd& pre,
                       Eigen::MatrixXd* delta) {
  switch (activation) {
    case Activation::kRelu:
      *delta = (pre.array() > 0.0).select(delta->array(), 0.0);
      return;
    case Activation::kIdentity:
      return;
    case Activation::kInvertibleSmooth: {
      const Eigen::ArrayXXd th = pre.array().tanh();
      delta->array() *= 2.0 - th.square();
      return;
    }
  }
}

}  // namespace

std::string_view ActivationName(Activation activation) {
  switch (activation) {
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
    case Activation::kInvertibleSmooth:
      return "invertible_smooth";
  }
  return "unknown";
}

Activation ParseActivation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  if (name == "invertible_smooth") return Activation::kInvertibleSmooth;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden, std::uint64_t seed,
         Activation output)
    : layer_sizes_(std::move(layer_sizes)),
      hidden_(hidden),
      output_(output),
      seed_(seed) {
  if (layer_sizes_.size() < 2) {
    throw InvalidArgument("Mlp needs at least an input and an output size");
  }
  for (int size : layer_sizes_) {
    if (size <= 0) throw InvalidArgument("Mlp layer sizes must be positive");
  }
  ComputeOffsets();
  // Glorot-uniform weights, zero biases.
  Rng rng(seed_);
  for (int l = 0; l < num_layers(); ++l) {
    const int fan_in = layer_sizes_[l];
    const int fan_out = layer_sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    auto w = weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = Uniform(rng, -limit, limit);
      }
    }
  }
}

void Mlp::ComputeOffsets() {
  weight_offsets_.clear();
  bias_offsets_.clear();
  std::size_t offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    weight_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(layer_sizes_[l]) * layer_sizes_[l + 1];
    bias_offsets_.push_back(offset);
    offset += layer_sizes_[l + 1];
  }
  params_.assign(offset, 0.0);
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(int layer) {
  return {params_.data() + weight_offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + weight_offsets_[layer], layer_sizes_[layer + 1],
          layer_sizes_[layer]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(int layer) {
  return {params_.data() + bias_offsets_[layer], layer_sizes_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + bias_offsets_[layer], layer_sizes_[layer + 1]};
}

Eigen::VectorXd Mlp::Forward(const Eigen::VectorXd& input) const {
  Eigen::MatrixXd out = Forward(Eigen::MatrixXd(input), nullptr);
  return out.col(0);
}

Eigen::MatrixXd Mlp::Forward(const Eigen::MatrixXd& inputs,
                             ForwardCache* cache) const {
  if (layer_sizes_.empty()) throw InvalidArgument("Mlp is not initialized");
  if (inputs.rows() != input_dim()) {
    std::ostringstream msg;
    msg << "Mlp input has " << inputs.rows() << " rows, expected "
        << input_dim();
    throw InvalidArgument(msg.str());
  }
  if (cache != nullptr) {
    cache->inputs.resize(num_layers());
    cache->preactivations.resize(num_layers());
  }
  Eigen::MatrixXd activation = inputs;
  Eigen::MatrixXd pre;
  for (int l = 0; l < num_layers(); ++l) {
    pre.noalias() = weight(l) * activation;
    pre.colwise() += bias(l);
    if (cache != nullptr) {
      cache->inputs[l] = std::move(activation);
      cache->preactivations[l] = pre;
    }
    ApplyActivation(ActivationFor(l), pre, &activation);
  }
  return activation;
}

Eigen::MatrixXd Mlp::Backward(const ForwardCache& cache,
                              const Eigen::MatrixXd& cotangent,
                              std::span<double> param_grad) const {
  if (param_grad.size() != params_.size()) {
    throw InvalidArgument("gradient buffer does not match parameter count");
  }
  if (static_cast<int>(cache.inputs.size()) != num_layers()) {
    throw InvalidArgument("forward cache does not match network depth");
  }
  if (cotangent.rows() != output_dim() ||
      cotangent.cols() != cache.inputs.front().cols()) {
    throw InvalidArgument("cotangent shape does not match network output");
  }
  Eigen::MatrixXd delta = cotangent;
  for (int l = num_layers() - 1; l >= 0; --l) {
    ScaleByDerivative(ActivationFor(l), cache.preactivations[l], &delta);
    Eigen::Map<Eigen::MatrixXd> grad_w(param_grad.data() + weight_offsets_[l],
                                       layer_sizes_[l + 1], layer_sizes_[l]);
    Eigen::Map<Eigen::VectorXd> grad_b(param_grad.data() + bias_offsets_[l],
                                       layer_sizes_[l + 1]);
    grad_w.noalias() += delta * cache.inputs[l].transpose();
    grad_b += delta.rowwise().sum();
    Eigen::MatrixXd upstream = weight(l).transpose() * delta;
    delta = std::move(upstream);
  }
  return delta;
}

MlpGradient Mlp::Backward(const Eigen::VectorXd& input,
                          const Eigen::VectorXd& cotangent) const {
  ForwardCache cache;
  Forward(Eigen::MatrixXd(input), &cache);
  MlpGradient grad;
  grad.params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params()));
  Eigen::MatrixXd d_input =
      Backward(cache, Eigen::MatrixXd(cotangent),
               {grad.params.data(), static_cast<std::size_t>(grad.params.size())});
  grad.input = d_input.col(0);
  return grad;
}

void Mlp::MakeWeightsPositive() {
  for (int l = 0; l < num_layers(); ++l) weight(l) = weight(l).cwiseAbs();
}

// Record layout (text, one token per whitespace):
//   mlp <num_sizes> <size>... <hidden_activation> <output_activation> <seed>
//   <num_params> <param>...
void Mlp::Save(std::ostream& out) const {
  out << "mlp " << layer_sizes_.size();
  for (int size : layer_sizes_) out << ' ' << size;
  out << ' ' << ActivationName(hidden_) << ' ' << ActivationName(output_)
      << ' ' << seed_ << '\n'
      << params_.size() << '\n';
  // Per layer: weights row by row, then the bias.
  for (int l = 0; l < num_layers(); ++l) {
    const auto w = weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << FormatDouble(w(r, c)) << '\n';
    }
    for (double b : bias(l)) out << FormatDouble(b) << '\n';
  }
}

Mlp Mlp::Load(std::istream& in) {
  std::string tag;
  std::size_t num_sizes = 0;
  if (!(in >> tag >> num_sizes) || tag != "mlp" || num_sizes < 2 ||
      num_sizes > 1024) {
    throw ParseError("malformed mlp record header");
  }
  Mlp net;
  net.layer_sizes_.resize(num_sizes);
  for (int& size : net.layer_sizes_) {
    if (!(in >> size) || size <= 0) throw ParseError("bad mlp layer size");
  }
  std::string hidden, output;
  std::size_t count = 0;
  if (!(in >> hidden >> output >> net.seed_ >> count)) {
    throw ParseError("truncated mlp record header");
  }
  net.hidden_ = ParseActivation(hidden);
  net.output_ = ParseActivation(output);
  net.ComputeOffsets();
  if (count != net.params_.size()) {
    throw ParseError("mlp parameter count does not match layer sizes");
  }
  std::string token;
  auto next = [&]() {
    if (!(in >> token)) throw ParseError("truncated mlp parameter list");
    return ParseDouble(token);
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    auto w = net.weight(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = next();
    }
    for (double& b : net.bias(l)) b = next();
  }
  return net;
}

}  // namespace ivae
