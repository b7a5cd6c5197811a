#ifndef IVAE_NN_MLP_H_
#define IVAE_NN_MLP_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ivae {

enum class Activation {
  kRelu,
  kIdentity,
  // x + tanh(x): smooth, strictly increasing, invertible.
  kInvertibleSmooth,
};

std::string_view ActivationName(Activation activation);
Activation ParseActivation(std::string_view name);

// Layer inputs and pre-activations recorded by a batched forward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> preactivations;
};

struct MlpGradient {
  Eigen::VectorXd params;  // same layout as Mlp::params()
  Eigen::VectorXd input;
};

// Dense feed-forward network. All parameters live in one contiguous buffer
// (per layer: column-major weight matrix of shape out x in, then bias), so an
// optimizer or serializer can treat the network as a flat vector.
//
// Batched calls take one sample per column.
class Mlp {
 public:
  Mlp() = default;
  // `layer_sizes` lists input width, hidden widths, output width; it needs at
  // least two entries. `hidden` is applied after every layer but the last;
  // `output` after the last one.
  Mlp(std::vector<int> layer_sizes, Activation hidden, std::uint64_t seed,
      Activation output = Activation::kIdentity);

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Eigen::VectorXd Forward(const Eigen::VectorXd& input) const;
  // `cache` may be null when no backward pass follows.
  Eigen::MatrixXd Forward(const Eigen::MatrixXd& inputs,
                          ForwardCache* cache) const;

  // Gradient of sum(cotangent .* output) with respect to every parameter
  // (accumulated into `param_grad`) and returned with respect to the inputs.
  Eigen::MatrixXd Backward(const ForwardCache& cache,
                           const Eigen::MatrixXd& cotangent,
                           std::span<double> param_grad) const;
  MlpGradient Backward(const Eigen::VectorXd& input,
                       const Eigen::VectorXd& cotangent) const;

  // Replaces every weight by its absolute value. With kInvertibleSmooth (or
  // identity) activations a 1 -> 1 network becomes strictly increasing.
  void MakeWeightsPositive();

  void Save(std::ostream& out) const;
  static Mlp Load(std::istream& in);

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.layer_sizes_ == b.layer_sizes_ && a.hidden_ == b.hidden_ &&
           a.output_ == b.output_ && a.params_ == b.params_;
  }

 private:
  void ComputeOffsets();
  Activation ActivationFor(int layer) const {
    return layer + 1 == num_layers() ? output_ : hidden_;
  }

  std::vector<int> layer_sizes_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
  std::vector<std::size_t> weight_offsets_;
  std::vector<std::size_t> bias_offsets_;
};

}  // namespace ivae

#endif  // IVAE_NN_MLP_H_
