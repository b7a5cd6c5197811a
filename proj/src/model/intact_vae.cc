#include "model/intact_vae.h"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "common/errors.h"
#include "common/format.h"
#include "common/rng.h"

namespace ivae {
namespace {

constexpr std::uint64_t kNetSeedStream = 0x6e657473;  // "nets"
constexpr const char* kCheckpointMagic = "ivae-checkpoint";
constexpr int kCheckpointVersion = 1;

std::vector<int> LayerSizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void CheckTreatments(std::span<const int> t, Eigen::Index n) {
  if (static_cast<Eigen::Index>(t.size()) != n) {
    throw InvalidArgument("treatment vector has " + std::to_string(t.size()) +
                          " entries, expected " + std::to_string(n));
  }
  for (int v : t) {
    if (v != 0 && v != 1) throw InvalidArgument("treatment must be 0 or 1");
  }
}

Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = m.col(cols[j]);
  return out;
}

void ScatterColumns(const Eigen::MatrixXd& src,
                    const std::vector<Eigen::Index>& cols,
                    Eigen::MatrixXd* dst) {
  for (std::size_t j = 0; j < cols.size(); ++j) dst->col(cols[j]) = src.col(j);
}

std::span<double> AsSpan(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Forward state of one decoder head (mean and optional variance network).
struct HeadPass {
  int mean_net = -1;
  int variance_net = -1;
  std::vector<Eigen::Index> columns;  // columns of the full batch
  Eigen::MatrixXd input;
  ForwardCache mean_cache;
  ForwardCache variance_cache;
  Eigen::MatrixXd raw_variance;
};

struct DecoderPass {
  std::vector<HeadPass> heads;
  Eigen::MatrixXd mean;
  Eigen::MatrixXd variance;
};

}  // namespace

void VaeConfig::Validate() const {
  if (x_dim <= 0 || y_dim <= 0 || latent_dim <= 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  for (int h : hidden) {
    if (h <= 0) throw InvalidArgument("hidden layer sizes must be positive");
  }
  if (!learn_decoder_noise &&
      !(decoder_noise_variance > 0.0 && std::isfinite(decoder_noise_variance))) {
    throw InvalidArgument("fixed decoder noise variance must be positive");
  }
}

IntactVae::IntactVae(VaeConfig config) : config_(std::move(config)) {
  config_.Validate();
  BuildNets();
  latent_scale_ = Eigen::VectorXd::Ones(config_.latent_dim);
  latent_shift_ = Eigen::VectorXd::Zero(config_.latent_dim);
}

void IntactVae::BuildNets() {
  const VaeConfig& c = config_;
  const int enc_in = c.x_dim + c.y_dim + 1;
  const int prior_in = c.balanced_prior ? c.x_dim : c.x_dim + 1;
  const int dec_in = c.separate_decoder_heads ? c.latent_dim : c.latent_dim + 1;
  std::uint64_t index = 0;
  auto make = [&](int in, int out) {
    return Mlp(LayerSizes(in, c.hidden, out), c.activation,
               DeriveSeed(c.seed, kNetSeedStream, index++));
  };
  nets_.clear();
  nets_.push_back(make(enc_in, c.latent_dim));
  nets_.push_back(make(enc_in, c.latent_dim));
  nets_.push_back(make(prior_in, c.latent_dim));
  nets_.push_back(make(prior_in, c.latent_dim));
  const int heads = c.separate_decoder_heads ? 2 : 1;
  for (int h = 0; h < heads; ++h) {
    nets_.push_back(make(dec_in, c.y_dim));
    if (c.learn_decoder_noise) nets_.push_back(make(dec_in, c.y_dim));
  }
}

int IntactVae::DecoderMeanIndex(int t) const {
  const int stride = config_.learn_decoder_noise ? 2 : 1;
  const int head = config_.separate_decoder_heads ? t : 0;
  return kFirstDecoder + head * stride;
}

int IntactVae::DecoderVarianceIndex(int t) const {
  return config_.learn_decoder_noise ? DecoderMeanIndex(t) + 1 : -1;
}

Mlp& IntactVae::decoder_mean(int t) {
  if (t != 0 && t != 1) throw InvalidArgument("treatment must be 0 or 1");
  return nets_[DecoderMeanIndex(t)];
}

Mlp& IntactVae::decoder_variance(int t) {
  if (t != 0 && t != 1) throw InvalidArgument("treatment must be 0 or 1");
  const int index = DecoderVarianceIndex(t);
  if (index < 0) throw InvalidArgument("decoder noise is fixed, not learned");
  return nets_[index];
}

std::vector<Mlp*> IntactVae::nets() {
  std::vector<Mlp*> out;
  for (Mlp& net : nets_) out.push_back(&net);
  return out;
}

std::vector<const Mlp*> IntactVae::nets() const {
  std::vector<const Mlp*> out;
  for (const Mlp& net : nets_) out.push_back(&net);
  return out;
}

ModelGradient IntactVae::ZeroGradient() const {
  ModelGradient grad;
  for (const Mlp& net : nets_) {
    grad.push_back(
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.num_params())));
  }
  return grad;
}

Eigen::MatrixXd IntactVae::EncoderInput(const Eigen::MatrixXd& x,
                                        const Eigen::MatrixXd& y,
                                        std::span<const int> t) const {
  if (x.rows() != config_.x_dim || y.rows() != config_.y_dim ||
      x.cols() != y.cols()) {
    std::ostringstream msg;
    msg << "encoder input: got x " << x.rows() << "x" << x.cols() << " and y "
        << y.rows() << "x" << y.cols() << ", expected " << config_.x_dim
        << " and " << config_.y_dim << " rows with equal column counts";
    throw InvalidArgument(msg.str());
  }
  CheckTreatments(t, x.cols());
  Eigen::MatrixXd input(config_.x_dim + config_.y_dim + 1, x.cols());
  input.topRows(config_.x_dim) = x;
  input.middleRows(config_.x_dim, config_.y_dim) = y;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    input(input.rows() - 1, i) = t[i];
  }
  return input;
}

Eigen::MatrixXd IntactVae::PriorInput(const Eigen::MatrixXd& x,
                                      std::span<const int> t) const {
  if (x.rows() != config_.x_dim) {
    throw InvalidArgument("prior input: x has " + std::to_string(x.rows()) +
                          " rows, expected " + std::to_string(config_.x_dim));
  }
  if (config_.balanced_prior) return x;
  CheckTreatments(t, x.cols());
  Eigen::MatrixXd input(config_.x_dim + 1, x.cols());
  input.topRows(config_.x_dim) = x;
  for (Eigen::Index i = 0; i < x.cols(); ++i) input(config_.x_dim, i) = t[i];
  return input;
}

Eigen::MatrixXd IntactVae::ToExternal(const Eigen::MatrixXd& z_net) const {
  return (z_net.array().colwise() * latent_scale_.array()).colwise() +
         latent_shift_.array();
}

Eigen::MatrixXd IntactVae::ToNet(const Eigen::MatrixXd& z_external) const {
  return (z_external.array().colwise() - latent_shift_.array()).colwise() /
         latent_scale_.array();
}

GaussianBatch IntactVae::EncodeBatch(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& y,
                                     std::span<const int> t) const {
  const Eigen::MatrixXd input = EncoderInput(x, y, t);
  GaussianBatch out;
  out.mean = ToExternal(nets_[kEncoderMean].Forward(input, nullptr));
  out.variance =
      (VarianceFromRaw(nets_[kEncoderVariance].Forward(input, nullptr).array())
           .colwise() *
       latent_scale_.array().square())
          .matrix();
  return out;
}

GaussianBatch IntactVae::PriorBatch(const Eigen::MatrixXd& x,
                                    std::span<const int> t) const {
  const Eigen::MatrixXd input = PriorInput(x, t);
  GaussianBatch out;
  out.mean = ToExternal(nets_[kPriorMean].Forward(input, nullptr));
  out.variance =
      (VarianceFromRaw(nets_[kPriorVariance].Forward(input, nullptr).array())
           .colwise() *
       latent_scale_.array().square())
          .matrix();
  return out;
}

namespace {

// Runs the decoder on net-coordinate latents `u`.
DecoderPass RunDecoder(const std::vector<Mlp>& nets, const VaeConfig& config,
                       int mean_index0, int mean_index1, int var_index0,
                       int var_index1, const Eigen::MatrixXd& u,
                       std::span<const int> t, bool keep_cache) {
  const Eigen::Index n = u.cols();
  DecoderPass pass;
  pass.mean.resize(config.y_dim, n);
  pass.variance.resize(config.y_dim, n);
  if (config.separate_decoder_heads) {
    for (int arm = 0; arm < 2; ++arm) {
      HeadPass head;
      head.mean_net = arm == 0 ? mean_index0 : mean_index1;
      head.variance_net = arm == 0 ? var_index0 : var_index1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (t[i] == arm) head.columns.push_back(i);
      }
      if (head.columns.empty()) continue;
      head.input = GatherColumns(u, head.columns);
      pass.heads.push_back(std::move(head));
    }
  } else {
    HeadPass head;
    head.mean_net = mean_index0;
    head.variance_net = var_index0;
    head.input.resize(u.rows() + 1, n);
    head.input.topRows(u.rows()) = u;
    for (Eigen::Index i = 0; i < n; ++i) head.input(u.rows(), i) = t[i];
    head.columns.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) head.columns[i] = i;
    pass.heads.push_back(std::move(head));
  }
  for (HeadPass& head : pass.heads) {
    const Eigen::MatrixXd mean = nets[head.mean_net].Forward(
        head.input, keep_cache ? &head.mean_cache : nullptr);
    Eigen::MatrixXd variance;
    if (head.variance_net >= 0) {
      head.raw_variance = nets[head.variance_net].Forward(
          head.input, keep_cache ? &head.variance_cache : nullptr);
      variance = VarianceFromRaw(head.raw_variance.array()).matrix();
    } else {
      variance = Eigen::MatrixXd::Constant(config.y_dim, head.input.cols(),
                                           config.decoder_noise_variance);
    }
    ScatterColumns(mean, head.columns, &pass.mean);
    ScatterColumns(variance, head.columns, &pass.variance);
  }
  return pass;
}

}  // namespace

GaussianBatch IntactVae::DecodeBatch(const Eigen::MatrixXd& z,
                                     std::span<const int> t) const {
  if (z.rows() != config_.latent_dim) {
    throw InvalidArgument("decoder input: z has " + std::to_string(z.rows()) +
                          " rows, expected " +
                          std::to_string(config_.latent_dim));
  }
  CheckTreatments(t, z.cols());
  DecoderPass pass = RunDecoder(nets_, config_, DecoderMeanIndex(0),
                                DecoderMeanIndex(1), DecoderVarianceIndex(0),
                                DecoderVarianceIndex(1), ToNet(z), t, false);
  return {std::move(pass.mean), std::move(pass.variance)};
}

DiagGaussian IntactVae::Encode(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& y, int t) const {
  const int ts[1] = {t};
  return EncodeBatch(Eigen::MatrixXd(x), Eigen::MatrixXd(y), ts).column(0);
}

DiagGaussian IntactVae::Prior(const Eigen::VectorXd& x, int t) const {
  const int ts[1] = {t};
  return PriorBatch(Eigen::MatrixXd(x), ts).column(0);
}

DiagGaussian IntactVae::Decode(const Eigen::VectorXd& z, int t) const {
  const int ts[1] = {t};
  return DecodeBatch(Eigen::MatrixXd(z), ts).column(0);
}

ElboResult IntactVae::Elbo(const Batch& batch, const Eigen::MatrixXd& noise,
                           int mc_samples, bool compute_gradient,
                           std::span<const int> unit_ids) const {
  const Eigen::Index n = batch.size();
  const int L = config_.latent_dim;
  if (mc_samples < 1) throw InvalidArgument("mc_samples must be >= 1");
  if (n == 0) throw InvalidArgument("ELBO of an empty batch");
  if (noise.rows() != L || noise.cols() != n * mc_samples) {
    throw InvalidArgument("noise must be latent_dim x (mc_samples * batch)");
  }
  if (!unit_ids.empty() && static_cast<Eigen::Index>(unit_ids.size()) != n) {
    throw InvalidArgument("unit_ids length must match the batch");
  }
  const Eigen::ArrayXd scale = latent_scale_.array();
  const Eigen::ArrayXd shift = latent_shift_.array();
  const Eigen::ArrayXd scale2 = scale.square();

  // Encoder and prior.
  const Eigen::MatrixXd enc_in = EncoderInput(batch.x, batch.y, batch.t);
  const Eigen::MatrixXd prior_in = PriorInput(batch.x, batch.t);
  ForwardCache enc_mean_cache, enc_var_cache, prior_mean_cache, prior_var_cache;
  ForwardCache* no_cache = nullptr;
  const Eigen::MatrixXd enc_mu = nets_[kEncoderMean].Forward(
      enc_in, compute_gradient ? &enc_mean_cache : no_cache);
  const Eigen::ArrayXXd enc_raw = nets_[kEncoderVariance].Forward(
      enc_in, compute_gradient ? &enc_var_cache : no_cache);
  const Eigen::MatrixXd prior_mu = nets_[kPriorMean].Forward(
      prior_in, compute_gradient ? &prior_mean_cache : no_cache);
  const Eigen::ArrayXXd prior_raw = nets_[kPriorVariance].Forward(
      prior_in, compute_gradient ? &prior_var_cache : no_cache);

  const Eigen::ArrayXXd mq = (enc_mu.array().colwise() * scale).colwise() + shift;
  const Eigen::ArrayXXd vq = VarianceFromRaw(enc_raw).colwise() * scale2;
  const Eigen::ArrayXXd mp =
      (prior_mu.array().colwise() * scale).colwise() + shift;
  const Eigen::ArrayXXd vp = VarianceFromRaw(prior_raw).colwise() * scale2;
  const Eigen::ArrayXXd diff = mq - mp;
  const Eigen::ArrayXd kl_unit =
      (0.5 * ((vp / vq).log() + (vq + diff.square()) / vp - 1.0))
          .colwise()
          .sum()
          .transpose();

  // Reparameterized samples, sample-major columns.
  const Eigen::ArrayXXd sq = vq.sqrt();
  Eigen::MatrixXd z(L, n * mc_samples);
  std::vector<int> t_rep(static_cast<std::size_t>(n * mc_samples));
  for (int s = 0; s < mc_samples; ++s) {
    z.middleCols(s * n, n) =
        (mq + sq * noise.middleCols(s * n, n).array()).matrix();
    for (Eigen::Index i = 0; i < n; ++i) t_rep[s * n + i] = batch.t[i];
  }
  const Eigen::MatrixXd u = ToNet(z);
  DecoderPass dec = RunDecoder(nets_, config_, DecoderMeanIndex(0),
                               DecoderMeanIndex(1), DecoderVarianceIndex(0),
                               DecoderVarianceIndex(1), u, t_rep,
                               compute_gradient);
  Eigen::ArrayXXd y_rep(config_.y_dim, n * mc_samples);
  for (int s = 0; s < mc_samples; ++s) y_rep.middleCols(s * n, n) = batch.y.array();
  const Eigen::ArrayXXd resid = y_rep - dec.mean.array();
  const Eigen::ArrayXXd vy = dec.variance.array();
  const Eigen::ArrayXd log_lik =
      (-0.5 * ((2.0 * std::numbers::pi * vy).log() + resid.square() / vy))
          .colwise()
          .sum()
          .transpose();
  Eigen::ArrayXd recon_unit = Eigen::ArrayXd::Zero(n);
  for (int s = 0; s < mc_samples; ++s) recon_unit += log_lik.segment(s * n, n);
  recon_unit /= mc_samples;

  ElboResult result;
  result.per_unit = (recon_unit - kl_unit).matrix();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(result.per_unit[i])) {
      const int id = unit_ids.empty() ? static_cast<int>(i) : unit_ids[i];
      throw NumericError("non-finite ELBO term for unit " + std::to_string(id));
    }
  }
  result.terms.reconstruction = recon_unit.mean();
  result.terms.kl = kl_unit.mean();
  result.terms.elbo = result.terms.reconstruction - result.terms.kl;
  if (!compute_gradient) return result;

  // Reverse pass for d(mean ELBO).
  result.gradient = ZeroGradient();
  ModelGradient& grad = result.gradient;
  const double w_sample = 1.0 / (static_cast<double>(n) * mc_samples);
  const double w_unit = 1.0 / static_cast<double>(n);

  const Eigen::MatrixXd d_mean = (resid / vy * w_sample).matrix();
  const Eigen::ArrayXXd d_var =
      0.5 * (resid.square() / vy.square() - 1.0 / vy) * w_sample;
  Eigen::MatrixXd d_u = Eigen::MatrixXd::Zero(L, n * mc_samples);
  for (HeadPass& head : dec.heads) {
    const Mlp& mean_net = nets_[head.mean_net];
    Eigen::MatrixXd d_in = mean_net.Backward(
        head.mean_cache, GatherColumns(d_mean, head.columns),
        AsSpan(grad[head.mean_net]));
    if (head.variance_net >= 0) {
      const Eigen::MatrixXd d_raw =
          (GatherColumns(d_var.matrix(), head.columns).array() *
           VarianceFromRawGrad(head.raw_variance.array()))
              .matrix();
      d_in += nets_[head.variance_net].Backward(
          head.variance_cache, d_raw, AsSpan(grad[head.variance_net]));
    }
    ScatterColumns(d_in.topRows(L), head.columns, &d_u);
  }
  const Eigen::ArrayXXd d_z = d_u.array().colwise() / scale;

  Eigen::ArrayXXd d_mq = Eigen::ArrayXXd::Zero(L, n);
  Eigen::ArrayXXd d_vq = Eigen::ArrayXXd::Zero(L, n);
  for (int s = 0; s < mc_samples; ++s) {
    const auto dz = d_z.middleCols(s * n, n);
    d_mq += dz;
    d_vq += dz * noise.middleCols(s * n, n).array() / (2.0 * sq);
  }
  // -KL terms.
  d_mq -= diff / vp * w_unit;
  d_vq -= 0.5 * (1.0 / vp - 1.0 / vq) * w_unit;
  const Eigen::ArrayXXd d_mp = diff / vp * w_unit;
  const Eigen::ArrayXXd d_vp =
      -0.5 * (1.0 / vp - (vq + diff.square()) / vp.square()) * w_unit;

  nets_[kEncoderMean].Backward(enc_mean_cache,
                               (d_mq.colwise() * scale).matrix(),
                               AsSpan(grad[kEncoderMean]));
  nets_[kEncoderVariance].Backward(
      enc_var_cache,
      ((d_vq.colwise() * scale2) * VarianceFromRawGrad(enc_raw)).matrix(),
      AsSpan(grad[kEncoderVariance]));
  nets_[kPriorMean].Backward(prior_mean_cache,
                             (d_mp.colwise() * scale).matrix(),
                             AsSpan(grad[kPriorMean]));
  nets_[kPriorVariance].Backward(
      prior_var_cache,
      ((d_vp.colwise() * scale2) * VarianceFromRawGrad(prior_raw)).matrix(),
      AsSpan(grad[kPriorVariance]));
  return result;
}

IntactVae IntactVae::ApplyAffineEquivalence(const Eigen::VectorXd& scale,
                                            const Eigen::VectorXd& shift) const {
  if (scale.size() != config_.latent_dim || shift.size() != config_.latent_dim) {
    throw InvalidArgument("affine map must have latent_dim entries");
  }
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (scale[i] == 0.0 || !std::isfinite(scale[i]) ||
        !std::isfinite(shift[i])) {
      throw InvalidArgument("affine scale entries must be finite and nonzero");
    }
  }
  IntactVae out = *this;
  out.latent_scale_ = (scale.array() * latent_scale_.array()).matrix();
  out.latent_shift_ = (scale.array() * latent_shift_.array() + shift.array()).matrix();
  return out;
}

// Checkpoint layout (text):
//   ivae-checkpoint 1
//   x_dim <int> / y_dim / latent_dim / hidden <k> <sizes...> / activation
//   balanced_prior / separate_decoder_heads / learn_decoder_noise <0|1>
//   decoder_noise_variance <double> / seed <uint64>
//   latent_scale <values...> / latent_shift <values...>
//   nets <count>
//   <mlp records, in nets() order>
void IntactVae::Save(std::ostream& out) const {
  const VaeConfig& c = config_;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
      << "x_dim " << c.x_dim << '\n'
      << "y_dim " << c.y_dim << '\n'
      << "latent_dim " << c.latent_dim << '\n'
      << "hidden " << c.hidden.size();
  for (int h : c.hidden) out << ' ' << h;
  out << '\n'
      << "activation " << ActivationName(c.activation) << '\n'
      << "balanced_prior " << c.balanced_prior << '\n'
      << "separate_decoder_heads " << c.separate_decoder_heads << '\n'
      << "learn_decoder_noise " << c.learn_decoder_noise << '\n'
      << "decoder_noise_variance " << FormatDouble(c.decoder_noise_variance)
      << '\n'
      << "seed " << c.seed << '\n'
      << "latent_scale";
  for (double v : latent_scale_) out << ' ' << FormatDouble(v);
  out << "\nlatent_shift";
  for (double v : latent_shift_) out << ' ' << FormatDouble(v);
  out << "\nnets " << nets_.size() << '\n';
  for (const Mlp& net : nets_) net.Save(out);
}

IntactVae IntactVae::Load(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string token;
    if (!(in >> token) || token != key) {
      throw ParseError(std::string("checkpoint: expected '") + key + "'");
    }
  };
  auto read_double = [&]() {
    std::string token;
    if (!(in >> token)) throw ParseError("checkpoint: truncated");
    return ParseDouble(token);
  };
  auto read_int = [&]() {
    std::string token;
    if (!(in >> token)) throw ParseError("checkpoint: truncated");
    return static_cast<int>(ParseInt(token));
  };
  expect(kCheckpointMagic);
  if (read_int() != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version");
  }
  VaeConfig c;
  expect("x_dim");
  c.x_dim = read_int();
  expect("y_dim");
  c.y_dim = read_int();
  expect("latent_dim");
  c.latent_dim = read_int();
  expect("hidden");
  const int depth = read_int();
  if (depth < 0 || depth > 64) throw ParseError("checkpoint: bad hidden depth");
  c.hidden.resize(depth);
  for (int& h : c.hidden) h = read_int();
  expect("activation");
  std::string act;
  in >> act;
  c.activation = ParseActivation(act);
  expect("balanced_prior");
  c.balanced_prior = read_int() != 0;
  expect("separate_decoder_heads");
  c.separate_decoder_heads = read_int() != 0;
  expect("learn_decoder_noise");
  c.learn_decoder_noise = read_int() != 0;
  expect("decoder_noise_variance");
  c.decoder_noise_variance = read_double();
  expect("seed");
  if (!(in >> c.seed)) throw ParseError("checkpoint: bad seed");
  try {
    c.Validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }

  IntactVae model;
  model.config_ = c;
  model.BuildNets();  // establishes the expected shapes
  model.latent_scale_.resize(c.latent_dim);
  model.latent_shift_.resize(c.latent_dim);
  expect("latent_scale");
  for (double& v : model.latent_scale_) v = read_double();
  expect("latent_shift");
  for (double& v : model.latent_shift_) v = read_double();
  expect("nets");
  if (read_int() != static_cast<int>(model.nets_.size())) {
    throw ParseError("checkpoint: network count does not match configuration");
  }
  for (Mlp& net : model.nets_) {
    Mlp loaded = Mlp::Load(in);
    if (loaded.layer_sizes() != net.layer_sizes()) {
      throw ParseError("checkpoint: network shape does not match configuration");
    }
    net = std::move(loaded);
  }
  return model;
}

}  // namespace ivae
