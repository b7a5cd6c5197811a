#include "estimate/estimators.h"

#include <cmath>
#include <string>

#include "common/errors.h"

namespace ivae {
namespace {

void CheckAligned(const OutcomePredictions& p, const CausalDataset& data,
                  std::span<const int> indices) {
  if (p.y0.size() != static_cast<Eigen::Index>(indices.size()) ||
      p.y1.size() != p.y0.size()) {
    throw InvalidArgument("predictions are not aligned with the index set");
  }
  if (data.y0.size() != data.size() || data.y1.size() != data.size()) {
    throw InvalidArgument("dataset lacks potential-outcome ground truth");
  }
  if (indices.empty()) throw InvalidArgument("empty evaluation index set");
  for (int i : indices) {
    if (i < 0 || i >= data.size()) throw InvalidArgument("index out of range");
  }
}

void CheckDraws(const PredictOptions& options) {
  if (options.mc_draws < 1) throw InvalidArgument("mc_draws must be >= 1");
}

Eigen::MatrixXd AverageDecoderMean(const IntactVae& model,
                                   const GaussianBatch& latent,
                                   const Eigen::MatrixXd& noise, int draws,
                                   int arm) {
  const Eigen::Index n = latent.mean.cols();
  const std::vector<int> t(static_cast<std::size_t>(n), arm);
  const Eigen::ArrayXXd sd = latent.variance.array().sqrt();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(model.config().y_dim, n);
  for (int s = 0; s < draws; ++s) {
    const Eigen::MatrixXd z =
        (latent.mean.array() + sd * noise.middleCols(s * n, n).array()).matrix();
    sum += model.DecodeBatch(z, t).mean;
  }
  return sum / draws;
}

}  // namespace

Eigen::MatrixXd AntitheticNoise(int latent_dim, int n, int draws, Rng& rng) {
  Eigen::MatrixXd noise(latent_dim, static_cast<Eigen::Index>(draws) * n);
  for (int s = 0; s < draws; ++s) {
    if (s % 2 == 1) {
      noise.middleCols(s * n, n) = -noise.middleCols((s - 1) * n, n);
      continue;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (int d = 0; d < latent_dim; ++d) {
        noise(d, s * n + j) = StandardNormal(rng);
      }
    }
  }
  return noise;
}

OutcomePredictions PredictOutcomesPost(const IntactVae& model,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& y,
                                       std::span<const int> t_factual,
                                       const PredictOptions& options) {
  CheckDraws(options);
  const Eigen::Index n = x.rows();
  if (y.size() != n) throw InvalidArgument("y length does not match x rows");
  const GaussianBatch posterior =
      model.EncodeBatch(x.transpose(), y.transpose(), t_factual);
  Rng rng(options.seed);
  const Eigen::MatrixXd noise =
      AntitheticNoise(model.latent_dim(), static_cast<int>(n), options.mc_draws, rng);
  OutcomePredictions out;
  out.y0 = AverageDecoderMean(model, posterior, noise, options.mc_draws, 0).row(0).transpose();
  out.y1 = AverageDecoderMean(model, posterior, noise, options.mc_draws, 1).row(0).transpose();
  return out;
}

OutcomePredictions PredictOutcomesPre(const IntactVae& model,
                                      const Eigen::MatrixXd& x,
                                      const PredictOptions& options) {
  CheckDraws(options);
  const Eigen::Index n = x.rows();
  Rng rng(options.seed);
  const Eigen::MatrixXd noise =
      AntitheticNoise(model.latent_dim(), static_cast<int>(n), options.mc_draws, rng);
  const Eigen::MatrixXd xt = x.transpose();
  OutcomePredictions out;
  if (model.config().balanced_prior) {
    const GaussianBatch prior = model.PriorBatch(xt, {});
    out.y0 = AverageDecoderMean(model, prior, noise, options.mc_draws, 0).row(0).transpose();
    out.y1 = AverageDecoderMean(model, prior, noise, options.mc_draws, 1).row(0).transpose();
    return out;
  }
  for (int arm = 0; arm < 2; ++arm) {
    const std::vector<int> t(static_cast<std::size_t>(n), arm);
    const GaussianBatch prior = model.PriorBatch(xt, t);
    Eigen::VectorXd mean =
        AverageDecoderMean(model, prior, noise, options.mc_draws, arm).row(0).transpose();
    (arm == 0 ? out.y0 : out.y1) = std::move(mean);
  }
  return out;
}

double AteError(const OutcomePredictions& predictions,
                const CausalDataset& data, std::span<const int> indices) {
  CheckAligned(predictions, data, indices);
  // Summing per-unit differences makes exact predictions give exactly 0.
  const Eigen::VectorXd cate = predictions.Cate();
  double sum = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int i = indices[k];
    sum += (data.y1[i] - data.y0[i]) - cate[static_cast<Eigen::Index>(k)];
  }
  return std::abs(sum / static_cast<double>(indices.size()));
}

double RootPehe(const OutcomePredictions& predictions,
                const CausalDataset& data, std::span<const int> indices) {
  CheckAligned(predictions, data, indices);
  const Eigen::VectorXd cate = predictions.Cate();
  double sum = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int i = indices[k];
    const double err = (data.y1[i] - data.y0[i]) - cate[static_cast<Eigen::Index>(k)];
    sum += err * err;
  }
  return std::sqrt(sum / static_cast<double>(indices.size()));
}

std::array<AffineFit, 2> AffineRecoveryFit(std::span<const double> recovered,
                                           std::span<const double> truth,
                                           std::span<const int> t) {
  if (recovered.size() != truth.size() || truth.size() != t.size()) {
    throw InvalidArgument("affine fit: inputs have different lengths");
  }
  std::array<AffineFit, 2> fits;
  for (int arm = 0; arm < 2; ++arm) {
    double n = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] != arm) continue;
      n += 1;
      sx += truth[i];
      sy += recovered[i];
    }
    if (n < 2) {
      throw InvalidArgument("affine fit: treatment group " + std::to_string(arm) +
                            " has fewer than two units");
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] != arm) continue;
      const double dx = truth[i] - mx, dy = recovered[i] - my;
      sxx += dx * dx;
      sxy += dx * dy;
      syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
      throw InvalidArgument("affine fit: true latent is constant in group " +
                            std::to_string(arm) + "; fit undefined");
    }
    AffineFit& fit = fits[arm];
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  }
  return fits;
}

Eigen::MatrixXd SelectRows(const Eigen::MatrixXd& m,
                           std::span<const int> indices) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), m.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) out.row(k) = m.row(indices[k]);
  return out;
}

Eigen::VectorXd SelectEntries(const Eigen::VectorXd& v,
                              std::span<const int> indices) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) out[k] = v[indices[k]];
  return out;
}

std::vector<int> SelectEntries(const std::vector<int>& v,
                               std::span<const int> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(v[i]);
  return out;
}

}  // namespace ivae
