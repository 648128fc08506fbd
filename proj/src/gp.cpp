#include "hte/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace hte {

GPModel::GPModel(std::size_t dim, GPParams params, PriorMean prior)
    : dim_(dim), params_(params), prior_(std::move(prior)) {
  if (dim == 0) throw std::invalid_argument("GPModel: zero input dimension");
  if (!(params.lengthscale > 0 && params.signal_var > 0 && params.noise_var > 0))
    throw std::invalid_argument("GPModel: hyperparameters must be positive");
}

double GPModel::kernel(std::span<const double> a, std::span<const double> b) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return params_.signal_var * std::exp(-0.5 * d2 / (params_.lengthscale * params_.lengthscale));
}

void GPModel::update(std::span<const double> x, double y) {
  if (x.size() != dim_) throw std::invalid_argument("GPModel: input dimension mismatch");
  if (!std::isfinite(y)) throw std::invalid_argument("GPModel: non-finite target");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("GPModel: non-finite input");
  inputs_.emplace_back(x.begin(), x.end());
  targets_.push_back(y);
  refit();
}

void GPModel::refit() {
  const auto n = static_cast<Eigen::Index>(targets_.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      K(i, j) = K(j, i) = kernel(inputs_[static_cast<std::size_t>(i)], inputs_[static_cast<std::size_t>(j)]);
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i)
    r(i) = targets_[static_cast<std::size_t>(i)] - prior_mean(inputs_[static_cast<std::size_t>(i)]);

  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += params_.noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      alpha_ = llt.solve(r);
      return;
    }
    jitter = jitter == 0.0 ? 1e-9 : jitter * 10.0;
  }
  throw std::runtime_error("GPModel: kernel matrix not positive definite after jitter");
}

GPPrediction GPModel::predict(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("GPModel: input dimension mismatch");
  const double m0 = prior_mean(x);
  if (targets_.empty()) return {m0, std::sqrt(params_.signal_var)};
  const auto n = static_cast<Eigen::Index>(targets_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(inputs_[static_cast<std::size_t>(i)], x);
  const double mean = m0 + k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double var = std::max(0.0, params_.signal_var - v.squaredNorm());
  return {mean, std::sqrt(var)};
}

double epsilon_score(std::span<const double> observed, std::span<const double> desired, double k, double c,
                     double floor) {
  if (observed.size() != desired.size()) throw std::invalid_argument("epsilon_score: dimension mismatch");
  double err2 = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const double d = observed[i] - desired[i];
    err2 += d * d;
    norm2 += desired[i] * desired[i];
  }
  const double denom = std::max(2.0 * std::sqrt(norm2) - c, floor);
  return std::exp(-k * std::sqrt(err2) / denom);
}

std::size_t ucb_select(const GPModel& model, std::span<const std::vector<double>> candidates, double beta, Rng& rng) {
  if (candidates.empty()) throw std::invalid_argument("ucb_select: no candidates");
  std::vector<std::size_t> best;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const GPPrediction p = model.predict(candidates[i]);
    const double v = p.mean + beta * p.std;
    if (v > best_v) {
      best_v = v;
      best.assign(1, i);
    } else if (v == best_v) {
      best.push_back(i);
    }
  }
  return best.size() == 1 ? best.front() : best[rng.index(best.size())];
}

}  // namespace hte
