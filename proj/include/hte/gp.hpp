#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hte/rng.hpp"

namespace hte {

struct GPParams {
  double lengthscale = 0.3;
  double signal_var = 1.0;
  double noise_var = 1e-2;
};

struct GPPrediction {
  double mean = 0.0;
  double std = 0.0;
};

/// Exact Gaussian-process regression with a squared-exponential kernel and a
/// user-supplied prior mean. The Cholesky factor is refreshed on every update,
/// so predictions are const and safe for concurrent readers.
class GPModel {
 public:
  using PriorMean = std::function<double(std::span<const double>)>;

  explicit GPModel(std::size_t dim, GPParams params = {}, PriorMean prior = {});

  /// Appends an observation and refits. Throws on non-finite values or a dimension mismatch.
  void update(std::span<const double> x, double y);
  GPPrediction predict(std::span<const double> x) const;

  std::size_t size() const { return targets_.size(); }
  std::size_t dim() const { return dim_; }
  const GPParams& params() const { return params_; }
  double prior_mean(std::span<const double> x) const { return prior_ ? prior_(x) : 0.0; }

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;
  void refit();

  std::size_t dim_;
  GPParams params_;
  PriorMean prior_;
  std::vector<std::vector<double>> inputs_;
  std::vector<double> targets_;
  Eigen::MatrixXd chol_;  // lower-triangular factor of K + noise I
  Eigen::VectorXd alpha_;
};

/// Reproduction score of an executed skill: exp(-k |obs - des| / max(2|des| - c, floor)).
/// Equals 1 at perfect reproduction.
double epsilon_score(std::span<const double> observed, std::span<const double> desired, double k = 4.0,
                     double c = 0.5, double floor = 0.1);

/// Index of the candidate maximising mean + beta * std; exact ties are broken uniformly with `rng`.
std::size_t ucb_select(const GPModel& model, std::span<const std::vector<double>> candidates, double beta, Rng& rng);

}  // namespace hte
