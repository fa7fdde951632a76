#pragma once

#include <vector>

#include <Eigen/Dense>

#include "motionlab/errors.hpp"

namespace motionlab {

/// Zero-mean Gaussian process over rate functions with a squared-exponential
/// covariance. The Gram matrix is factored once at construction; posterior
/// queries are read-only.
class RateGP {
 public:
  RateGP(std::vector<double> train_times, std::vector<double> train_rates, double amplitude_sq,
         double lengthscale, double noise_var);

  struct Posterior {
    double mean;
    double var;  // clamped at >= 0
  };

  Posterior posterior(double t) const;

  double prior_var(double /*t*/) const { return amplitude_sq_; }
  double log_marginal_likelihood() const;

  double amplitude_sq() const { return amplitude_sq_; }
  double lengthscale() const { return lengthscale_; }
  double noise_var() const { return noise_var_; }

 private:
  double kernel(double a, double b) const;

  std::vector<double> times_;
  double amplitude_sq_;
  double lengthscale_;
  double noise_var_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;  // (Q + sigma^2 I)^-1 r
  Eigen::VectorXd rates_;
};

struct RateBand {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Posterior mean and mean +/- k standard deviations on a grid; k = 1.5 is
/// the reporting default.
RateBand rate_band(const RateGP& model, const std::vector<double>& grid, double k = 1.5);

struct GpGridSearchResult {
  double amplitude_sq;
  double lengthscale;
  double noise_var;
  double log_marginal;
};

/// Exhaustive log-marginal-likelihood search over candidate hyperparameters.
GpGridSearchResult gp_grid_search(const std::vector<double>& times,
                                  const std::vector<double>& rates,
                                  const std::vector<double>& amplitude_sqs,
                                  const std::vector<double>& lengthscales,
                                  const std::vector<double>& noise_vars);

}  // namespace motionlab
