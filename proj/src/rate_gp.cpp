#include "motionlab/rate_gp.hpp"

#include <cmath>

namespace motionlab {

RateGP::RateGP(std::vector<double> train_times, std::vector<double> train_rates,
               double amplitude_sq, double lengthscale, double noise_var)
    : times_(std::move(train_times)),
      amplitude_sq_(amplitude_sq),
      lengthscale_(lengthscale),
      noise_var_(noise_var) {
  if (times_.empty() || times_.size() != train_rates.size())
    throw DimensionMismatch("RateGP: times/rates size mismatch or empty");
  if (!(amplitude_sq_ > 0.0) || !(lengthscale_ > 0.0) || noise_var_ < 0.0)
    throw DataError("RateGP: hyperparameters out of range");

  const Eigen::Index n = static_cast<Eigen::Index>(times_.size());
  rates_ = Eigen::Map<const Eigen::VectorXd>(train_rates.data(), n);
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = kernel(times_[i], times_[j]);
  gram.diagonal().array() += noise_var_;

  // jitter escalation up to 1e-6 before declaring the Gram matrix singular
  for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
    Eigen::MatrixXd g = gram;
    g.diagonal().array() += jitter;
    llt_.compute(g);
    if (llt_.info() == Eigen::Success) {
      alpha_ = llt_.solve(rates_);
      return;
    }
  }
  throw SingularGram("RateGP: Gram matrix not positive definite after jitter escalation");
}

double RateGP::kernel(double a, double b) const {
  const double d = (a - b) / lengthscale_;
  return amplitude_sq_ * std::exp(-0.5 * d * d);
}

RateGP::Posterior RateGP::posterior(double t) const {
  const Eigen::Index n = static_cast<Eigen::Index>(times_.size());
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = kernel(times_[i], t);
  const double mean = q.dot(alpha_);
  const double var = kernel(t, t) - q.dot(llt_.solve(q));
  return {mean, std::max(var, 0.0)};
}

double RateGP::log_marginal_likelihood() const {
  const Eigen::Index n = rates_.size();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt_.matrixLLT()(i, i));
  return -0.5 * rates_.dot(alpha_) - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
}

RateBand rate_band(const RateGP& model, const std::vector<double>& grid, double k) {
  RateBand band;
  band.grid = grid;
  band.mean.reserve(grid.size());
  band.lower.reserve(grid.size());
  band.upper.reserve(grid.size());
  for (double t : grid) {
    const auto p = model.posterior(t);
    const double sd = std::sqrt(p.var);
    band.mean.push_back(p.mean);
    band.lower.push_back(p.mean - k * sd);
    band.upper.push_back(p.mean + k * sd);
  }
  return band;
}

GpGridSearchResult gp_grid_search(const std::vector<double>& times,
                                  const std::vector<double>& rates,
                                  const std::vector<double>& amplitude_sqs,
                                  const std::vector<double>& lengthscales,
                                  const std::vector<double>& noise_vars) {
  if (amplitude_sqs.empty() || lengthscales.empty() || noise_vars.empty())
    throw DataError("gp_grid_search: empty candidate grid");
  GpGridSearchResult best{0, 0, 0, -std::numeric_limits<double>::infinity()};
  for (double a : amplitude_sqs)
    for (double l : lengthscales)
      for (double s : noise_vars) {
        const RateGP gp(times, rates, a, l, s);
        const double lml = gp.log_marginal_likelihood();
        if (lml > best.log_marginal) best = {a, l, s, lml};
      }
  return best;
}

}  // namespace motionlab
