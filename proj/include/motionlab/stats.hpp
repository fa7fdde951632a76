#pragma once

#include <cstdint>
#include <vector>

#include "motionlab/posture.hpp"

namespace motionlab {

/// Gaussian on tangent coordinates at the mean, truncated to per-part norm
/// <= pi/2, pushed to the manifold through the exponential map. The
/// truncation constant is treated as parameter-free and dropped from all
/// likelihood expressions.
struct WrappedNormal {
  Posture mean;
  Eigen::MatrixXd cov;  // 2(n-1) x 2(n-1), symmetric PSD

  void validate() const;
};

struct MapHyper {
  double lambda0_sq = 1.0;   // autocorrelation variance of consecutive means
  Posture mu0;               // prior mean of the first step
  Eigen::MatrixXd K0;        // inverse-Wishart scale, positive definite
  double nu0 = 0.0;          // inverse-Wishart degrees of freedom

  static MapHyper defaults(const Posture& mu0, double k0_scale = 1e-3);
};

/// Per-time-step wrapped normals with the hyperparameters they were fit under.
struct MotionDistribution {
  std::vector<double> grid;
  std::vector<WrappedNormal> steps;
  MapHyper hyper;

  int length() const { return static_cast<int>(steps.size()); }
  int parts() const { return steps.empty() ? 0 : steps.front().mean.size(); }
};

/// Truncated-normal log density (up to the dropped constant): -inf outside
/// the support, else -(log|K| + c'K^-1 c)/2.
double log_density(const TangentCoords& c, const Eigen::MatrixXd& K);

/// Rejection sampler for the wrapped truncated normal; deterministic per seed.
Posture sample_wrapped(const Posture& mu, const Eigen::MatrixXd& K, std::uint64_t seed);

/// Iterative MLE of the wrapped-normal parameters: Karcher-style mean update
/// on tangent coordinates, then the sample scatter at the converged mean.
WrappedNormal fit_mle(const std::vector<Posture>& samples, int max_iter = 100, double tol = 1e-9,
                      FitReport* report = nullptr);

struct MapFitReport {
  bool converged = false;
  int sweeps = 0;
  double final_residual = 0.0;
  std::vector<double> objective_trace;  // negative log posterior after each sweep
};

/// MAP fit with temporally autocorrelated means: coordinate descent from the
/// per-step MLE initialization, one mean step and one closed-form covariance
/// update per step and sweep. data is indexed [sample m][time step l].
MotionDistribution fit_map(const std::vector<std::vector<Posture>>& data, const MapHyper& hyper,
                           int max_sweeps = 100, double tol = 1e-8,
                           MapFitReport* report = nullptr);

/// The objective minimized by fit_map (constants dropped); exposed for
/// monotonicity checks.
double negative_log_posterior(const std::vector<std::vector<Posture>>& data,
                              const std::vector<Posture>& means,
                              const std::vector<Eigen::MatrixXd>& covs, const MapHyper& hyper);

std::string model_to_json(const MotionDistribution& model);
MotionDistribution model_from_json(const std::string& text, const std::string& origin = "<memory>");
void save_model(const MotionDistribution& model, const std::string& path);
MotionDistribution load_model(const std::string& path);

}  // namespace motionlab
