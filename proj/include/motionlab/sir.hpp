#pragma once

#include <vector>

#include "motionlab/motion.hpp"
#include "motionlab/stats.hpp"

namespace motionlab {

/// One observation for the inverse regression: a coordinate vector (posture
/// or concatenated sequence window) paired with its rate value.
struct CoordRatePair {
  Eigen::VectorXd coords;
  double rate;
};

struct SIRResult {
  std::vector<Eigen::VectorXd> directions;  // beta_b, normalized so |K_t beta_b| = 1
  std::vector<double> eigenvalues;          // descending, >= 0
  Eigen::MatrixXd mean_cov;                 // the K_t used for the final solve

  int count() const { return static_cast<int>(directions.size()); }
  /// Smallest B whose eigenvalues explain at least `fraction` of the trace.
  static int suggest_count(const std::vector<double>& eigenvalues, double fraction = 0.9);
};

/// Nadaraya-Watson average of coordinate vectors with kernel weights in rate.
Eigen::VectorXd conditional_expectation(const std::vector<CoordRatePair>& pairs, double r_star,
                                        double bandwidth, Kernel kernel = Kernel::Gaussian);

/// Inverse-regression directions: eigenvectors of the (uncentered) second
/// moment of the estimated conditional expectations, backed out through K_t.
/// ridge <= 0 selects the default 1e-6 * trace(K_t)/dim. `center` subtracts
/// the mean of the conditional expectations first (off by default; the model
/// assumes E[c] = 0).
SIRResult sir_directions(const std::vector<CoordRatePair>& pairs, int B, double bandwidth,
                         const Eigen::MatrixXd& K_t, double ridge = -1.0,
                         Kernel kernel = Kernel::Gaussian, bool center = false);

/// Concatenated tangent coordinates of a sequence window [l0, l1] against the
/// fitted per-step means.
Eigen::VectorXd sequence_coords(const PostureSequence& seq, int l0, int l1,
                                const MotionDistribution& model);

/// Least-norm coordinates consistent with the target projection features,
/// mapped back through the exponential map at the per-step means.
std::vector<Posture> reconstruct_from_features(const Eigen::VectorXd& features,
                                               const SIRResult& result,
                                               const std::vector<Posture>& means);

/// Projection features z_b = beta_b' c of a coordinate vector.
Eigen::VectorXd project_features(const Eigen::VectorXd& coords, const SIRResult& result);

}  // namespace motionlab
