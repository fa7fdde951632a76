#pragma once

#include <vector>

#include "motionlab/sphere.hpp"

namespace motionlab {

/// Ordered unit bone directions; the location/scale/ratio-free body state.
struct Posture {
  std::vector<SpherePoint> parts;

  Posture() = default;
  explicit Posture(std::vector<SpherePoint> p) : parts(std::move(p)) {}

  int size() const { return static_cast<int>(parts.size()); }
  int coord_dim() const { return 2 * size(); }
};

/// Element-wise tangent field at a base posture.
struct PostureTangent {
  Posture base;
  std::vector<Vec3> vecs;
};

/// 2(n-1)-dim coordinates of a posture in the canonical bases at `base`.
/// Per-part 2-norm equals the geodesic distance of that part to the base.
/// The wrapped-normal support bound is per-part norm <= pi/2; coordinates
/// from distant postures may exceed it (see within_support).
struct TangentCoords {
  Posture base;
  Eigen::VectorXd coords;
};

/// Summed per-part geodesic distance.
double posture_distance(const Posture& a, const Posture& b);

PostureTangent posture_log(const Posture& base, const Posture& target);
Posture posture_exp(const Posture& base, const std::vector<Vec3>& field);
inline Posture posture_exp(const PostureTangent& f) { return posture_exp(f.base, f.vecs); }
PostureTangent posture_transport(const Posture& from, const Posture& to,
                                 const std::vector<Vec3>& field);

/// coords_i = (theta_i / sin theta_i) * W_i^T y_i with W_i = [nu_i omega_i];
/// the factor is 1 in the theta -> 0 limit.
TangentCoords posture_coords(const Posture& base, const Posture& target);

/// Inverse of posture_coords: map basis coordinates back through the
/// exponential map at the base posture.
Posture posture_exp_coords(const Posture& base, const Eigen::VectorXd& coords);

/// True when every per-part 2-subvector norm is <= pi/2 (+slack); the
/// support of the truncated tangent density.
bool within_support(const Eigen::VectorXd& coords, double slack = 0.0);

/// Weighted Karcher mean: iterated log/exp averaging started at `init`.
/// Reports residual/iterations through `report` when given; the best
/// iterate is returned even without convergence.
Posture weighted_karcher_mean(const std::vector<Posture>& postures,
                              const std::vector<double>& weights, const Posture& init,
                              int max_iter = 100, double tol = 1e-10,
                              FitReport* report = nullptr);

}  // namespace motionlab
