#pragma once

#include <Eigen/Dense>

#include "motionlab/errors.hpp"

namespace motionlab {

using Vec3 = Eigen::Vector3d;

inline constexpr double kAntipodalMargin = 1e-6;   // theta > pi - margin is an error
inline constexpr double kDegenerateTheta = 1e-9;   // below this, points coincide
inline constexpr double kZeroTangent = 1e-12;      // below this, exp is the identity

/// A point on the unit 2-sphere; renormalized on construction.
class SpherePoint {
 public:
  SpherePoint() : v_(Vec3::UnitZ()) {}
  explicit SpherePoint(const Vec3& v) {
    const double n = v.norm();
    if (n < 1e-12) throw DataError("SpherePoint: zero vector");
    v_ = v / n;
  }
  SpherePoint(double x, double y, double z) : SpherePoint(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  bool operator==(const SpherePoint& o) const { return v_ == o.v_; }

 private:
  Vec3 v_;
};

/// Tangent vector anchored at a base point.
struct TangentVector {
  SpherePoint base;
  Vec3 vec = Vec3::Zero();
};

/// Deterministic orthonormal basis {nu, omega} of the tangent plane at base.
struct TangentBasis {
  SpherePoint base;
  Vec3 nu = Vec3::UnitX();
  Vec3 omega = Vec3::UnitY();
};

/// Geodesic (great-circle) distance, in [0, pi].
double sphere_distance(const SpherePoint& y, const SpherePoint& z);

/// Point at parameter t on the geodesic from y (t=0) to z (t=1).
SpherePoint sphere_geodesic(const SpherePoint& y, const SpherePoint& z, double t);

/// Inverse exponential map: tangent vector at y pointing to z with |v| = d(y,z).
TangentVector sphere_log(const SpherePoint& y, const SpherePoint& z);

/// Exponential map at y.
SpherePoint sphere_exp(const SpherePoint& y, const Vec3& f);
inline SpherePoint sphere_exp(const TangentVector& f) { return sphere_exp(f.base, f.vec); }

/// Parallel transport of f from T_y to T_z along the connecting geodesic.
TangentVector sphere_transport(const SpherePoint& y, const SpherePoint& z, const Vec3& f);

/// Canonical basis: seed with the coordinate axis least aligned with y
/// (lowest index on ties), Gram-Schmidt it, omega = y x nu.
TangentBasis tangent_basis(const SpherePoint& y);

}  // namespace motionlab
