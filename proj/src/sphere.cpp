#include "motionlab/sphere.hpp"

#include <algorithm>
#include <cmath>

namespace motionlab {

namespace {

// atan2 form: exact at coincident and antipodal points, well conditioned
// everywhere; the dot product is still clamped before use downstream.
double clamped_angle(const SpherePoint& y, const SpherePoint& z) {
  const double dot = std::clamp(y.vec().dot(z.vec()), -1.0, 1.0);
  return std::atan2(y.vec().cross(z.vec()).norm(), dot);
}

}  // namespace

double sphere_distance(const SpherePoint& y, const SpherePoint& z) {
  return clamped_angle(y, z);
}

SpherePoint sphere_geodesic(const SpherePoint& y, const SpherePoint& z, double t) {
  const double theta = clamped_angle(y, z);
  if (theta < kDegenerateTheta) return y;
  if (theta > M_PI - kAntipodalMargin)
    throw AntipodalError(-1, "sphere_geodesic: antipodal endpoints, geodesic not unique");
  const double s = std::sin(theta);
  const Vec3 g = (std::sin((1.0 - t) * theta) / s) * y.vec() + (std::sin(t * theta) / s) * z.vec();
  return SpherePoint(g);
}

TangentVector sphere_log(const SpherePoint& y, const SpherePoint& z) {
  const double theta = clamped_angle(y, z);
  if (theta < kDegenerateTheta) return {y, Vec3::Zero()};
  if (theta > M_PI - kAntipodalMargin)
    throw AntipodalError(-1, "sphere_log: antipodal points, log undefined");
  const double factor = theta / std::sin(theta);
  Vec3 v = factor * (z.vec() - std::cos(theta) * y.vec());
  // project out numerical drift along y
  v -= v.dot(y.vec()) * y.vec();
  return {y, v};
}

SpherePoint sphere_exp(const SpherePoint& y, const Vec3& f) {
  const double n = f.norm();
  if (n < kZeroTangent) return y;
  if (std::abs(y.vec().dot(f)) > 1e-6)
    throw NotTangentError("sphere_exp: vector not tangent at base point");
  return SpherePoint(std::cos(n) * y.vec() + (std::sin(n) / n) * f);
}

TangentVector sphere_transport(const SpherePoint& y, const SpherePoint& z, const Vec3& f) {
  const double theta = clamped_angle(y, z);
  if (theta > M_PI - kAntipodalMargin)
    throw AntipodalError(-1, "sphere_transport: antipodal points, transport undefined");
  const Vec3 w = y.vec() + z.vec();
  Vec3 out = f - (2.0 * f.dot(z.vec()) / w.squaredNorm()) * w;
  out -= out.dot(z.vec()) * z.vec();
  return {z, out};
}

TangentBasis tangent_basis(const SpherePoint& y) {
  int k = 0;
  double best = std::abs(y.vec()(0));
  for (int i = 1; i < 3; ++i) {
    const double a = std::abs(y.vec()(i));
    if (a < best) {
      best = a;
      k = i;
    }
  }
  Vec3 seed = Vec3::Zero();
  seed(k) = 1.0;
  Vec3 nu = seed - seed.dot(y.vec()) * y.vec();
  nu.normalize();
  const Vec3 omega = y.vec().cross(nu);
  return {y, nu, omega};
}

}  // namespace motionlab
