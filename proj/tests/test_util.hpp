#pragma once

// shared generators for unit tests and the acceptance suite

#include <cmath>
#include <functional>
#include <vector>

#include "motionlab/motion.hpp"
#include "motionlab/rng.hpp"

namespace motionlab::testutil {

inline SpherePoint random_sphere_point(Rng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  while (v.norm() < 1e-6) v = Vec3(rng.normal(), rng.normal(), rng.normal());
  return SpherePoint(v);
}

inline Posture random_posture(Rng& rng, int parts) {
  Posture p;
  p.parts.reserve(parts);
  for (int i = 0; i < parts; ++i) p.parts.push_back(random_sphere_point(rng));
  return p;
}

inline Vec3 random_tangent(Rng& rng, const SpherePoint& y, double scale = 1.0) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  v -= v.dot(y.vec()) * y.vec();
  while (v.norm() < 1e-6) {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
    v -= v.dot(y.vec()) * y.vec();
  }
  return scale * v;
}

// Smooth band-limited path in one tangent space: c(t) has three sine modes
// per coordinate, so the sequence stays well inside the injectivity radius
// for small amplitudes.
struct SmoothPath {
  Posture base;
  Eigen::MatrixXd amp;    // coords x modes
  Eigen::MatrixXd phase;  // coords x modes

  Posture at(double t) const {
    Eigen::VectorXd c(base.coord_dim());
    for (int d = 0; d < c.size(); ++d) {
      double v = 0.0;
      for (int k = 0; k < amp.cols(); ++k)
        v += amp(d, k) * std::sin((k + 1) * M_PI * t + phase(d, k));
      c(d) = v;
    }
    return posture_exp_coords(base, c);
  }
};

inline SmoothPath random_smooth_path(Rng& rng, int parts, double amplitude = 0.4) {
  SmoothPath path;
  path.base = random_posture(rng, parts);
  const int dim = 2 * parts;
  path.amp.resize(dim, 3);
  path.phase.resize(dim, 3);
  for (int d = 0; d < dim; ++d)
    for (int k = 0; k < 3; ++k) {
      path.amp(d, k) = amplitude * rng.uniform(-1.0, 1.0) / (k + 1);
      path.phase(d, k) = rng.uniform(0.0, 2.0 * M_PI);
    }
  return path;
}

inline PostureSequence sample_path(const std::function<Posture(double)>& path, int L,
                                   double duration = 1.0) {
  PostureSequence seq;
  seq.grid = PostureSequence::uniform(L);
  seq.duration_U = duration;
  seq.postures.reserve(L);
  for (double t : seq.grid) seq.postures.push_back(path(t));
  return seq;
}

inline PostureSequence random_smooth_sequence(Rng& rng, int parts, int L, double amplitude = 0.4,
                                              double duration = 1.0) {
  const SmoothPath p = random_smooth_path(rng, parts, amplitude);
  return sample_path([&](double t) { return p.at(t); }, L, duration);
}

// gamma(t) = t + sum a_k sin(k pi t)/(k pi), derivative kept away from zero
struct SmoothWarp {
  std::array<double, 3> a{};

  double operator()(double t) const {
    double g = t;
    for (int k = 0; k < 3; ++k) g += a[k] * std::sin((k + 1) * M_PI * t) / ((k + 1) * M_PI);
    return g;
  }
  double deriv(double t) const {
    double d = 1.0;
    for (int k = 0; k < 3; ++k) d += a[k] * std::cos((k + 1) * M_PI * t);
    return d;
  }
};

inline SmoothWarp random_smooth_warp(Rng& rng, double strength = 0.3) {
  SmoothWarp w;
  double sum = 0.0;
  for (auto& v : w.a) {
    v = strength * rng.uniform(-1.0, 1.0);
    sum += std::abs(v);
  }
  if (sum > 0.8)
    for (auto& v : w.a) v *= 0.8 / sum;
  return w;
}

inline Warping warp_on_grid(const std::function<double(double)>& gamma, int L) {
  Warping w;
  w.grid = PostureSequence::uniform(L);
  w.values.reserve(L);
  for (double t : w.grid) w.values.push_back(gamma(t));
  w.values.front() = 0.0;
  w.values.back() = 1.0;
  return w;
}

// Warp with derivative dipping below 1 inside [center - width, center + width]
// and above 1 elsewhere; numeric cumulative construction on a dense grid.
struct DipWarp {
  std::vector<double> grid;
  std::vector<double> values;

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double x = t * (grid.size() - 1);
    const std::size_t k = std::min(static_cast<std::size_t>(x), grid.size() - 2);
    const double s = x - k;
    return values[k] + s * (values[k + 1] - values[k]);
  }

  DipWarp inverse() const {
    DipWarp inv;
    inv.grid = grid;
    inv.values.resize(values.size());
    // values are strictly increasing from 0 to 1; invert by interpolation
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double y = grid[i];
      const auto it = std::lower_bound(values.begin(), values.end(), y);
      std::size_t k = it == values.begin() ? 0 : (it - values.begin()) - 1;
      k = std::min(k, values.size() - 2);
      const double s = (y - values[k]) / (values[k + 1] - values[k]);
      inv.values[i] = grid[k] + s * (grid[k + 1] - grid[k]);
    }
    inv.values.front() = 0.0;
    inv.values.back() = 1.0;
    return inv;
  }
};

inline DipWarp make_dip_warp(double center, double width, double depth, int dense = 2001) {
  DipWarp w;
  w.grid.resize(dense);
  w.values.resize(dense);
  std::vector<double> speed(dense);
  for (int i = 0; i < dense; ++i) {
    const double t = static_cast<double>(i) / (dense - 1);
    w.grid[i] = t;
    const double z = (t - center) / width;
    speed[i] = 1.0 - depth * std::exp(-0.5 * z * z);
  }
  w.values[0] = 0.0;
  for (int i = 1; i < dense; ++i)
    w.values[i] = w.values[i - 1] + 0.5 * (speed[i - 1] + speed[i]) / (dense - 1);
  const double total = w.values.back();
  for (auto& v : w.values) v /= total;
  w.values.front() = 0.0;
  w.values.back() = 1.0;
  return w;
}

}  // namespace motionlab::testutil
