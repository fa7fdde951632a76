#include "motionlab/posture.hpp"

#include <cmath>
#include <string>

namespace motionlab {

namespace {

void check_same_size(const Posture& a, const Posture& b, const char* where) {
  if (a.size() != b.size())
    throw DimensionMismatch(std::string(where) + ": part counts differ (" +
                            std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

[[noreturn]] void rethrow_with_part(const AntipodalError& e, int part) {
  throw AntipodalError(part, std::string(e.what()) + " at part " + std::to_string(part));
}

}  // namespace

double posture_distance(const Posture& a, const Posture& b) {
  check_same_size(a, b, "posture_distance");
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i) d += sphere_distance(a.parts[i], b.parts[i]);
  return d;
}

PostureTangent posture_log(const Posture& base, const Posture& target) {
  check_same_size(base, target, "posture_log");
  PostureTangent out;
  out.base = base;
  out.vecs.reserve(base.size());
  for (int i = 0; i < base.size(); ++i) {
    try {
      out.vecs.push_back(sphere_log(base.parts[i], target.parts[i]).vec);
    } catch (const AntipodalError& e) {
      rethrow_with_part(e, i);
    }
  }
  return out;
}

Posture posture_exp(const Posture& base, const std::vector<Vec3>& field) {
  if (static_cast<int>(field.size()) != base.size())
    throw DimensionMismatch("posture_exp: field size does not match part count");
  Posture out;
  out.parts.reserve(base.size());
  for (int i = 0; i < base.size(); ++i) out.parts.push_back(sphere_exp(base.parts[i], field[i]));
  return out;
}

PostureTangent posture_transport(const Posture& from, const Posture& to,
                                 const std::vector<Vec3>& field) {
  check_same_size(from, to, "posture_transport");
  if (static_cast<int>(field.size()) != from.size())
    throw DimensionMismatch("posture_transport: field size does not match part count");
  PostureTangent out;
  out.base = to;
  out.vecs.reserve(from.size());
  for (int i = 0; i < from.size(); ++i) {
    try {
      out.vecs.push_back(sphere_transport(from.parts[i], to.parts[i], field[i]).vec);
    } catch (const AntipodalError& e) {
      rethrow_with_part(e, i);
    }
  }
  return out;
}

TangentCoords posture_coords(const Posture& base, const Posture& target) {
  check_same_size(base, target, "posture_coords");
  TangentCoords out;
  out.base = base;
  out.coords.resize(2 * base.size());
  for (int i = 0; i < base.size(); ++i) {
    const double theta = sphere_distance(base.parts[i], target.parts[i]);
    if (theta > M_PI - kAntipodalMargin)
      throw AntipodalError(i, "posture_coords: antipodal pair at part " + std::to_string(i));
    if (theta < kDegenerateTheta) {
      out.coords(2 * i) = 0.0;
      out.coords(2 * i + 1) = 0.0;
      continue;
    }
    const double factor = theta / std::sin(theta);
    const TangentBasis w = tangent_basis(base.parts[i]);
    out.coords(2 * i) = factor * w.nu.dot(target.parts[i].vec());
    out.coords(2 * i + 1) = factor * w.omega.dot(target.parts[i].vec());
  }
  return out;
}

Posture posture_exp_coords(const Posture& base, const Eigen::VectorXd& coords) {
  if (coords.size() != 2 * base.size())
    throw DimensionMismatch("posture_exp_coords: expected " + std::to_string(2 * base.size()) +
                            " coordinates, got " + std::to_string(coords.size()));
  Posture out;
  out.parts.reserve(base.size());
  for (int i = 0; i < base.size(); ++i) {
    const TangentBasis w = tangent_basis(base.parts[i]);
    const Vec3 f = coords(2 * i) * w.nu + coords(2 * i + 1) * w.omega;
    out.parts.push_back(sphere_exp(base.parts[i], f));
  }
  return out;
}

bool within_support(const Eigen::VectorXd& coords, double slack) {
  for (Eigen::Index i = 0; i + 1 < coords.size(); i += 2) {
    const double n = std::hypot(coords(i), coords(i + 1));
    if (n > M_PI / 2.0 + slack) return false;
  }
  return true;
}

Posture weighted_karcher_mean(const std::vector<Posture>& postures,
                              const std::vector<double>& weights, const Posture& init,
                              int max_iter, double tol, FitReport* report) {
  if (postures.empty()) throw EmptyWindowError("weighted_karcher_mean: no postures");
  if (weights.size() != postures.size())
    throw DimensionMismatch("weighted_karcher_mean: weight count does not match postures");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (wsum < 1e-300) throw EmptyWindowError("weighted_karcher_mean: all weights vanish");

  Posture est = init;
  const int parts = est.size();
  FitReport rep;
  rep.converged = false;
  std::vector<Vec3> mean_field(parts);
  for (int j = 0; j < max_iter; ++j) {
    for (auto& v : mean_field) v.setZero();
    for (std::size_t s = 0; s < postures.size(); ++s) {
      if (weights[s] == 0.0) continue;
      const PostureTangent f = posture_log(est, postures[s]);
      for (int i = 0; i < parts; ++i) mean_field[i] += weights[s] * f.vecs[i];
    }
    double norm2 = 0.0;
    for (int i = 0; i < parts; ++i) {
      mean_field[i] /= wsum;
      norm2 += mean_field[i].squaredNorm();
    }
    rep.residual = std::sqrt(norm2);
    rep.iterations = j + 1;
    if (rep.residual < tol) {
      rep.converged = true;
      break;
    }
    est = posture_exp(est, mean_field);
  }
  if (report) *report = rep;
  return est;
}

}  // namespace motionlab
