#include "motionlab/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace motionlab {

double kernel_weight(Kernel k, double dist, double bandwidth) {
  if (bandwidth <= 0.0) throw DataError("kernel bandwidth must be positive");
  const double u = dist / bandwidth;
  switch (k) {
    case Kernel::Gaussian:
      return std::exp(-0.5 * u * u);
    case Kernel::Epanechnikov:
      return u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

void PostureSequence::validate() const {
  if (grid.size() < 2) throw SchemaError("posture sequence: need at least 2 samples");
  if (grid.size() != postures.size())
    throw SchemaError("posture sequence: grid/posture count mismatch");
  if (grid.front() != 0.0 || grid.back() != 1.0)
    throw SchemaError("posture sequence: grid must start at 0 and end at 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw SchemaError("posture sequence: grid must be strictly increasing");
  if (!(duration_U > 0.0)) throw SchemaError("posture sequence: duration must be positive");
  const int p = postures.front().size();
  if (p < 1) throw SchemaError("posture sequence: empty posture");
  for (const auto& y : postures)
    if (y.size() != p) throw SchemaError("posture sequence: inconsistent part counts");
}

bool PostureSequence::uniform_grid(double tol) const {
  const int L = length();
  for (int l = 0; l < L; ++l)
    if (std::abs(grid[l] - static_cast<double>(l) / (L - 1)) > tol) return false;
  return true;
}

std::vector<double> PostureSequence::uniform(int L) {
  if (L < 2) throw DataError("uniform grid needs L >= 2");
  std::vector<double> g(L);
  for (int l = 0; l < L; ++l) g[l] = static_cast<double>(l) / (L - 1);
  g.front() = 0.0;
  g.back() = 1.0;
  return g;
}

PostureSequence to_posture_sequence(const SkeletonSequence& seq, double eps_bone) {
  seq.hierarchy.validate();
  if (seq.frames.size() < 2) throw SchemaError("to_posture_sequence: need at least 2 frames");
  PostureSequence out;
  const double t0 = seq.frames.front().t;
  const double span = seq.frames.back().t - t0;
  if (!(span > 0.0)) throw SchemaError("to_posture_sequence: zero time span");
  out.duration_U = span;
  out.label = seq.label;
  out.grid.reserve(seq.frames.size());
  out.postures.reserve(seq.frames.size());
  for (const auto& f : seq.frames) {
    out.grid.push_back((f.t - t0) / span);
    out.postures.push_back(skeleton_to_posture(f, seq.hierarchy, eps_bone));
  }
  out.grid.front() = 0.0;
  out.grid.back() = 1.0;
  out.validate();
  return out;
}

void Warping::validate() const {
  if (grid.size() != values.size() || grid.size() < 2)
    throw SchemaError("warping: grid/value count mismatch");
  if (values.front() != 0.0 || values.back() != 1.0)
    throw SchemaError("warping: endpoints must be pinned at 0 and 1");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw SchemaError("warping: values must be strictly increasing");
}

double Warping::operator()(double t) const {
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double s = (t - grid[k]) / (grid[k + 1] - grid[k]);
  return values[k] + s * (values[k + 1] - values[k]);
}

Warping Warping::identity(int L) {
  Warping g;
  g.grid = PostureSequence::uniform(L);
  g.values = g.grid;
  return g;
}

Posture local_kernel_posture(const std::vector<std::pair<double, Posture>>& data, double u_star,
                             double bandwidth, Kernel kernel, int max_iter, double tol,
                             FitReport* report) {
  if (data.empty()) throw EmptyWindowError("local_kernel_posture: no data");
  std::vector<Posture> postures;
  std::vector<double> weights;
  postures.reserve(data.size());
  weights.reserve(data.size());
  double wmax = 0.0;
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < data.size(); ++s) {
    const double d = std::abs(data[s].first - u_star);
    if (d < best) {
      best = d;
      nearest = s;
    }
    const double w = kernel_weight(kernel, d, bandwidth);
    wmax = std::max(wmax, w);
    postures.push_back(data[s].second);
    weights.push_back(w);
  }
  if (wmax < 1e-300)
    throw EmptyWindowError("local_kernel_posture: all kernel weights vanish at u = " +
                           std::to_string(u_star));
  return weighted_karcher_mean(postures, weights, data[nearest].second, max_iter, tol, report);
}

PostureSequence resample_sequence(const PostureSequence& seq, int L, double bandwidth,
                                  Kernel kernel) {
  seq.validate();
  if (L < 2) throw DataError("resample_sequence: L must be >= 2");
  std::vector<std::pair<double, Posture>> data;
  data.reserve(seq.grid.size());
  for (std::size_t l = 0; l < seq.grid.size(); ++l) data.emplace_back(seq.grid[l], seq.postures[l]);

  PostureSequence out;
  out.grid = PostureSequence::uniform(L);
  out.duration_U = seq.duration_U;
  out.label = seq.label;
  out.postures.reserve(L);
  for (double t : out.grid) {
    try {
      out.postures.push_back(local_kernel_posture(data, t, bandwidth, kernel));
    } catch (const EmptyWindowError&) {
      throw EmptyWindowError("resample_sequence: empty kernel window at t = " + std::to_string(t));
    }
  }
  return out;
}

Posture karcher_mean(const std::vector<Posture>& postures, int max_iter, double tol,
                     FitReport* report) {
  if (postures.empty()) throw EmptyWindowError("karcher_mean: no postures");
  const std::vector<double> w(postures.size(), 1.0);
  return weighted_karcher_mean(postures, w, postures[postures.size() / 2], max_iter, tol, report);
}

TSRVF compute_tsrvf(const PostureSequence& seq, const Posture& reference) {
  seq.validate();
  if (!seq.uniform_grid())
    throw GridMismatch("compute_tsrvf: sequence must be on a uniform grid");
  const int L = seq.length();
  const int parts = seq.parts();
  if (reference.size() != parts)
    throw DimensionMismatch("compute_tsrvf: reference part count mismatch");
  const double dt = 1.0 / (L - 1);

  std::vector<TangentBasis> ref_basis;
  ref_basis.reserve(parts);
  for (int i = 0; i < parts; ++i) ref_basis.push_back(tangent_basis(reference.parts[i]));

  TSRVF out;
  out.reference = reference;
  out.grid = seq.grid;
  out.values.assign(L, Eigen::VectorXd::Zero(2 * parts));

  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd coords(2 * parts);
    double speed2 = 0.0;
    for (int i = 0; i < parts; ++i) {
      Vec3 v;
      try {
        if (l == 0) {
          v = sphere_log(seq.postures[0].parts[i], seq.postures[1].parts[i]).vec / dt;
        } else if (l == L - 1) {
          v = -sphere_log(seq.postures[L - 1].parts[i], seq.postures[L - 2].parts[i]).vec / dt;
        } else {
          v = (sphere_log(seq.postures[l].parts[i], seq.postures[l + 1].parts[i]).vec -
               sphere_log(seq.postures[l].parts[i], seq.postures[l - 1].parts[i]).vec) /
              (2.0 * dt);
        }
        speed2 += v.squaredNorm();
        const Vec3 moved = sphere_transport(seq.postures[l].parts[i], reference.parts[i], v).vec;
        coords(2 * i) = ref_basis[i].nu.dot(moved);
        coords(2 * i + 1) = ref_basis[i].omega.dot(moved);
      } catch (const AntipodalError& e) {
        throw AntipodalError(i, std::string(e.what()) + " at time index " + std::to_string(l) +
                                    ", part " + std::to_string(i));
      }
    }
    const double speed = std::sqrt(speed2);
    if (speed < 1e-10)
      out.values[l].setZero();
    else
      out.values[l] = coords / std::sqrt(speed);
  }
  return out;
}

namespace {

void check_common_frame(const TSRVF& a, const TSRVF& b) {
  if (a.length() != b.length()) throw GridMismatch("tsrvf: grid lengths differ");
  for (int l = 0; l < a.length(); ++l)
    if (std::abs(a.grid[l] - b.grid[l]) > 1e-12) throw GridMismatch("tsrvf: grids differ");
  if (a.reference.size() != b.reference.size())
    throw GridMismatch("tsrvf: reference postures differ");
  for (int i = 0; i < a.reference.size(); ++i)
    if (sphere_distance(a.reference.parts[i], b.reference.parts[i]) > 1e-9)
      throw GridMismatch("tsrvf: reference postures differ");
}

// linear interpolation of TSRVF values on its uniform grid
Eigen::VectorXd eval_tsrvf(const TSRVF& h, double t) {
  const int L = h.length();
  if (t <= 0.0) return h.values.front();
  if (t >= 1.0) return h.values.back();
  const double x = t * (L - 1);
  const int k = std::min(static_cast<int>(x), L - 2);
  const double s = x - k;
  return (1.0 - s) * h.values[k] + s * h.values[k + 1];
}

}  // namespace

double tsrvf_distance(const TSRVF& h1, const TSRVF& h2) {
  check_common_frame(h1, h2);
  const int L = h1.length();
  double acc = 0.0;
  for (int l = 0; l + 1 < L; ++l) {
    const double dt = h1.grid[l + 1] - h1.grid[l];
    acc += 0.5 * dt *
           ((h1.values[l] - h2.values[l]).norm() + (h1.values[l + 1] - h2.values[l + 1]).norm());
  }
  return acc;
}

Posture sequence_at(const PostureSequence& seq, double t) {
  const int L = seq.length();
  if (t <= seq.grid.front()) return seq.postures.front();
  if (t >= seq.grid.back()) return seq.postures.back();
  const auto it = std::upper_bound(seq.grid.begin(), seq.grid.end(), t);
  const int k = static_cast<int>(it - seq.grid.begin()) - 1;
  if (seq.grid[k] == t) return seq.postures[k];
  const double s = (t - seq.grid[k]) / (seq.grid[k + 1] - seq.grid[k]);
  Posture out;
  out.parts.reserve(seq.parts());
  for (int i = 0; i < seq.parts(); ++i)
    out.parts.push_back(sphere_geodesic(seq.postures[k].parts[i], seq.postures[k + 1].parts[i], s));
  (void)L;
  return out;
}

PostureSequence warp_sequence(const PostureSequence& seq, const Warping& gamma) {
  seq.validate();
  gamma.validate();
  PostureSequence out;
  out.grid = seq.grid;
  out.duration_U = seq.duration_U;
  out.label = seq.label;
  out.postures.reserve(seq.length());
  for (double t : seq.grid) out.postures.push_back(sequence_at(seq, gamma(t)));
  return out;
}

double dp_segment_cost(const TSRVF& moving, const TSRVF& ref, int dp_grid, int i0, int j0, int i1,
                       int j1) {
  const double inv = 1.0 / dp_grid;
  const double slope = static_cast<double>(j1 - j0) / (i1 - i0);
  const double sqrt_slope = std::sqrt(slope);
  // trapezoid per unit column; along the diagonal this reproduces the plain
  // TSRVF distance on the lattice grid
  double acc = 0.0;
  for (int k = i0; k < i1; ++k) {
    const double ga = (j0 + slope * (k - i0)) * inv;
    const double gb = (j0 + slope * (k + 1 - i0)) * inv;
    const double ea = (eval_tsrvf(moving, ga) * sqrt_slope - eval_tsrvf(ref, k * inv)).norm();
    const double eb = (eval_tsrvf(moving, gb) * sqrt_slope - eval_tsrvf(ref, (k + 1) * inv)).norm();
    acc += 0.5 * inv * (ea + eb);
  }
  return acc;
}

AlignmentResult align_sequences(const PostureSequence& moving, const PostureSequence& ref,
                                const Posture& reference_posture, int dp_grid) {
  if (dp_grid < 8) throw GridTooCoarse("align_sequences: dp_grid must be >= 8");
  const TSRVF h_mov = compute_tsrvf(moving, reference_posture);
  const TSRVF h_ref = compute_tsrvf(ref, reference_posture);

  static constexpr int kSteps[5][2] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};
  const int N = dp_grid;
  const int nodes = (N + 1) * (N + 1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(nodes, inf);
  std::vector<int> pred(nodes, -1);
  const auto id = [N](int i, int j) { return i * (N + 1) + j; };
  dist[id(0, 0)] = 0.0;

  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= N; ++j) {
      if (i == 0 && j == 0) continue;
      double best = inf;
      int from = -1;
      for (const auto& st : kSteps) {
        const int pi = i - st[0];
        const int pj = j - st[1];
        if (pi < 0 || pj < 0) continue;
        const double base = dist[id(pi, pj)];
        if (base == inf) continue;
        const double cand = base + dp_segment_cost(h_mov, h_ref, N, pi, pj, i, j);
        if (cand < best) {
          best = cand;
          from = id(pi, pj);
        }
      }
      dist[id(i, j)] = best;
      pred[id(i, j)] = from;
    }
  }

  if (dist[id(N, N)] == inf) throw NumericalError("align_sequences: no admissible path");

  // walk the predecessor chain, then sample the piecewise-linear path at
  // every lattice time
  std::vector<std::pair<int, int>> path;
  for (int v = id(N, N); v != -1; v = pred[v]) path.emplace_back(v / (N + 1), v % (N + 1));
  std::reverse(path.begin(), path.end());

  Warping gamma;
  gamma.grid = PostureSequence::uniform(N + 1);
  gamma.values.assign(N + 1, 0.0);
  for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const auto [i0, j0] = path[seg];
    const auto [i1, j1] = path[seg + 1];
    const double slope = static_cast<double>(j1 - j0) / (i1 - i0);
    for (int i = i0; i <= i1; ++i) gamma.values[i] = (j0 + slope * (i - i0)) / N;
  }
  gamma.values.front() = 0.0;
  gamma.values.back() = 1.0;
  gamma.validate();
  return {gamma, dist[id(N, N)]};
}

double motion_distance(const PostureSequence& a, const PostureSequence& b,
                       const Posture& reference_posture, int dp_grid) {
  return align_sequences(a, b, reference_posture, dp_grid).distance;
}

RateFunction rate_from_warping(const Warping& gamma, double u_moving, double u_ref) {
  gamma.validate();
  if (!(u_moving > 0.0) || !(u_ref > 0.0))
    throw DataError("rate_from_warping: durations must be positive");
  const double ratio = u_moving / u_ref;
  const int L = static_cast<int>(gamma.grid.size());
  std::vector<double> delta(L);
  for (int l = 0; l < L; ++l) delta[l] = ratio * gamma.values[l];

  RateFunction r;
  r.grid = gamma.grid;
  r.values.resize(L);
  for (int l = 0; l < L; ++l) {
    double d;
    if (l == 0)
      d = (delta[1] - delta[0]) / (gamma.grid[1] - gamma.grid[0]);
    else if (l == L - 1)
      d = (delta[L - 1] - delta[L - 2]) / (gamma.grid[L - 1] - gamma.grid[L - 2]);
    else
      d = (delta[l + 1] - delta[l - 1]) / (gamma.grid[l + 1] - gamma.grid[l - 1]);
    r.values[l] = std::log(std::max(d, 1e-8));
  }
  return r;
}

double cumulative_rate(const RateFunction& r, double s, double t) {
  if (!(s >= 0.0 && s < t && t <= 1.0))
    throw BadInterval("cumulative_rate: need 0 <= s < t <= 1");
  if (r.grid.size() < 2 || r.grid.size() != r.values.size())
    throw SchemaError("cumulative_rate: malformed rate function");

  const auto rate_at = [&](double u) {
    if (u <= r.grid.front()) return r.values.front();
    if (u >= r.grid.back()) return r.values.back();
    const auto it = std::upper_bound(r.grid.begin(), r.grid.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - r.grid.begin()) - 1;
    const double a = (u - r.grid[k]) / (r.grid[k + 1] - r.grid[k]);
    return r.values[k] + a * (r.values[k + 1] - r.values[k]);
  };

  // trapezoid over the grid points inside [s, t] plus interpolated endpoints
  double acc = 0.0;
  double u_prev = s;
  double f_prev = std::exp(rate_at(s));
  for (std::size_t k = 0; k < r.grid.size(); ++k) {
    const double u = r.grid[k];
    if (u <= s) continue;
    if (u >= t) break;
    const double f = std::exp(r.values[k]);
    acc += 0.5 * (u - u_prev) * (f_prev + f);
    u_prev = u;
    f_prev = f;
  }
  const double f_end = std::exp(rate_at(t));
  acc += 0.5 * (t - u_prev) * (f_prev + f_end);
  return std::log(acc);
}

}  // namespace motionlab
