#pragma once

#include <functional>
#include <vector>

#include "motionlab/posture.hpp"
#include "motionlab/skeleton.hpp"

namespace motionlab {

/// Smoothing kernel on |u - u*|.
enum class Kernel { Gaussian, Epanechnikov };

double kernel_weight(Kernel k, double dist, double bandwidth);

/// Postures sampled on a normalized time grid in [0, 1], plus the physical
/// duration of the recording.
struct PostureSequence {
  std::vector<double> grid;      // strictly increasing, grid.front()=0, grid.back()=1
  std::vector<Posture> postures;
  double duration_U = 1.0;       // seconds
  std::optional<std::string> label;

  int length() const { return static_cast<int>(grid.size()); }
  int parts() const { return postures.empty() ? 0 : postures.front().size(); }
  void validate() const;
  bool uniform_grid(double tol = 1e-9) const;

  static std::vector<double> uniform(int L);
};

/// Normalize a skeleton sequence: frame times to [0,1], frames to postures.
PostureSequence to_posture_sequence(const SkeletonSequence& seq, double eps_bone = 1e-8);

/// Velocity field of a sequence, transported part-wise to the reference
/// posture, written in the reference tangent basis and scaled by
/// 1/sqrt(speed). Identically zero where the speed vanishes.
struct TSRVF {
  Posture reference;
  std::vector<double> grid;
  std::vector<Eigen::VectorXd> values;  // 2(n-1) coords per grid point

  int length() const { return static_cast<int>(grid.size()); }
};

/// Discretized boundary-pinned diffeomorphism of [0, 1].
struct Warping {
  std::vector<double> grid;
  std::vector<double> values;

  void validate() const;
  double operator()(double t) const;  // piecewise-linear evaluation
  static Warping identity(int L);
};

/// Log relative instant speed on a time grid.
struct RateFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Algorithm: weighted Karcher mean with kernel weights in the covariate,
/// initialized at the nearest datum.
Posture local_kernel_posture(const std::vector<std::pair<double, Posture>>& data, double u_star,
                             double bandwidth, Kernel kernel = Kernel::Gaussian,
                             int max_iter = 100, double tol = 1e-10, FitReport* report = nullptr);

/// Local kernel estimates on the uniform L-point grid, covariate = time.
PostureSequence resample_sequence(const PostureSequence& seq, int L, double bandwidth,
                                  Kernel kernel = Kernel::Gaussian);

/// Unweighted Karcher mean of a sequence's postures (default reference
/// posture for transports).
Posture karcher_mean(const std::vector<Posture>& postures, int max_iter = 100,
                     double tol = 1e-10, FitReport* report = nullptr);

TSRVF compute_tsrvf(const PostureSequence& seq, const Posture& reference);

/// Trapezoid integral of ||h1 - h2|| over [0, 1]; requires a common grid
/// and reference.
double tsrvf_distance(const TSRVF& h1, const TSRVF& h2);

/// Evaluate a sequence at an arbitrary time by element-wise geodesic
/// interpolation between bracketing grid postures.
Posture sequence_at(const PostureSequence& seq, double t);

/// Compose a sequence with a warping: result(t) = seq(gamma(t)) on seq's grid.
PostureSequence warp_sequence(const PostureSequence& seq, const Warping& gamma);

struct AlignmentResult {
  Warping gamma;    // on the DP lattice grid (dp_grid + 1 points)
  double distance;  // achieved TSRVF distance
};

/// Elastic alignment of `moving` onto `ref`: dynamic programming over
/// monotone paths on a dp_grid x dp_grid lattice, steps
/// {(1,1),(1,2),(2,1),(1,3),(3,1)}, endpoints pinned. Returns the warp
/// gamma* minimizing the discretized TSRVF distance and the achieved value.
AlignmentResult align_sequences(const PostureSequence& moving, const PostureSequence& ref,
                                const Posture& reference_posture, int dp_grid);

/// Alignment distance between two motions (equivalence classes under
/// warping); not exactly symmetric because of the lattice discretization.
double motion_distance(const PostureSequence& a, const PostureSequence& b,
                       const Posture& reference_posture, int dp_grid);

/// Per-column segment cost used by the DP; exposed so optimality checks can
/// enumerate paths against the identical local cost.
/// Column k covers t in [grid k, grid k+1]; gamma is linear from g0 at ta to
/// g1 at tb (ta, tb in lattice units).
double dp_segment_cost(const TSRVF& moving, const TSRVF& ref, int dp_grid, int i0, int j0, int i1,
                       int j1);

/// delta(t) = (U_moving / U_ref) * gamma(t); r = log max(d delta/dt, 1e-8).
RateFunction rate_from_warping(const Warping& gamma, double u_moving, double u_ref);

/// log of the trapezoid integral of exp(r) over [s, t].
double cumulative_rate(const RateFunction& r, double s, double t);

}  // namespace motionlab
