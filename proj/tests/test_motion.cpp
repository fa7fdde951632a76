#include <doctest.h>

#include "motionlab/motion.hpp"
#include "motionlab/stats.hpp"
#include "test_util.hpp"

using namespace motionlab;
namespace tu = motionlab::testutil;

namespace {
const SpherePoint e1(1, 0, 0);
const SpherePoint e2(0, 1, 0);
const SpherePoint e3(0, 0, 1);

PostureSequence great_circle_sequence(const SpherePoint& from, const SpherePoint& to, int L) {
  return tu::sample_path(
      [&](double t) { return Posture({sphere_geodesic(from, to, t)}); }, L);
}
}  // namespace

TEST_CASE("local kernel posture basics") {
  const std::vector<std::pair<double, Posture>> one{{0.3, Posture({e1})}};
  const Posture got = local_kernel_posture(one, 0.0, 0.1);
  CHECK(posture_distance(got, one[0].second) == 0.0);

  const std::vector<std::pair<double, Posture>> two{{0.0, Posture({e1})}, {1.0, Posture({e2})}};
  const Posture mid = local_kernel_posture(two, 0.5, 1e6);  // effectively uniform weights
  CHECK(mid.parts[0].x() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-8));
  CHECK(mid.parts[0].y() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-8));

  CHECK_THROWS_AS(local_kernel_posture({}, 0.0, 0.1), EmptyWindowError);
  // Epanechnikov support misses every datum
  CHECK_THROWS_AS(local_kernel_posture(two, 10.0, 0.5, Kernel::Epanechnikov), EmptyWindowError);
}

TEST_CASE("local kernel posture recovers the center of noisy samples") {
  Rng rng(101);
  const Posture truth = tu::random_posture(rng, 3);
  const Eigen::MatrixXd K = 0.01 * Eigen::MatrixXd::Identity(6, 6);
  std::vector<std::pair<double, Posture>> data;
  for (int s = 0; s < 50; ++s)
    data.emplace_back(0.02 * s, sample_wrapped(truth, K, mix_seed(101, s)));
  const Posture est = local_kernel_posture(data, 0.5, 10.0);  // wide kernel: plain mean
  for (int i = 0; i < 3; ++i)
    CHECK(sphere_distance(est.parts[i], truth.parts[i]) < 0.05);
}

TEST_CASE("resample keeps already-uniform data and constants") {
  Rng rng(7);
  const PostureSequence seq = tu::random_smooth_sequence(rng, 2, 21);
  const PostureSequence same = resample_sequence(seq, 21, 1e-4);
  for (int l = 0; l < 21; ++l)
    CHECK(posture_distance(same.postures[l], seq.postures[l]) < 1e-9);

  const PostureSequence constant =
      tu::sample_path([&](double) { return Posture({e1, e3}); }, 15);
  const PostureSequence res = resample_sequence(constant, 40, 0.1);
  for (const auto& p : res.postures) CHECK(posture_distance(p, constant.postures[0]) < 1e-12);
}

TEST_CASE("resample of a dense geodesic matches the analytic path") {
  // irregular sampling of a constant-speed great circle
  Rng rng(13);
  PostureSequence seq;
  seq.duration_U = 1.0;
  std::vector<double> times{0.0};
  for (int i = 1; i < 2000; ++i) times.push_back(times.back() + rng.uniform(0.5, 1.5));
  for (auto& t : times) t /= times.back();
  times.back() = 1.0;
  for (double t : times) {
    seq.grid.push_back(t);
    seq.postures.push_back(Posture({sphere_geodesic(e1, e2, t)}));
  }
  seq.grid.front() = 0.0;
  const PostureSequence res = resample_sequence(seq, 100, 5e-4);
  for (int l = 0; l < res.length(); ++l) {
    const SpherePoint truth = sphere_geodesic(e1, e2, res.grid[l]);
    CHECK(sphere_distance(res.postures[l].parts[0], truth) < 1e-3);
  }
}

TEST_CASE("tsrvf of a constant sequence vanishes") {
  const PostureSequence constant = tu::sample_path([&](double) { return Posture({e1, e3}); }, 12);
  const TSRVF h = compute_tsrvf(constant, Posture({e2, e2}));
  for (const auto& v : h.values) CHECK(v.norm() == 0.0);
}

TEST_CASE("tsrvf norm squared equals the speed") {
  Rng rng(17);
  const PostureSequence seq = tu::random_smooth_sequence(rng, 3, 50);
  const Posture ref = karcher_mean(seq.postures);
  const TSRVF h = compute_tsrvf(seq, ref);
  const double dt = 1.0 / 49.0;
  for (int l = 1; l + 1 < 50; ++l) {
    double speed2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = (sphere_log(seq.postures[l].parts[i], seq.postures[l + 1].parts[i]).vec -
                      sphere_log(seq.postures[l].parts[i], seq.postures[l - 1].parts[i]).vec) /
                     (2.0 * dt);
      speed2 += v.squaredNorm();
    }
    CHECK(std::abs(h.values[l].squaredNorm() - std::sqrt(speed2)) < 1e-8);
  }
}

TEST_CASE("tsrvf of a rewarped sequence scales by sqrt of the warp derivative") {
  Rng rng(19);
  const tu::SmoothPath path = tu::random_smooth_path(rng, 2, 0.5);
  const tu::SmoothWarp gamma = tu::random_smooth_warp(rng, 0.25);
  const int L = 1001;
  const PostureSequence alpha = tu::sample_path([&](double t) { return path.at(t); }, L);
  const PostureSequence warped =
      tu::sample_path([&](double t) { return path.at(gamma(t)); }, L);
  const Posture ref = karcher_mean(alpha.postures);
  const TSRVF h_a = compute_tsrvf(alpha, ref);
  const TSRVF h_w = compute_tsrvf(warped, ref);
  int tested = 0;
  for (int l = 50; l < L - 50; l += 40) {
    const double t = alpha.grid[l];
    const double g = gamma(t);
    // interpolate ||h_a||^2 at gamma(t)
    const double x = g * (L - 1);
    const int k = std::min(static_cast<int>(x), L - 2);
    const double s = x - k;
    const double base =
        (1.0 - s) * h_a.values[k].squaredNorm() + s * h_a.values[k + 1].squaredNorm();
    if (base < 0.05) continue;  // ratio ill-conditioned near zero speed
    const double ratio = h_w.values[l].squaredNorm() / base;
    CHECK(ratio == doctest::Approx(gamma.deriv(t)).epsilon(0.02));
    ++tested;
  }
  CHECK(tested > 10);
}

TEST_CASE("tsrvf distance: zero, symmetry, analytic oracle") {
  Rng rng(23);
  const PostureSequence a = tu::random_smooth_sequence(rng, 2, 80);
  const PostureSequence b = tu::random_smooth_sequence(rng, 2, 80);
  const Posture ref = tu::random_posture(rng, 2);
  const TSRVF ha = compute_tsrvf(a, ref);
  const TSRVF hb = compute_tsrvf(b, ref);
  CHECK(tsrvf_distance(ha, ha) == 0.0);
  CHECK(std::abs(tsrvf_distance(ha, hb) - tsrvf_distance(hb, ha)) < 1e-12);

  // two constant-speed quarter circles through e1 in orthogonal planes, both
  // transported back to Y_R = e1: the fields are constant vectors of norm
  // sqrt(pi/2) along e2 and e3, so the distance is sqrt(pi/2)*sqrt(2) = sqrt(pi)
  const PostureSequence c1 = great_circle_sequence(e1, e2, 200);
  const PostureSequence c2 = great_circle_sequence(e1, e3, 200);
  const Posture y_r({e1});
  const double d = tsrvf_distance(compute_tsrvf(c1, y_r), compute_tsrvf(c2, y_r));
  CHECK(std::abs(d - std::sqrt(M_PI)) < 1e-6);

  TSRVF shifted = hb;
  shifted.grid.pop_back();
  shifted.values.pop_back();
  CHECK_THROWS_AS(tsrvf_distance(ha, shifted), GridMismatch);
}

TEST_CASE("self alignment returns the identity warp") {
  Rng rng(29);
  const PostureSequence seq = tu::random_smooth_sequence(rng, 3, 60);
  const Posture ref = karcher_mean(seq.postures);
  const AlignmentResult res = align_sequences(seq, seq, ref, 40);
  CHECK(res.distance <= 1e-6);
  for (std::size_t l = 0; l < res.gamma.grid.size(); ++l)
    CHECK(std::abs(res.gamma.values[l] - res.gamma.grid[l]) <= 1.0 / 40 + 1e-12);
  CHECK_THROWS_AS(align_sequences(seq, seq, ref, 7), GridTooCoarse);
}

TEST_CASE("planted warp is recovered") {
  Rng rng(31);
  for (int rep = 0; rep < 3; ++rep) {
    const tu::SmoothPath path = tu::random_smooth_path(rng, 2, 0.5);
    const tu::SmoothWarp g0 = tu::random_smooth_warp(rng, 0.25);
    const int L = 201;
    const PostureSequence alpha = tu::sample_path([&](double t) { return path.at(t); }, L);
    const PostureSequence moved =
        tu::sample_path([&](double t) { return path.at(g0(t)); }, L);
    const Posture ref = karcher_mean(alpha.postures);
    const int dp = 80;
    const AlignmentResult res = align_sequences(moved, alpha, ref, dp);
    // recovered warp approximates g0^{-1}; compare via g0(gamma(t)) = t
    double sup = 0.0;
    for (std::size_t l = 0; l < res.gamma.grid.size(); ++l)
      sup = std::max(sup, std::abs(g0(res.gamma.values[l]) - res.gamma.grid[l]));
    CHECK(sup <= 2.0 / dp);
  }
}

TEST_CASE("alignment never increases the TSRVF distance") {
  Rng rng(37);
  for (int rep = 0; rep < 20; ++rep) {
    const PostureSequence a = tu::random_smooth_sequence(rng, 2, 80);
    const PostureSequence b = tu::random_smooth_sequence(rng, 2, 80);
    const Posture ref = karcher_mean(b.postures);
    const double before = tsrvf_distance(compute_tsrvf(a, ref), compute_tsrvf(b, ref));
    const AlignmentResult res = align_sequences(a, b, ref, 60);
    CHECK(res.distance <= before + 1e-12);
    // re-evaluating after composing with the warp also does not lose
    const PostureSequence warped = warp_sequence(a, res.gamma);
    const double after = tsrvf_distance(compute_tsrvf(warped, ref), compute_tsrvf(b, ref));
    CHECK(after <= before + 1e-9);
  }
}

namespace {

// exhaustive enumeration over the DP step set with identical segment costs;
// independent of the DP table
void brute_force_best(const TSRVF& mov, const TSRVF& ref, int n, int i, int j, double acc,
                      double& best) {
  if (i == n && j == n) {
    best = std::min(best, acc);
    return;
  }
  static constexpr int kSteps[5][2] = {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}};
  for (const auto& st : kSteps) {
    const int ni = i + st[0];
    const int nj = j + st[1];
    if (ni > n || nj > n) continue;
    brute_force_best(mov, ref, n, ni, nj, acc + dp_segment_cost(mov, ref, n, i, j, ni, nj), best);
  }
}

}  // namespace

TEST_CASE("dp equals exhaustive path enumeration on small lattices") {
  Rng rng(41);
  for (int rep = 0; rep < 5; ++rep) {
    const PostureSequence a = tu::random_smooth_sequence(rng, 2, 30);
    const PostureSequence b = tu::random_smooth_sequence(rng, 2, 30);
    const Posture ref = karcher_mean(b.postures);
    const int n = 10;
    const AlignmentResult res = align_sequences(a, b, ref, n);
    double best = std::numeric_limits<double>::infinity();
    brute_force_best(compute_tsrvf(a, ref), compute_tsrvf(b, ref), n, 0, 0, 0.0, best);
    CHECK(res.distance == best);
  }
}

TEST_CASE("motion distance is warp invariant up to lattice resolution") {
  // warps whose slopes the DP lattice can represent exactly; smooth warps
  // leave a slope-quantization residual instead, covered by the planted-warp
  // sup-norm recovery test
  Rng rng(43);
  const tu::SmoothPath path = tu::random_smooth_path(rng, 2, 0.5);
  const int L = 201;
  const PostureSequence alpha = tu::sample_path([&](double t) { return path.at(t); }, L);
  const Posture ref = karcher_mean(alpha.postures);
  // use the sequence's own TSRVF magnitude as the d-scale
  const TSRVF h = compute_tsrvf(alpha, ref);
  double scale = 0.0;
  for (const auto& v : h.values) scale += v.norm() / L;

  // piecewise warps: slope 2 then 1/2, breakpoint at t = a with 2a + (1-a)/2 = 1
  const std::vector<std::function<double(double)>> warps{
      [](double t) {
        const double a = 1.0 / 3.0;
        return t < a ? 2.0 * t : 2.0 * a + 0.5 * (t - a);
      },
      [](double t) {
        const double a = 2.0 / 3.0;
        return t < a ? 0.5 * t : 0.5 * a + 2.0 * (t - a);
      }};
  for (const auto& g : warps) {
    const PostureSequence warped = tu::sample_path([&](double t) { return path.at(g(t)); }, L);
    const double d = motion_distance(warped, alpha, ref, 60);
    CHECK(d <= 1e-2 * scale);
  }
  CHECK(motion_distance(alpha, alpha, ref, 60) == 0.0);
}

TEST_CASE("motion distance approximate symmetry") {
  // pairs are mildly warped/perturbed variants of a common path; the DP
  // asymmetry of the L1 objective grows with pair separation, so the 5%
  // bound targets the nearby-pair regime the within-class distances live in
  Rng rng(47);
  double max_d = 0.0, max_gap = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const tu::SmoothPath base = tu::random_smooth_path(rng, 2, 0.5);
    tu::SmoothPath other = base;
    for (int d = 0; d < other.amp.rows(); ++d)
      for (int k = 0; k < other.amp.cols(); ++k) other.amp(d, k) += 0.03 * rng.normal();
    const tu::SmoothWarp g = tu::random_smooth_warp(rng, 0.05);
    const PostureSequence a = tu::sample_path([&](double t) { return base.at(t); }, 100);
    const PostureSequence b = tu::sample_path([&](double t) { return other.at(g(t)); }, 100);
    const Posture ref = karcher_mean(a.postures);
    const double dab = motion_distance(a, b, ref, 80);
    const double dba = motion_distance(b, a, ref, 80);
    max_d = std::max({max_d, dab, dba});
    max_gap = std::max(max_gap, std::abs(dab - dba));
  }
  CHECK(max_gap <= 0.05 * max_d);
}

TEST_CASE("rate from warping") {
  const Warping id = Warping::identity(51);
  const RateFunction r0 = rate_from_warping(id, 2.0, 2.0);
  for (double v : r0.values) CHECK(v == 0.0);

  const RateFunction r2 = rate_from_warping(id, 2.0, 1.0);
  for (double v : r2.values) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Warping sq;
  sq.grid = PostureSequence::uniform(101);
  for (double t : sq.grid) sq.values.push_back(t * t);
  sq.values.back() = 1.0;
  const RateFunction rq = rate_from_warping(sq, 1.0, 1.0);
  for (int l = 1; l + 1 < 101; ++l)
    CHECK(std::abs(rq.values[l] - std::log(2.0 * sq.grid[l])) < 1e-3);
}

TEST_CASE("cumulative rate oracle values") {
  RateFunction zero{PostureSequence::uniform(11), std::vector<double>(11, 0.0)};
  CHECK(std::abs(cumulative_rate(zero, 0.0, 1.0)) < 1e-15);

  RateFunction two{PostureSequence::uniform(11), std::vector<double>(11, std::log(2.0))};
  CHECK(std::abs(cumulative_rate(two, 0.0, 0.5)) < 1e-12);

  RateFunction lin{PostureSequence::uniform(201), {}};
  for (double t : lin.grid) lin.values.push_back(t);
  CHECK(cumulative_rate(lin, 0.0, 1.0) == doctest::Approx(std::log(M_E - 1.0)).epsilon(1e-4));

  CHECK_THROWS_AS(cumulative_rate(zero, 0.5, 0.5), BadInterval);
  CHECK_THROWS_AS(cumulative_rate(zero, -0.1, 0.5), BadInterval);
}

TEST_CASE("tsrvf distance is invariant under a common warp") {
  Rng rng(53);
  const int L = 400;
  for (int rep = 0; rep < 5; ++rep) {
    const tu::SmoothPath p1 = tu::random_smooth_path(rng, 2, 0.5);
    const tu::SmoothPath p2 = tu::random_smooth_path(rng, 2, 0.5);
    const tu::SmoothWarp g = tu::random_smooth_warp(rng, 0.15);
    const Posture ref = tu::random_posture(rng, 2);
    const PostureSequence a = tu::sample_path([&](double t) { return p1.at(t); }, L);
    const PostureSequence b = tu::sample_path([&](double t) { return p2.at(t); }, L);
    const PostureSequence aw = tu::sample_path([&](double t) { return p1.at(g(t)); }, L);
    const PostureSequence bw = tu::sample_path([&](double t) { return p2.at(g(t)); }, L);
    const double d0 = tsrvf_distance(compute_tsrvf(a, ref), compute_tsrvf(b, ref));
    const double d1 = tsrvf_distance(compute_tsrvf(aw, ref), compute_tsrvf(bw, ref));
    CHECK(std::abs(d0 - d1) <= 0.02 * d0);
  }
}

TEST_CASE("warping and sequence evaluation plumbing") {
  Warping bad;
  bad.grid = {0.0, 0.5, 1.0};
  bad.values = {0.0, 0.6, 0.4};
  CHECK_THROWS_AS(bad.validate(), SchemaError);

  Rng rng(59);
  const PostureSequence seq = tu::random_smooth_sequence(rng, 2, 30);
  CHECK(posture_distance(sequence_at(seq, seq.grid[7]), seq.postures[7]) == 0.0);
  const PostureSequence same = warp_sequence(seq, Warping::identity(30));
  for (int l = 0; l < 30; ++l)
    CHECK(posture_distance(same.postures[l], seq.postures[l]) < 1e-12);
}
