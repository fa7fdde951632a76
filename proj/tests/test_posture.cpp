#include <doctest.h>

#include "motionlab/posture.hpp"
#include "test_util.hpp"

using namespace motionlab;
using testutil::random_posture;

namespace {
const SpherePoint e1(1, 0, 0);
const SpherePoint e2(0, 1, 0);
const SpherePoint e3(0, 0, 1);
}  // namespace

TEST_CASE("posture_distance basics and metric properties") {
  Rng rng(19);
  const Posture y = random_posture(rng, 4);
  CHECK(posture_distance(y, y) == 0.0);

  const Posture a({e1, e2});
  const Posture b({e2, e3});
  CHECK(posture_distance(a, b) == doctest::Approx(M_PI).epsilon(1e-12));

  CHECK_THROWS_AS(posture_distance(a, random_posture(rng, 3)), DimensionMismatch);

  for (int it = 0; it < 500; ++it) {
    const Posture p = random_posture(rng, 3);
    const Posture q = random_posture(rng, 3);
    const Posture r = random_posture(rng, 3);
    CHECK(posture_distance(p, q) == doctest::Approx(posture_distance(q, p)).epsilon(1e-12));
    CHECK(posture_distance(p, r) <= posture_distance(p, q) + posture_distance(q, r) + 1e-12);
  }
}

TEST_CASE("posture log/exp roundtrip") {
  Rng rng(23);
  int checked = 0;
  while (checked < 1000) {
    const Posture m = random_posture(rng, 3);
    const Posture y = random_posture(rng, 3);
    bool near_antipodal = false;
    for (int i = 0; i < 3; ++i)
      if (sphere_distance(m.parts[i], y.parts[i]) > M_PI - 1e-3) near_antipodal = true;
    if (near_antipodal) continue;
    const Posture back = posture_exp(posture_log(m, y));
    for (int i = 0; i < 3; ++i)
      CHECK(sphere_distance(back.parts[i], y.parts[i]) < 1e-8);
    ++checked;
  }
}

TEST_CASE("posture_log of itself is the zero field") {
  Rng rng(29);
  const Posture m = random_posture(rng, 5);
  const PostureTangent f = posture_log(m, m);
  for (const auto& v : f.vecs) CHECK(v.norm() == 0.0);
}

TEST_CASE("one-part posture reduces to sphere ops") {
  const Posture m({e1});
  const Posture y({e2});
  CHECK(posture_distance(m, y) == sphere_distance(e1, e2));
  CHECK((posture_log(m, y).vecs[0] - sphere_log(e1, e2).vec).norm() == 0.0);
}

TEST_CASE("posture_coords zero at the base and norm identity") {
  Rng rng(31);
  const Posture m = random_posture(rng, 4);
  CHECK(posture_coords(m, m).coords.norm() == 0.0);

  int checked = 0;
  while (checked < 1000) {
    const Posture base = random_posture(rng, 4);
    const Posture y = random_posture(rng, 4);
    bool near_antipodal = false;
    for (int i = 0; i < 4; ++i)
      if (sphere_distance(base.parts[i], y.parts[i]) > M_PI - 1e-3) near_antipodal = true;
    if (near_antipodal) continue;
    const TangentCoords c = posture_coords(base, y);
    for (int i = 0; i < 4; ++i) {
      const double n = std::hypot(c.coords(2 * i), c.coords(2 * i + 1));
      CHECK(std::abs(n - sphere_distance(base.parts[i], y.parts[i])) < 1e-9);
    }
    const Posture back = posture_exp_coords(base, c.coords);
    for (int i = 0; i < 4; ++i) CHECK(sphere_distance(back.parts[i], y.parts[i]) < 1e-8);
    ++checked;
  }
}

TEST_CASE("posture_coords antipodal error carries the part index") {
  const Posture m({e1, e2});
  const Posture y({e1, SpherePoint(0, -1, 0)});
  try {
    posture_coords(m, y);
    FAIL("expected AntipodalError");
  } catch (const AntipodalError& e) {
    CHECK(e.part == 1);
  }
}

TEST_CASE("within_support flags per-part norms beyond pi/2") {
  Eigen::VectorXd c(4);
  c << 1.0, 1.0, 0.0, 0.0;  // first part norm sqrt(2) < pi/2
  CHECK(within_support(c));
  c << 1.2, 1.2, 0.0, 0.0;  // norm ~1.697 > pi/2
  CHECK_FALSE(within_support(c));
}

TEST_CASE("weighted Karcher mean of two symmetric points is the midpoint") {
  const std::vector<Posture> pts{Posture({e1}), Posture({e2})};
  const std::vector<double> w{1.0, 1.0};
  FitReport rep;
  const Posture mean = weighted_karcher_mean(pts, w, pts[0], 100, 1e-12, &rep);
  CHECK(rep.converged);
  CHECK(mean.parts[0].x() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
  CHECK(mean.parts[0].y() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
}

TEST_CASE("weighted Karcher mean rejects degenerate inputs") {
  CHECK_THROWS_AS(weighted_karcher_mean({}, {}, Posture({e1})), EmptyWindowError);
  CHECK_THROWS_AS(
      weighted_karcher_mean({Posture({e1})}, {0.0}, Posture({e1})), EmptyWindowError);
}
