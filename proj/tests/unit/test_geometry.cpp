#include <doctest.h>

#include <cmath>
#include <random>

#include "sphereot/geometry.hpp"
#include "test_util.hpp"

using namespace sphereot;
using namespace sphereot::testutil;

namespace {

// Closed-form transport oracle: rotation in the plane span(x, e) by the
// geodesic angle, identity on the orthogonal complement.
Vec rotation_transport_oracle(const SpherePoint& x, const SpherePoint& y,
                              const Vec& v) {
  const TangentVector l = log_map(x, y);
  const double theta = l.norm();
  const Vec a = x.coords();
  const Vec b = l.vec() / theta;
  Mat R = Mat::Identity(x.ambient_dim(), x.ambient_dim());
  R += std::sin(theta) * (b * a.transpose() - a * b.transpose());
  R += (std::cos(theta) - 1.0) * (a * a.transpose() + b * b.transpose());
  return R * v;
}

}  // namespace

TEST_CASE("geodesic distance on axis points") {
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);
  SpherePoint me1(-unit_axis(3, 0));
  CHECK(geodesic_distance(e1, e1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(geodesic_distance(e1, me1) == doctest::Approx(M_PI));
  CHECK(geodesic_distance(e1, e2) == doctest::Approx(M_PI / 2));
}

TEST_CASE("geodesic distance: symmetry and triangle inequality") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 3;
    auto x = random_point(n, rng), y = random_point(n, rng), z = random_point(n, rng);
    CHECK(geodesic_distance(x, y) == doctest::Approx(geodesic_distance(y, x)).epsilon(1e-12));
    CHECK(geodesic_distance(x, z) <= geodesic_distance(x, y) + geodesic_distance(y, z) + 1e-12);
  }
}

TEST_CASE("exp map on axis examples") {
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);
  CHECK((exp_map(TangentVector(e1, Vec::Zero(3))).coords() - e1.coords()).norm() < 1e-15);
  auto quarter = exp_map(TangentVector(e1, (M_PI / 2) * unit_axis(3, 1)));
  CHECK((quarter.coords() - e2.coords()).norm() < 1e-15);
  auto antipode = exp_map(TangentVector(e1, M_PI * unit_axis(3, 1)));
  CHECK((antipode.coords() + e1.coords()).norm() < 1e-12);
}

TEST_CASE("log map on axis examples and cut locus error") {
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);
  CHECK(log_map(e1, e1).norm() < 1e-15);
  auto l = log_map(e1, e2);
  CHECK((l.vec() - (M_PI / 2) * unit_axis(3, 1)).norm() < 1e-12);
  SpherePoint me1(-unit_axis(3, 0));
  CHECK_THROWS_AS((void)log_map(e1, me1), CutLocusError);
}

TEST_CASE("exp/log round trip within 1e-9") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + rep % 3;
    auto x = random_point(n, rng);
    auto dir = random_tangent(x, rng);
    if (dir.norm() < 1e-12) continue;
    std::uniform_real_distribution<double> len(0.0, M_PI - 0.1);
    const double t = len(rng);
    TangentVector v(x, dir.vec() * (t / dir.norm()));
    auto y = exp_map(v);
    auto back = log_map(x, y);
    CHECK((back.vec() - v.vec()).norm() < 1e-9);
    CHECK(std::abs(back.norm() - geodesic_distance(x, y)) < 1e-10);
    CHECK((exp_map(back).coords() - y.coords()).norm() < 1e-10);
  }
}

TEST_CASE("parallel transport: identity, isometry, rotation oracle") {
  std::mt19937_64 rng(33);
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);

  // transport to the same base point
  TangentVector v(e1, Vec(Eigen::Vector3d(0.0, 0.3, -0.2)));
  auto same = parallel_transport(v, e1);
  CHECK((same.vec() - v.vec()).norm() < 1e-14);

  // e3 direction is orthogonal to the e1-e2 geodesic plane, so it is fixed
  TangentVector w(e1, unit_axis(3, 2));
  auto moved = parallel_transport(w, e2);
  CHECK((moved.vec() - unit_axis(3, 2)).norm() < 1e-12);

  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 3;
    auto x = random_point(n, rng);
    auto y = random_point(n, rng);
    if (geodesic_distance(x, y) > M_PI - 0.05) continue;
    auto t = random_tangent(x, rng);
    auto tr = parallel_transport(t, y);
    CHECK(std::abs(tr.norm() - t.norm()) < 1e-12);
    // angle to the geodesic direction is preserved
    const auto lxy = log_map(x, y);
    if (lxy.norm() > 1e-8 && t.norm() > 1e-8) {
      const auto lyx = log_map(y, x);
      const double before = t.vec().dot(lxy.vec() / lxy.norm());
      const double after = tr.vec().dot(-lyx.vec() / lyx.norm());
      CHECK(std::abs(before - after) < 1e-10);
    }
    CHECK((tr.vec() - rotation_transport_oracle(x, y, t.vec())).norm() < 1e-10);
  }
}

TEST_CASE("cost trivial values") {
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);
  SpherePoint me1(-unit_axis(3, 0));
  CHECK(cost(e1, e1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(cost(e1, me1) == doctest::Approx(M_PI * M_PI / 2));
  CHECK(cost(e1, e2) == doctest::Approx(M_PI * M_PI / 8));
}

TEST_CASE("cost gradient equals -log and matches finite differences") {
  auto e1 = axis_point(3, 0), e2 = axis_point(3, 1);
  CHECK(cost_grad_x(e1, e1).norm() < 1e-14);
  CHECK((cost_grad_x(e1, e2).vec() + (M_PI / 2) * unit_axis(3, 1)).norm() < 1e-12);

  std::mt19937_64 rng(44);
  const double step = 1e-4;
  int checked = 0;
  while (checked < 1000) {
    const int n = 1 + checked % 3;
    auto x = random_point(n, rng), y = random_point(n, rng);
    if (geodesic_distance(x, y) > M_PI - 0.05) continue;
    ++checked;
    const auto g = cost_grad_x(x, y);
    const Frame f(x);
    for (int k = 0; k < n; ++k) {
      Vec t = Vec::Zero(n);
      t(k) = step;
      const double cp = cost(exp_map(TangentVector(x, f.to_ambient(t))), y);
      t(k) = -step;
      const double cm = cost(exp_map(TangentVector(x, f.to_ambient(t))), y);
      const double fd = (cp - cm) / (2 * step);
      CHECK(std::abs(fd - f.to_frame(g.vec())(k)) < 1e-6);
    }
  }
}

TEST_CASE("cost Hessian: identity at coincidence, trace = n") {
  std::mt19937_64 rng(55);
  for (int n : {1, 2, 3}) {
    auto x = random_point(n, rng);
    const Frame f(x);
    Mat H = cost_hess_x(x, x, f);
    CHECK((H - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(std::abs(H.trace() - n) < 1e-3);
  }
}

TEST_CASE("cost Hessian eigenvalues are {1, theta*cot(theta)}") {
  std::mt19937_64 rng(66);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + rep % 2;
    auto x = random_point(n, rng);
    auto dir = random_tangent(x, rng);
    if (dir.norm() < 1e-10) continue;
    std::uniform_real_distribution<double> thdist(0.1, M_PI - 0.4);
    const double theta = thdist(rng);
    auto y = exp_map(TangentVector(x, dir.vec() * (theta / dir.norm())));
    const Frame f(x);
    Mat H = cost_hess_x(x, y, f);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-6);

    // 1-D oracle: second differences along / perpendicular to the geodesic
    const Vec e_rad = log_map(x, y).vec() / theta;
    Vec e_perp = f.to_ambient(unit_axis(n, 0));
    e_perp -= e_perp.dot(e_rad) * e_rad;
    if (e_perp.norm() < 0.1) {
      e_perp = f.to_ambient(unit_axis(n, 1));
      e_perp -= e_perp.dot(e_rad) * e_rad;
    }
    e_perp.normalize();
    const double s = 1e-3;
    auto dir2 = [&](const Vec& e) {
      const double cp = cost(exp_map(TangentVector(x, s * e)), y);
      const double cm = cost(exp_map(TangentVector(x, -s * e)), y);
      return (cp - 2 * cost(x, y) + cm) / (s * s);
    };
    const double rad_oracle = dir2(e_rad);
    const double tan_oracle = dir2(e_perp);
    CHECK(std::abs(rad_oracle - 1.0) < 1e-3);
    CHECK(std::abs(tan_oracle - theta / std::tan(theta)) < 1e-3);

    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    const Vec ev = es.eigenvalues();
    const double tangential = theta / std::tan(theta);
    // largest eigenvalue is the radial 1, the rest are theta*cot(theta)
    CHECK(std::abs(ev(n - 1) - 1.0) < 1e-3);
    for (int k = 0; k + 1 < n; ++k) CHECK(std::abs(ev(k) - tangential) < 1e-3);
  }
}

TEST_CASE("cost Hessian tangential eigenvalue decreases toward the cut locus") {
  auto e1 = axis_point(3, 0);
  const Frame f(e1);
  double prev = 2.0;
  for (double theta : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    auto y = exp_map(TangentVector(e1, theta * unit_axis(3, 1)));
    Eigen::SelfAdjointEigenSolver<Mat> es(cost_hess_x(e1, y, f));
    const double tangential = es.eigenvalues()(0);
    CHECK(tangential < prev);
    prev = tangential;
  }
  CHECK(prev < -5.0);  // theta*cot(theta) -> -inf as theta -> pi
}

TEST_CASE("mixed determinant: limit 1, FD oracle at pi/2, monotone in theta") {
  auto e1 = axis_point(3, 0);
  auto near = exp_map(TangentVector(e1, 1e-2 * unit_axis(3, 1)));
  CHECK(std::abs(mixed_det(e1, near) - 1.0) < 1e-3);

  auto quarter = exp_map(TangentVector(e1, (M_PI / 2) * unit_axis(3, 1)));
  const double v = mixed_det(e1, quarter);
  // Richardson-extrapolated oracle at finer steps
  const double a = mixed_det(e1, quarter, 5e-4);
  const double b = mixed_det(e1, quarter, 2.5e-4);
  const double oracle = (4.0 * b - a) / 3.0;
  CHECK(std::abs(v - oracle) < 1e-3);
  // closed form (theta/sin theta)^{n-1} as an extra cross-check
  CHECK(std::abs(oracle - M_PI / 2) < 1e-3);

  double prev = 0.5;
  for (double theta : {0.3, 0.8, 1.3, 1.8, 2.3, 2.8}) {
    auto y = exp_map(TangentVector(e1, theta * unit_axis(3, 1)));
    const double m = mixed_det(e1, y);
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("rotation invariance of distance, cost, mixed_det") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2;
    auto x = random_point(n, rng), y = random_point(n, rng);
    if (geodesic_distance(x, y) > M_PI - 0.2) continue;
    Mat R = random_rotation(n + 1, rng);
    SpherePoint rx(R * x.coords()), ry(R * y.coords());
    CHECK(std::abs(geodesic_distance(rx, ry) - geodesic_distance(x, y)) < 1e-12);
    CHECK(std::abs(cost(rx, ry) - cost(x, y)) < 1e-12);
    // mixed_det is invariant up to the O(step^2) truncation of its stencil,
    // which is frame-dependent and grows toward the cut locus
    const double d = geodesic_distance(x, y);
    if (d > 0.1 && d < 2.5) {
      const double m = mixed_det(x, y);
      CHECK(std::abs(mixed_det(rx, ry) - m) / m < 2e-4);
    }
  }
}

TEST_CASE("frame is deterministic and orthonormal") {
  std::mt19937_64 rng(88);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 3;
    auto x = random_point(n, rng);
    const Frame f1(x), f2(x);
    CHECK((f1.basis() - f2.basis()).cwiseAbs().maxCoeff() == 0.0);
    Mat gram = f1.basis().transpose() * f1.basis();
    CHECK((gram - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((f1.basis().transpose() * x.coords()).cwiseAbs().maxCoeff() < 1e-10);
  }
  // poles pick the fallback axis without failing
  const Frame fp(axis_point(3, 2));
  CHECK(fp.basis().cols() == 2);
}
