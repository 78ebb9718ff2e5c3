#include "sphereot/geometry.hpp"

#include <cmath>

namespace sphereot {

SpherePoint::SpherePoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2)
    throw ValidationError("SpherePoint needs ambient dimension >= 2");
  const double nrm = coords_.norm();
  if (!(nrm > 1e-8) || !std::isfinite(nrm))
    throw ValidationError("SpherePoint coords too close to zero");
  // skip the division when the invariant already holds; renormalizing an
  // already-unit vector shifts the last ulp and breaks bit-exact reloads
  if (std::abs(nrm - 1.0) > 1e-12) coords_ /= nrm;
}

TangentVector::TangentVector(SpherePoint base, Vec vec)
    : base_(std::move(base)), vec_(std::move(vec)) {
  if (vec_.size() != base_.coords().size())
    throw ValidationError("TangentVector dimension mismatch");
  vec_ -= base_.coords().dot(vec_) * base_.coords();
}

Frame::Frame(const SpherePoint& base) : base_(base) {
  const int d = base.ambient_dim();
  const int n = d - 1;
  basis_.resize(d, n);
  int col = 0;
  for (int axis = 0; axis < d && col < n; ++axis) {
    Vec cand = Vec::Zero(d);
    cand(axis) = 1.0;
    cand -= base.coords().dot(cand) * base.coords();
    for (int c = 0; c < col; ++c) cand -= basis_.col(c).dot(cand) * basis_.col(c);
    const double nrm = cand.norm();
    if (nrm < 1e-6) continue;  // axis (numerically) parallel to span, fall back
    basis_.col(col++) = cand / nrm;
  }
  if (col != n) throw ValidationError("Frame construction failed");
}

double sphere_volume(int n) {
  if (n < 1) throw ValidationError("sphere_volume: n must be >= 1");
  const double pi = M_PI;
  return 2.0 * std::pow(pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1));
}

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  if (x.coords() == y.coords()) return 0.0;  // arccos would floor near 1e-8
  const double dot = x.coords().dot(y.coords());
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

SpherePoint exp_map(const TangentVector& v) {
  const double t = v.norm();
  if (t < 1e-14) return v.base();
  return SpherePoint(std::cos(t) * v.base().coords() +
                     (std::sin(t) / t) * v.vec());
}

TangentVector log_map(const SpherePoint& x, const SpherePoint& y,
                      double cut_guard) {
  const double theta = geodesic_distance(x, y);
  if (theta >= M_PI - cut_guard)
    throw CutLocusError("log_map: points are (nearly) antipodal, d = " +
                        std::to_string(theta));
  Vec w = y.coords() - x.coords().dot(y.coords()) * x.coords();
  const double wn = w.norm();  // = sin(theta)
  if (wn < 1e-14) return TangentVector(x, Vec::Zero(x.ambient_dim()));
  return TangentVector(x, (theta / wn) * w);
}

TangentVector parallel_transport(const TangentVector& v, const SpherePoint& y,
                                 double cut_guard) {
  const SpherePoint& x = v.base();
  const TangentVector u = log_map(x, y, cut_guard);
  const double theta = u.norm();
  if (theta < 1e-14) return TangentVector(y, v.vec());
  const Vec e = u.vec() / theta;           // unit geodesic direction at x
  const double a = e.dot(v.vec());         // component along the geodesic
  const Vec w = v.vec() - a * e;           // stays constant in the ambient space
  const Vec e_at_y = -std::sin(theta) * x.coords() + std::cos(theta) * e;
  return TangentVector(y, a * e_at_y + w);
}

double cost(const SpherePoint& x, const SpherePoint& y) {
  const double d = geodesic_distance(x, y);
  return 0.5 * d * d;
}

TangentVector cost_grad_x(const SpherePoint& x, const SpherePoint& y,
                          double cut_guard) {
  const TangentVector l = log_map(x, y, cut_guard);
  return TangentVector(x, -l.vec());
}

Mat cost_hess_x(const SpherePoint& x, const SpherePoint& y, const Frame& frame,
                double step, double cut_guard) {
  const double theta = geodesic_distance(x, y);
  if (theta >= M_PI - cut_guard)
    throw CutLocusError("cost_hess_x: points are (nearly) antipodal");
  const int n = x.n();
  const double c0 = cost(x, y);
  auto at = [&](const Vec& t) {
    return cost(exp_map(TangentVector(x, frame.to_ambient(t))), y);
  };
  Mat H(n, n);
  Vec t = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    t.setZero();
    t(k) = step;
    const double cp = at(t);
    t(k) = -step;
    const double cm = at(t);
    H(k, k) = (cp - 2.0 * c0 + cm) / (step * step);
  }
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      t.setZero();
      t(k) = step;
      t(l) = step;
      const double cpp = at(t);
      t(l) = -step;
      const double cpm = at(t);
      t(k) = -step;
      const double cmm = at(t);
      t(l) = step;
      const double cmp = at(t);
      H(k, l) = H(l, k) = (cpp - cpm - cmp + cmm) / (4.0 * step * step);
    }
  }
  return 0.5 * (H + H.transpose());
}

double mixed_det(const SpherePoint& x, const SpherePoint& y, double step,
                 double cut_guard) {
  const double theta = geodesic_distance(x, y);
  if (theta >= M_PI - cut_guard)
    throw CutLocusError("mixed_det: points are (nearly) antipodal");
  const int n = x.n();
  const Frame fx(x), fy(y);
  auto at = [&](int k, double s, int l, double t) {
    Vec a = Vec::Zero(n), b = Vec::Zero(n);
    a(k) = s;
    b(l) = t;
    return cost(exp_map(TangentVector(x, fx.to_ambient(a))),
                exp_map(TangentVector(y, fy.to_ambient(b))));
  };
  Mat M(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      M(k, l) = (at(k, step, l, step) - at(k, step, l, -step) -
                 at(k, -step, l, step) + at(k, -step, l, -step)) /
                (4.0 * step * step);
  return std::abs(M.determinant());
}

}  // namespace sphereot
