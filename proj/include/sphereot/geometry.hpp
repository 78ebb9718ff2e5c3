#pragma once

#include "sphereot/types.hpp"

namespace sphereot {

// Default guard around the antipode: log/transport are rejected whenever
// d(x,y) >= pi - cut_guard.
inline constexpr double kCutGuard = 1e-6;

// Unit vector in R^{n+1}; renormalized on construction.
class SpherePoint {
 public:
  explicit SpherePoint(Vec coords);
  const Vec& coords() const { return coords_; }
  int ambient_dim() const { return static_cast<int>(coords_.size()); }
  int n() const { return ambient_dim() - 1; }

 private:
  Vec coords_;
};

// Ambient vector orthogonal to its base point; projected on construction.
class TangentVector {
 public:
  TangentVector(SpherePoint base, Vec vec);
  const SpherePoint& base() const { return base_; }
  const Vec& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

 private:
  SpherePoint base_;
  Vec vec_;
};

// g_can-orthonormal tangent basis at a point, built deterministically by
// Gram-Schmidt against the ambient axes in fixed order (degenerate axes
// skipped).
class Frame {
 public:
  explicit Frame(const SpherePoint& base);
  const SpherePoint& base() const { return base_; }
  const Mat& basis() const { return basis_; }  // (n+1) x n, columns orthonormal
  Vec to_frame(const Vec& ambient_tangent) const {
    return basis_.transpose() * ambient_tangent;
  }
  Vec to_ambient(const Vec& frame_coords) const { return basis_ * frame_coords; }

 private:
  SpherePoint base_;
  Mat basis_;
};

// Surface volume of the unit n-sphere, 2 pi^{(n+1)/2} / Gamma((n+1)/2).
double sphere_volume(int n);

double geodesic_distance(const SpherePoint& x, const SpherePoint& y);

SpherePoint exp_map(const TangentVector& v);

// Throws CutLocusError when d(x,y) >= pi - cut_guard.
TangentVector log_map(const SpherePoint& x, const SpherePoint& y,
                      double cut_guard = kCutGuard);

// Transport along the unique minimizing geodesic from v.base to y.
TangentVector parallel_transport(const TangentVector& v, const SpherePoint& y,
                                 double cut_guard = kCutGuard);

// c(x,y) = d(x,y)^2 / 2.
double cost(const SpherePoint& x, const SpherePoint& y);

// grad_x c(x,y) = -log_x(y).
TangentVector cost_grad_x(const SpherePoint& x, const SpherePoint& y,
                          double cut_guard = kCutGuard);

// Hessian of z -> c(z,y) in normal coordinates of the given frame, by central
// second differences; returned matrix is symmetrized.
Mat cost_hess_x(const SpherePoint& x, const SpherePoint& y, const Frame& frame,
                double step = 1e-3, double cut_guard = kCutGuard);

// |det d^2 c / dx dy| in orthonormal frames at x and y, by central cross
// differences.
double mixed_det(const SpherePoint& x, const SpherePoint& y, double step = 1e-3,
                 double cut_guard = kCutGuard);

}  // namespace sphereot
