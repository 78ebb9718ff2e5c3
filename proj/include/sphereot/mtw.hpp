#pragma once

#include <cstdint>
#include <vector>

#include "sphereot/geometry.hpp"

namespace sphereot {

// Evaluation point for the cost curvature scan: base point x, offset v0 with
// exp_x(v0) away from the cut locus, and a unit orthogonal pair (xi, nu) in
// T_x S^n.
struct MTWQuery {
  SpherePoint x;
  TangentVector v0;
  TangentVector xi;
  TangentVector nu;
};

struct MTWFailure {
  MTWQuery query;
  double value;
};

struct MTWReport {
  int n = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  double cut_margin = 0.0;
  double theta_obs = 0.0;  // minimum observed value
  std::vector<MTWFailure> failures;  // queries with nonpositive values
  std::vector<MTWFailure> smallest;  // the 10 smallest samples, ascending
};

// Second t-derivative at t = 0 of
//   h(t) = -[Hess_x c(x, exp_x(v0 + t*nu))](xi, xi)
// with the Hessian expressed in a frame held fixed in t (the flat connection
// on T_x S^n), by central differences.
double mtw_value(const MTWQuery& q, double t_step = 1e-2,
                 double hess_step = 1e-3);

// Richardson refinement: (4 v(t/2) - v(t)) / 3.
double mtw_value_richardson(const MTWQuery& q, double t_step = 1e-2,
                            double hess_step = 1e-3);

// Uniform scan over admissible queries; deterministic per seed.
MTWReport a3s_scan(int n, int samples, double cut_margin, std::uint64_t seed);

}  // namespace sphereot
