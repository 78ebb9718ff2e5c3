#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sphereot/geometry.hpp"

namespace sphereot {

enum class NodeScheme { fibonacci, stratified_random };

std::string to_string(NodeScheme s);
NodeScheme scheme_from_string(const std::string& s);

// Discretization nodes with quadrature weights. Weights sum to vol_can(S^n);
// h is the max nearest-neighbor geodesic distance; neighbor lists are sorted
// by distance and closed under symmetry (missing reverse entries appended in
// scan order).
struct NodeSet {
  int n = 2;
  NodeScheme scheme = NodeScheme::fibonacci;
  std::uint64_t seed = 0;
  int k_neighbors = 0;
  std::vector<SpherePoint> points;
  Vec weights;
  double h = 0.0;
  std::vector<std::vector<int>> neighbors;

  int size() const { return static_cast<int>(points.size()); }
  double total_weight() const { return weights.sum(); }
  // index of the node closest to p (ties broken by index)
  int nearest(const SpherePoint& p) const;
  // indices of the k nodes closest to p, by distance then index
  std::vector<int> nearest_k(const SpherePoint& p, int k) const;
  bool same_discretization(const NodeSet& other) const;
};

using NodeSetPtr = std::shared_ptr<const NodeSet>;

NodeSet generate_nodes(int n, int N, NodeScheme scheme, int k_neighbors,
                       std::uint64_t seed);

// Rebuild resolution + neighbor lists for externally provided points
// (deserialization path); weights are taken as given.
NodeSet nodes_from_data(int n, NodeScheme scheme, std::uint64_t seed,
                        int k_neighbors, std::vector<SpherePoint> points,
                        Vec weights);

// Positive density w.r.t. vol_can, normalized so sum_i w_i f_i = vol_can(S^n).
struct DensityField {
  Vec values;
  double alpha = 0.5;

  double min_value() const { return values.minCoeff(); }
  double max_value() const { return values.maxCoeff(); }
  // inverse-distance-weighted interpolation over the k nodes nearest to p
  double interpolate(const SpherePoint& p, const NodeSet& nodes, int k = 4) const;
};

enum class MetricKind { round, conformal, general };

std::string to_string(MetricKind k);

// Scalar profile used to build conformal perturbations.
using ScalarProfile = std::function<double(const SpherePoint&)>;

// Symmetric ambient 2-tensor per node, acting on tangent vectors by
// restriction. round/conformal kinds also evaluate analytically at arbitrary
// points; general falls back to the nearest node.
struct MetricField {
  double rho = 1.0;
  MetricKind kind = MetricKind::round;
  std::vector<Mat> components;  // (n+1)x(n+1) per node
  double eps = 0.0;             // conformal amplitude
  ScalarProfile profile;        // conformal profile (null for round)
  NodeSetPtr nodes;

  Mat ambient_at(const SpherePoint& p) const;
  // restriction to the tangent space in the basis of the given frame (n x n)
  Mat tangent_at(const SpherePoint& p, const Frame& f) const;
};

MetricField round_metric(const NodeSetPtr& nodes, double rho);

// g = (1 + eps*phi) * g_rho; throws NonPositiveMetric when the factor is not
// positive at some node.
MetricField conformal_metric(const NodeSetPtr& nodes, double rho, double eps,
                             ScalarProfile phi);

// Density of vol_g w.r.t. vol_can: sqrt(det G) in a g_can-orthonormal tangent
// frame, renormalized to total mass vol_can(S^n).
DensityField metric_to_density(const MetricField& g, const NodeSet& nodes,
                               double alpha = 0.5);

// (vol_g(S^n) / vol_can(S^n))^{1/n} by quadrature.
double radius_from_volume(const MetricField& g, const NodeSet& nodes);

// Discrete C^{0,alpha} estimator: sup |f| plus the max difference quotient
// over node pairs with geodesic distance in [h, pi/2]. A lower bound of the
// true norm.
double holder_norm(const Vec& values, double alpha, const NodeSet& nodes);

// Same estimator applied componentwise to ambient tensor components, max over
// components.
double metric_holder_distance(const MetricField& g1, const MetricField& g2,
                              double alpha, const NodeSet& nodes);

DensityField normalize_density(const Vec& values, const NodeSet& nodes,
                               double alpha = 0.5);

// Pairwise geodesic distances (N x N, symmetric, zero diagonal).
Mat pairwise_geodesic(const NodeSet& nodes);

// holder_norm internals shared with tensor-field estimators.
double holder_norm_with_distances(const Vec& values, double alpha,
                                  const Mat& dist, double h);

}  // namespace sphereot
