#include "sphereot/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sphereot {

std::string to_string(NodeScheme s) {
  return s == NodeScheme::fibonacci ? "fibonacci" : "stratified_random";
}

NodeScheme scheme_from_string(const std::string& s) {
  if (s == "fibonacci") return NodeScheme::fibonacci;
  if (s == "stratified_random") return NodeScheme::stratified_random;
  throw ValidationError("unknown node scheme: " + s);
}

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::round: return "round";
    case MetricKind::conformal: return "conformal";
    default: return "general";
  }
}

int NodeSet::nearest(const SpherePoint& p) const {
  int best = 0;
  double best_dot = -2.0;
  for (int i = 0; i < size(); ++i) {
    const double d = points[i].coords().dot(p.coords());
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> NodeSet::nearest_k(const SpherePoint& p, int k) const {
  k = std::min(k, size());
  std::vector<int> idx(size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](int a, int b) {
    const double da = points[a].coords().dot(p.coords());
    const double db = points[b].coords().dot(p.coords());
    if (da != db) return da > db;
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
  idx.resize(k);
  return idx;
}

bool NodeSet::same_discretization(const NodeSet& other) const {
  if (n != other.n || size() != other.size() || scheme != other.scheme ||
      seed != other.seed)
    return false;
  for (int i = 0; i < size(); ++i)
    if (points[i].coords() != other.points[i].coords()) return false;
  return weights == other.weights;
}

namespace {

// Stratified inverse-CDF sampler for the last coordinate of a uniform point
// on S^n; marginal density is proportional to (1-z^2)^{(n-2)/2}.
class LastCoordinateCdf {
 public:
  explicit LastCoordinateCdf(int n) {
    const int m = 1 << 14;
    grid_.resize(m + 1);
    cum_.resize(m + 1);
    cum_[0] = 0.0;
    grid_[0] = -1.0;
    const double halfpow = 0.5 * (n - 2);
    auto dens = [&](double z) { return std::pow(std::max(0.0, 1.0 - z * z), halfpow); };
    for (int i = 1; i <= m; ++i) {
      grid_[i] = -1.0 + 2.0 * i / m;
      const double a = grid_[i - 1], b = grid_[i];
      const double mid = 0.5 * (a + b);
      cum_[i] = cum_[i - 1] + (b - a) / 6.0 * (dens(a) + 4.0 * dens(mid) + dens(b));
    }
    for (auto& c : cum_) c /= cum_.back();
  }

  double invert(double u) const {
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.begin()) return -1.0;
    if (it == cum_.end()) return 1.0;
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin());
    const double c0 = cum_[i - 1], c1 = cum_[i];
    const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
  }

 private:
  std::vector<double> grid_, cum_;
};

std::vector<SpherePoint> fibonacci_points(int N) {
  std::vector<SpherePoint> pts;
  pts.reserve(N);
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < N; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / N;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    Vec p(3);
    p << r * std::cos(phi), r * std::sin(phi), z;
    pts.emplace_back(p);
  }
  return pts;
}

std::vector<SpherePoint> stratified_points(int n, int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SpherePoint> pts;
  pts.reserve(N);
  if (n == 1) {
    for (int i = 0; i < N; ++i) {
      const double th = 2.0 * M_PI * (i + unif(rng)) / N;
      Vec p(2);
      p << std::cos(th), std::sin(th);
      pts.emplace_back(p);
    }
    return pts;
  }
  const LastCoordinateCdf cdf(n);
  for (int i = 0; i < N; ++i) {
    const double z = cdf.invert((i + unif(rng)) / N);
    Vec dir(n);
    double nrm = 0.0;
    do {
      for (int k = 0; k < n; ++k) dir(k) = gauss(rng);
      nrm = dir.norm();
    } while (nrm < 1e-12);
    dir /= nrm;
    Vec p(n + 1);
    p.head(n) = std::sqrt(std::max(0.0, 1.0 - z * z)) * dir;
    p(n) = z;
    pts.emplace_back(p);
  }
  return pts;
}

void build_resolution_and_neighbors(NodeSet& ns) {
  const int N = ns.size();
  const int k = std::min(ns.k_neighbors, N - 1);
  ns.neighbors.assign(N, {});
  double h = 0.0;
  std::vector<int> idx;
  for (int i = 0; i < N; ++i) {
    idx.clear();
    for (int j = 0; j < N; ++j)
      if (j != i) idx.push_back(j);
    auto closer = [&](int a, int b) {
      const double da = ns.points[i].coords().dot(ns.points[a].coords());
      const double db = ns.points[i].coords().dot(ns.points[b].coords());
      if (da != db) return da > db;
      return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
    ns.neighbors[i].assign(idx.begin(), idx.begin() + k);
    h = std::max(h, geodesic_distance(ns.points[i], ns.points[idx[0]]));
  }
  ns.h = h;
  // symmetric closure, appended in scan order
  for (int i = 0; i < N; ++i)
    for (int j : std::vector<int>(ns.neighbors[i])) {
      auto& lst = ns.neighbors[j];
      if (std::find(lst.begin(), lst.end(), i) == lst.end()) lst.push_back(i);
    }
}

Vec inverse_kde_weights(const std::vector<SpherePoint>& pts, int n) {
  const int N = static_cast<int>(pts.size());
  const double vol = sphere_volume(n);
  const double sigma = std::pow(vol / N, 1.0 / n);
  Vec dens = Vec::Zero(N);
  for (int i = 0; i < N; ++i) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) {
      const double d = geodesic_distance(pts[i], pts[j]);
      s += std::exp(-0.5 * (d / sigma) * (d / sigma));
    }
    dens(i) = s;
  }
  Vec w = dens.cwiseInverse();
  return w * (vol / w.sum());
}

}  // namespace

NodeSet generate_nodes(int n, int N, NodeScheme scheme, int k_neighbors,
                       std::uint64_t seed) {
  if (n < 1) throw ValidationError("generate_nodes: n must be >= 1");
  if (N < n + 2) throw ValidationError("generate_nodes: N must be >= n + 2");
  if (k_neighbors < 1) throw ValidationError("generate_nodes: k_neighbors must be >= 1");
  if (scheme == NodeScheme::fibonacci && n != 2)
    throw UnsupportedScheme("fibonacci lattice requires n = 2");

  NodeSet ns;
  ns.n = n;
  ns.scheme = scheme;
  ns.seed = seed;
  ns.k_neighbors = k_neighbors;
  if (scheme == NodeScheme::fibonacci) {
    ns.points = fibonacci_points(N);
    ns.weights = Vec::Constant(N, sphere_volume(2) / N);
  } else {
    std::mt19937_64 rng(seed);
    ns.points = stratified_points(n, N, rng);
    ns.weights = inverse_kde_weights(ns.points, n);
  }
  build_resolution_and_neighbors(ns);
  return ns;
}

NodeSet nodes_from_data(int n, NodeScheme scheme, std::uint64_t seed,
                        int k_neighbors, std::vector<SpherePoint> points,
                        Vec weights) {
  if (static_cast<int>(points.size()) != weights.size())
    throw ValidationError("nodes_from_data: points/weights size mismatch");
  if (weights.minCoeff() <= 0.0)
    throw ValidationError("nodes_from_data: weights must be positive");
  NodeSet ns;
  ns.n = n;
  ns.scheme = scheme;
  ns.seed = seed;
  ns.k_neighbors = k_neighbors;
  ns.points = std::move(points);
  ns.weights = std::move(weights);
  build_resolution_and_neighbors(ns);
  return ns;
}

double DensityField::interpolate(const SpherePoint& p, const NodeSet& nodes,
                                 int k) const {
  const auto idx = nodes.nearest_k(p, k);
  double wsum = 0.0, acc = 0.0;
  for (int j : idx) {
    const double d = geodesic_distance(p, nodes.points[j]);
    if (d < 1e-12) return values(j);
    const double w = 1.0 / (d * d);
    wsum += w;
    acc += w * values(j);
  }
  return acc / wsum;
}

Mat MetricField::ambient_at(const SpherePoint& p) const {
  const int d = p.ambient_dim();
  const Mat proj = Mat::Identity(d, d) - p.coords() * p.coords().transpose();
  switch (kind) {
    case MetricKind::round:
      return rho * rho * proj;
    case MetricKind::conformal:
      return rho * rho * (1.0 + eps * profile(p)) * proj;
    default: {
      if (!nodes) throw ValidationError("general metric needs its node set");
      return components[static_cast<std::size_t>(nodes->nearest(p))];
    }
  }
}

Mat MetricField::tangent_at(const SpherePoint& p, const Frame& f) const {
  return f.basis().transpose() * ambient_at(p) * f.basis();
}

MetricField round_metric(const NodeSetPtr& nodes, double rho) {
  if (!(rho > 0.0) || rho > 1.0)
    throw ValidationError("round_metric: rho must be in (0,1]");
  MetricField g;
  g.rho = rho;
  g.kind = MetricKind::round;
  g.nodes = nodes;
  g.components.reserve(static_cast<std::size_t>(nodes->size()));
  const int d = nodes->n + 1;
  for (const auto& p : nodes->points)
    g.components.push_back(rho * rho *
                           (Mat::Identity(d, d) - p.coords() * p.coords().transpose()));
  return g;
}

MetricField conformal_metric(const NodeSetPtr& nodes, double rho, double eps,
                             ScalarProfile phi) {
  if (!(rho > 0.0) || rho >= 1.0)
    throw ValidationError("conformal_metric: rho must be in (0,1)");
  if (eps < 0.0) throw ValidationError("conformal_metric: eps must be >= 0");
  MetricField g;
  g.rho = rho;
  g.kind = MetricKind::conformal;
  g.eps = eps;
  g.profile = std::move(phi);
  g.nodes = nodes;
  g.components.reserve(static_cast<std::size_t>(nodes->size()));
  const int d = nodes->n + 1;
  for (const auto& p : nodes->points) {
    const double factor = 1.0 + eps * g.profile(p);
    if (factor <= 0.0)
      throw NonPositiveMetric("conformal factor 1 + eps*phi is not positive");
    g.components.push_back(
        rho * rho * factor *
        (Mat::Identity(d, d) - p.coords() * p.coords().transpose()));
  }
  return g;
}

namespace {

double sqrt_det_tangent(const MetricField& g, const NodeSet& nodes, int i) {
  const Frame f(nodes.points[i]);
  const Mat G = f.basis().transpose() * g.components[static_cast<std::size_t>(i)] *
                f.basis();
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NonPositiveMetric("metric restriction is not positive definite at node " +
                            std::to_string(i));
  return std::sqrt(es.eigenvalues().prod());
}

}  // namespace

DensityField metric_to_density(const MetricField& g, const NodeSet& nodes,
                               double alpha) {
  Vec vals(nodes.size());
  for (int i = 0; i < nodes.size(); ++i) vals(i) = sqrt_det_tangent(g, nodes, i);
  return normalize_density(vals, nodes, alpha);
}

double radius_from_volume(const MetricField& g, const NodeSet& nodes) {
  double vol_g = 0.0;
  for (int i = 0; i < nodes.size(); ++i)
    vol_g += nodes.weights(i) * sqrt_det_tangent(g, nodes, i);
  return std::pow(vol_g / sphere_volume(nodes.n), 1.0 / nodes.n);
}

Mat pairwise_geodesic(const NodeSet& nodes) {
  const int N = nodes.size();
  Mat D(N, N);
  for (int i = 0; i < N; ++i) {
    D(i, i) = 0.0;
    for (int j = i + 1; j < N; ++j) {
      const double d = geodesic_distance(nodes.points[i], nodes.points[j]);
      D(i, j) = D(j, i) = d;
    }
  }
  return D;
}

double holder_norm_with_distances(const Vec& values, double alpha,
                                  const Mat& dist, double h) {
  const int N = static_cast<int>(values.size());
  double semi = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double d = dist(i, j);
      if (d < h || d > M_PI / 2) continue;
      semi = std::max(semi, std::abs(values(i) - values(j)) / std::pow(d, alpha));
    }
  return values.cwiseAbs().maxCoeff() + semi;
}

double holder_norm(const Vec& values, double alpha, const NodeSet& nodes) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw ValidationError("holder_norm: alpha must be in (0,1)");
  if (values.size() != nodes.size())
    throw ValidationError("holder_norm: field size mismatch");
  return holder_norm_with_distances(values, alpha, pairwise_geodesic(nodes),
                                    nodes.h);
}

double metric_holder_distance(const MetricField& g1, const MetricField& g2,
                              double alpha, const NodeSet& nodes) {
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw ValidationError("metric_holder_distance: alpha must be in (0,1)");
  if (g1.components.size() != static_cast<std::size_t>(nodes.size()) ||
      g2.components.size() != static_cast<std::size_t>(nodes.size()))
    throw ValidationError("metric_holder_distance: node set mismatch");
  const Mat dist = pairwise_geodesic(nodes);
  const int d = nodes.n + 1;
  double out = 0.0;
  Vec comp(nodes.size());
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      for (int i = 0; i < nodes.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        comp(i) = g1.components[k](a, b) - g2.components[k](a, b);
      }
      out = std::max(out, holder_norm_with_distances(comp, alpha, dist, nodes.h));
    }
  return out;
}

DensityField normalize_density(const Vec& values, const NodeSet& nodes,
                               double alpha) {
  if (values.size() != nodes.size())
    throw ValidationError("normalize_density: field size mismatch");
  if (values.minCoeff() <= 0.0)
    throw NonPositiveDensity("density values must be positive");
  DensityField f;
  f.alpha = alpha;
  const double integral = nodes.weights.dot(values);
  f.values = values * (sphere_volume(nodes.n) / integral);
  return f;
}

}  // namespace sphereot
