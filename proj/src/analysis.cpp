#include "sphereot/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sphereot/parallel.hpp"

namespace sphereot {

namespace {

double operator_norm(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.transpose() * a);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// max difference quotient over node pairs with distance in [h, pi/2]
double holder_seminorm_with_distances(const Vec& values, double alpha,
                                      const Mat& dist, double h) {
  const int N = static_cast<int>(values.size());
  double semi = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      const double d = dist(i, j);
      if (d < h || d > M_PI / 2) continue;
      semi = std::max(semi, std::abs(values(i) - values(j)) / std::pow(d, alpha));
    }
  return semi;
}

}  // namespace

JacobianEstimate jacobian(const DiscreteMap& map, const NodeSet& nodes,
                          int k_neighbors, double cut_guard) {
  const int N = nodes.size();
  const int n = nodes.n;
  if (map.size() != N) throw ValidationError("jacobian: map/node size mismatch");
  JacobianEstimate est;
  est.maps.assign(static_cast<std::size_t>(N), Mat());
  est.residuals.resize(N);
  std::vector<std::string> errors(static_cast<std::size_t>(N));
  parallel_for(0, N, [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    try {
      const Frame src_frame(nodes.points[i]);
      const Frame img_frame(map.images[ii]);
      const auto& nbrs = nodes.neighbors[ii];
      const int k = std::min<int>(k_neighbors, static_cast<int>(nbrs.size()));
      if (k < n) throw DegenerateNeighborhood("jacobian: not enough neighbors");
      double mean_d = 0.0;
      for (int q = 0; q < k; ++q)
        mean_d += geodesic_distance(nodes.points[i], nodes.points[nbrs[q]]);
      mean_d /= k;
      Mat msrc = Mat::Zero(n, n), mcross = Mat::Zero(n, n);
      std::vector<Vec> ss, ts;
      std::vector<double> ws;
      for (int q = 0; q < k; ++q) {
        const int j = nbrs[static_cast<std::size_t>(q)];
        const Vec s = src_frame.to_frame(
            log_map(nodes.points[i], nodes.points[j], cut_guard).vec());
        const Vec t = img_frame.to_frame(
            log_map(map.images[ii], map.images[static_cast<std::size_t>(j)], cut_guard)
                .vec());
        const double r = s.norm() / mean_d;
        const double w = std::exp(-r * r);
        msrc += w * s * s.transpose();
        mcross += w * t * s.transpose();
        ss.push_back(s);
        ts.push_back(t);
        ws.push_back(w);
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(msrc);
      const double lmin = es.eigenvalues().minCoeff();
      if (lmin <= 0.0 || es.eigenvalues().maxCoeff() / lmin > 1e8)
        throw DegenerateNeighborhood("jacobian: ill-conditioned stencil at node " +
                                     std::to_string(i));
      const Mat a = mcross * msrc.inverse();
      double rss = 0.0, wsum = 0.0;
      for (std::size_t q = 0; q < ss.size(); ++q) {
        rss += ws[q] * (a * ss[q] - ts[q]).squaredNorm();
        wsum += ws[q];
      }
      est.maps[ii] = a;
      est.residuals(i) = std::sqrt(rss / wsum);
    } catch (const Error& e) {
      errors[ii] = e.what();
      if (dynamic_cast<const CutLocusError*>(&e))
        errors[ii] = "cut:" + errors[ii];
    }
  });
  for (const auto& e : errors) {
    if (e.empty()) continue;
    if (e.rfind("cut:", 0) == 0) throw CutLocusError(e.substr(4));
    throw DegenerateNeighborhood(e);
  }
  return est;
}

LipschitzReport lipschitz_norms(const JacobianEstimate& jac,
                                const DiscreteMap& map, const MetricField& g) {
  const NodeSet& nodes = *map.source;
  const int N = nodes.size();
  if (static_cast<int>(jac.maps.size()) != N)
    throw ValidationError("lipschitz_norms: jacobian/map size mismatch");
  LipschitzReport rep;
  rep.op_norms.resize(N);
  rep.hs_norms.resize(N);
  parallel_for(0, N, [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    const Frame img_frame(map.images[ii]);
    const Mat gimg = g.tangent_at(map.images[ii], img_frame);
    const Mat m = jac.maps[ii].transpose() * gimg * jac.maps[ii];
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    rep.op_norms(i) = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    rep.hs_norms(i) = std::sqrt(std::max(0.0, m.trace()));
  });
  rep.sup_op = rep.op_norms.maxCoeff();
  rep.sup_hs = rep.hs_norms.maxCoeff();
  // rounding guard: the exact-isometry case evaluates to 1 +- few ulp
  rep.contraction = rep.sup_op <= 1.0 + 1e-12;
  rep.k_rho = proof_chain_bound(g.rho, 0.0, nodes.n, g, nodes).k_rho;
  return rep;
}

MapDistanceReport map_distance(const DiscreteMap& t1, const DiscreteMap& t2,
                               double alpha_prime, const NodeSet& nodes,
                               double cut_guard) {
  if (!(alpha_prime > 0.0) || alpha_prime >= 1.0)
    throw ValidationError("map_distance: alpha' must be in (0,1)");
  if (!t1.source || !t2.source || !t1.source->same_discretization(*t2.source) ||
      !t1.source->same_discretization(nodes))
    throw NodeSetMismatch("map_distance: maps live on different node sets");
  const int N = nodes.size();
  const int n = nodes.n;

  MapDistanceReport rep;
  rep.alpha_prime = alpha_prime;
  for (int i = 0; i < N; ++i)
    rep.c0 = std::max(rep.c0, geodesic_distance(t1.images[static_cast<std::size_t>(i)],
                                                t2.images[static_cast<std::size_t>(i)]));

  const auto j1 = jacobian(t1, nodes, nodes.k_neighbors, cut_guard);
  const auto j2 = jacobian(t2, nodes, nodes.k_neighbors, cut_guard);

  // difference after transporting T2's image frame to T1's image point;
  // the ambient embedding of the difference feeds the Holder seminorm
  std::vector<Mat> diff_ambient(static_cast<std::size_t>(N));
  Vec c1_per_node(N);
  parallel_for(0, N, [&](int i) {
    const auto ii = static_cast<std::size_t>(i);
    const Frame f1(t1.images[ii]), f2(t2.images[ii]);
    const Frame src(nodes.points[i]);
    Mat gamma(n, n);
    for (int c = 0; c < n; ++c) {
      const TangentVector basis_vec(t2.images[ii], f2.basis().col(c));
      const TangentVector moved =
          parallel_transport(basis_vec, t1.images[ii], cut_guard);
      gamma.col(c) = f1.to_frame(moved.vec());
    }
    const Mat d = j1.maps[ii] - gamma * j2.maps[ii];
    c1_per_node(i) = operator_norm(d);
    diff_ambient[ii] = f1.basis() * d * src.basis().transpose();
  });
  rep.c1 = c1_per_node.maxCoeff();

  const Mat dist = pairwise_geodesic(nodes);
  Vec comp(N);
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) {
      for (int i = 0; i < N; ++i) comp(i) = diff_ambient[static_cast<std::size_t>(i)](a, b);
      rep.holder_c1 = std::max(
          rep.holder_c1,
          holder_seminorm_with_distances(comp, alpha_prime, dist, nodes.h));
    }
  rep.combined = rep.c0 + rep.c1 + rep.holder_c1;
  return rep;
}

double awaycut_bound(int n, double inf_f1, double sup_f2) {
  if (!(inf_f1 > 0.0) || !(sup_f2 >= inf_f1))
    throw InvalidDensityBounds("awaycut_bound: need 0 < inf_f1 <= sup_f2");
  const double ratio = inf_f1 / sup_f2;
  const double ball = n * sphere_volume(n) / (2.0 * sphere_volume(n - 1));
  return M_PI - (1.0 / (2.0 * M_PI)) * std::pow(ratio * ball * ball, 1.0 / n);
}

CutLocusReport cutlocus_check(const DiscreteMap& map, const DensityField& f1,
                              const DensityField& f2) {
  const NodeSet& nodes = *map.source;
  CutLocusReport rep;
  rep.sup_displacement = map.sup_displacement();
  rep.bound = awaycut_bound(nodes.n, f1.min_value(), f2.max_value());
  rep.slack = 2.0 * nodes.h;
  rep.satisfied = rep.sup_displacement <= rep.bound + rep.slack;
  return rep;
}

ProofChainReport proof_chain_bound(double rho, double delta, int n,
                                   const MetricField& g, const NodeSet& nodes) {
  if (!(rho > 0.0) || rho > 1.0)
    throw ValidationError("proof_chain_bound: rho must be in (0,1]");
  if (delta < 0.0) throw ValidationError("proof_chain_bound: delta must be >= 0");
  double worst_slack = 0.0;
  for (int i = 0; i < nodes.size(); ++i) {
    const Frame f(nodes.points[i]);
    const Mat gt = f.basis().transpose() *
                   g.components[static_cast<std::size_t>(i)] * f.basis();
    const Mat dev = gt - rho * rho * Mat::Identity(n, n);
    worst_slack = std::max(worst_slack, dev.cwiseAbs().maxCoeff());
  }
  ProofChainReport rep;
  rep.k_rho = static_cast<double>(n) * n * (rho * rho + worst_slack);
  rep.delta = delta;
  rep.bound = delta * std::sqrt(rep.k_rho) + rho;
  rep.contraction_possible = rep.bound < 1.0;
  return rep;
}

std::vector<RegularityRow> regularity_monitor(
    const std::vector<RegularityInstance>& sequence, double alpha,
    const NodeSet& nodes) {
  if (sequence.empty()) return {};
  const int N = nodes.size();
  const int n = nodes.n;
  const Mat dist = pairwise_geodesic(nodes);
  std::vector<RegularityRow> rows;
  for (const auto& inst : sequence) {
    if (inst.potentials.u.size() != N)
      throw ValidationError("regularity_monitor: potential size mismatch");
    RegularityRow row;
    row.eps = inst.eps;
    row.norm_u = holder_norm_with_distances(inst.potentials.u, alpha, dist, nodes.h);

    std::vector<Vec> grads(static_cast<std::size_t>(N));
    std::vector<Mat> hessians(static_cast<std::size_t>(N));
    parallel_for(0, N, [&](int i) {
      const auto ii = static_cast<std::size_t>(i);
      const Frame f(nodes.points[i]);
      const LocalFit fit = fit_quadratic(inst.potentials.u, nodes, i);
      grads[ii] = f.to_ambient(fit.gradient);
      hessians[ii] = f.basis() * fit.hessian * f.basis().transpose();
    });
    Vec comp(N);
    for (int a = 0; a <= n; ++a) {
      for (int i = 0; i < N; ++i) comp(i) = grads[static_cast<std::size_t>(i)](a);
      row.norm_grad = std::max(
          row.norm_grad, holder_norm_with_distances(comp, alpha, dist, nodes.h));
      for (int b = 0; b <= n; ++b) {
        for (int i = 0; i < N; ++i)
          comp(i) = hessians[static_cast<std::size_t>(i)](a, b);
        row.norm_hess = std::max(
            row.norm_hess, holder_norm_with_distances(comp, alpha, dist, nodes.h));
      }
    }
    rows.push_back(row);
  }
  const RegularityRow& base = rows.front();
  for (auto& row : rows)
    row.flagged = row.norm_u > 3.0 * base.norm_u ||
                  row.norm_grad > 3.0 * base.norm_grad ||
                  row.norm_hess > 3.0 * base.norm_hess;
  return rows;
}

}  // namespace sphereot
