#include "sphereot/solver.hpp"

#include <algorithm>
#include <cmath>

#include "sphereot/parallel.hpp"

namespace sphereot {

namespace detail {
Mat network_simplex_transport(const Mat& cost, const Vec& supply,
                              const Vec& demand);
}

std::vector<double> SolverConfig::schedule_for(double mean_cost) const {
  if (!eps_schedule.empty()) {
    for (std::size_t k = 1; k < eps_schedule.size(); ++k)
      if (eps_schedule[k] >= eps_schedule[k - 1])
        throw ValidationError("eps_schedule must be strictly decreasing");
    if (eps_schedule.back() <= 0.0)
      throw ValidationError("eps_schedule must stay positive");
    return eps_schedule;
  }
  std::vector<double> sched;
  const double eps_final = eps_final_factor * mean_cost;
  double eps = eps_start_factor * mean_cost;
  while (eps > eps_final * (1.0 + 1e-12)) {
    sched.push_back(eps);
    eps *= eps_decay;
  }
  sched.push_back(eps_final);
  return sched;
}

CostMatrix build_cost(const NodeSet& src, const NodeSet& tgt, double cut_guard) {
  const int N = src.size(), M = tgt.size();
  CostMatrix cm;
  cm.entries.resize(N, M);
  cm.cut_flags.resize(N, M);
  parallel_for(0, N, [&](int i) {
    for (int j = 0; j < M; ++j) {
      const double d = geodesic_distance(src.points[i], tgt.points[j]);
      cm.entries(i, j) = 0.5 * d * d;
      cm.cut_flags(i, j) = d >= M_PI - cut_guard;
    }
  });
  return cm;
}

namespace {

constexpr double kLogZero = -1e300;

Vec masked_log(const Vec& w) {
  Vec lw(w.size());
  for (int i = 0; i < w.size(); ++i)
    lw(i) = w(i) > 0.0 ? std::log(w(i)) : kLogZero;
  return lw;
}

// One half-update: out_i = -eps * LSE_j((pot_j - C_ij)/eps + logw_j).
// Also reports the marginal sup-error of the current plan on this side,
// err_i = w_self_i * |exp((pot_self_i - out_i)/eps) - 1|.
void half_update(const Mat& cost_cols, const Vec& pot_other,
                 const Vec& log_w_other, const Vec& pot_self,
                 const Vec& w_self, double eps, Vec& out, Vec& err) {
  const int n = static_cast<int>(out.size());
  const int other = static_cast<int>(pot_other.size());
  const int min_chunk = std::max(1, 50000 / std::max(1, other));
  const double inv_eps = 1.0 / eps;
  parallel_for(0, n, [&](int i) {
    Vec z = (pot_other - cost_cols.col(i)) * inv_eps + log_w_other;
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    out(i) = -eps * lse;
    const double e = std::min(700.0, (pot_self(i) - out(i)) * inv_eps);
    err(i) = w_self(i) * std::abs(std::exp(e) - 1.0);
  }, min_chunk);
}

}  // namespace

std::pair<TransportPlan, Potentials> sinkhorn(const CostMatrix& cost,
                                              const Vec& mu, const Vec& nu,
                                              const SolverConfig& config,
                                              SinkhornStats* stats) {
  const int N = static_cast<int>(mu.size()), M = static_cast<int>(nu.size());
  if (cost.entries.rows() != N || cost.entries.cols() != M)
    throw ValidationError("sinkhorn: cost/marginal size mismatch");
  if (mu.minCoeff() < 0.0 || nu.minCoeff() < 0.0)
    throw ValidationError("sinkhorn: marginals must be nonnegative");
  const double total = mu.sum();
  if (std::abs(total - nu.sum()) > 1e-10 * std::max(total, nu.sum()))
    throw ValidationError("sinkhorn: unbalanced marginals");
  if (!(config.tol_marginal > 0.0))
    throw ValidationError("sinkhorn: tol_marginal must be positive");

  // contiguous access for both update directions
  const Mat cost_by_row = cost.entries.transpose();  // col(i) = row i of C
  const Mat& cost_by_col = cost.entries;

  const Vec log_mu = masked_log(mu), log_nu = masked_log(nu);
  Vec f = Vec::Zero(N), g = Vec::Zero(M);
  Vec f_new(N), g_new(M), err_row(N), err_col(M);

  if (config.overrelax < 1.0 || config.overrelax >= 2.0)
    throw ValidationError("sinkhorn: overrelax must be in [1,2)");

  const auto schedule = config.schedule_for(cost.mean());
  int total_iters = 0;
  double row_err = 0.0, col_err = 0.0;
  for (std::size_t level = 0; level < schedule.size(); ++level) {
    const double eps = schedule[level];
    const bool final_level = level + 1 == schedule.size();
    const double tol = config.tol_marginal;
    bool converged = false;
    double omega = 1.0;
    double level_min_err = 1e300;
    for (int iter = 0; iter < config.max_iters; ++iter) {
      half_update(cost_by_row, g, log_nu, f, mu, eps, f_new, err_row);
      f = (1.0 - omega) * f + omega * f_new;
      half_update(cost_by_col, f, log_mu, g, nu, eps, g_new, err_col);
      g = (1.0 - omega) * g + omega * g_new;
      ++total_iters;
      row_err = err_row.maxCoeff();
      col_err = err_col.maxCoeff();
      const double err = std::max(row_err, col_err);
      if (row_err <= tol && col_err <= tol) {
        converged = true;
        break;
      }
      // a short plain warm-up absorbs the eps-drop transient; the
      // accelerated residual decays with an oscillating envelope, so only
      // outright divergence triggers the fallback
      if (iter == 4) omega = config.overrelax;
      level_min_err = std::min(level_min_err, err);
      if (omega > 1.0 && iter > 20 && err > 1e3 * level_min_err) omega = 1.0;
    }
    if (stats) stats->levels.push_back({eps, total_iters, row_err, col_err});
    if (final_level && !converged)
      throw NoConvergence(total_iters, std::max(row_err, col_err),
                          "sinkhorn did not reach tol_marginal at final eps");
  }
  const double eps_final = schedule.back();

  TransportPlan plan;
  plan.coupling.resize(N, M);
  const double inv_eps = 1.0 / eps_final;
  parallel_for(0, M, [&](int j) {
    if (nu(j) <= 0.0) {
      plan.coupling.col(j).setZero();
      return;
    }
    plan.coupling.col(j) =
        (((f.array() + g(j) - cost.entries.col(j).array()) * inv_eps).exp() *
         mu.array() * nu(j))
            .matrix();
  });
  plan.marginal_error_row = (plan.coupling.rowwise().sum() - mu).cwiseAbs().maxCoeff();
  plan.marginal_error_col =
      (plan.coupling.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff();

  // report the exp-form potential: T = exp(grad u) needs u = -f, gauged to
  // zero quadrature mean
  Potentials pot;
  pot.u = -f;
  pot.v = -g;
  const double mean_u = mu.dot(pot.u) / total;
  pot.u.array() -= mean_u;
  pot.v.array() += mean_u;
  pot.eps_final = eps_final;
  if (stats) {
    stats->iterations = total_iters;
    stats->eps_final = eps_final;
  }
  return {std::move(plan), std::move(pot)};
}

TransportPlan exact_plan(const CostMatrix& cost, const Vec& mu, const Vec& nu,
                         int n_max_exact) {
  const int N = static_cast<int>(mu.size()), M = static_cast<int>(nu.size());
  if (cost.entries.rows() != N || cost.entries.cols() != M)
    throw ValidationError("exact_plan: cost/marginal size mismatch");
  if (N > n_max_exact || M > n_max_exact)
    throw SizeLimit("exact_plan: instance exceeds N_max_exact = " +
                    std::to_string(n_max_exact));
  if (mu.minCoeff() <= 0.0 || nu.minCoeff() <= 0.0)
    throw Infeasible("exact_plan: marginals must be positive");
  const double total = mu.sum();
  if (std::abs(total - nu.sum()) > 1e-10 * std::max(total, nu.sum()))
    throw Infeasible("exact_plan: unbalanced marginals");

  TransportPlan plan;
  plan.coupling = detail::network_simplex_transport(cost.entries, mu, nu);
  plan.marginal_error_row = (plan.coupling.rowwise().sum() - mu).cwiseAbs().maxCoeff();
  plan.marginal_error_col =
      (plan.coupling.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff();
  return plan;
}

double DiscreteMap::sup_displacement() const {
  double sup = 0.0;
  for (int i = 0; i < size(); ++i)
    sup = std::max(sup, geodesic_distance(source->points[i], images[i]));
  return sup;
}

SpherePoint DiscreteMap::evaluate(const SpherePoint& p, int k) const {
  const auto idx = source->nearest_k(p, k);
  double wsum = 0.0;
  Vec acc = Vec::Zero(p.ambient_dim());
  for (int j : idx) {
    const double d = geodesic_distance(p, source->points[j]);
    if (d < 1e-12) return images[j];
    const double w = 1.0 / (d * d);
    wsum += w;
    acc += w * log_map(p, images[j]).vec();
  }
  return exp_map(TangentVector(p, acc / wsum));
}

DiscreteMap DiscreteMap::identity(const NodeSetPtr& nodes) {
  DiscreteMap m;
  m.images = nodes->points;
  m.source = nodes;
  m.provenance = Provenance::synthetic;
  return m;
}

DiscreteMap extract_map(const TransportPlan& plan, const NodeSetPtr& src,
                        const NodeSetPtr& tgt, double cut_guard,
                        double mass_floor_rel) {
  const int N = src->size(), M = tgt->size();
  if (plan.coupling.rows() != N || plan.coupling.cols() != M)
    throw ValidationError("extract_map: plan size mismatch");
  const double floor = mass_floor_rel * plan.total_mass();
  DiscreteMap map;
  map.source = src;
  map.provenance = DiscreteMap::Provenance::barycentric;
  map.images.reserve(static_cast<std::size_t>(N));

  std::vector<Vec> tangent(static_cast<std::size_t>(N));
  std::vector<int> bad(static_cast<std::size_t>(N), 0);
  parallel_for(0, N, [&](int i) {
    double wsum = 0.0;
    Vec acc = Vec::Zero(src->n + 1);
    for (int j = 0; j < M; ++j) {
      const double m = plan.coupling(i, j);
      if (m <= floor) continue;
      if (geodesic_distance(src->points[i], tgt->points[j]) >= M_PI - cut_guard) {
        bad[static_cast<std::size_t>(i)] = 1;
        return;
      }
      wsum += m;
      acc += m * log_map(src->points[i], tgt->points[j], cut_guard).vec();
    }
    tangent[static_cast<std::size_t>(i)] =
        wsum > 0.0 ? Vec(acc / wsum) : Vec(Vec::Zero(src->n + 1));
  });
  for (int i = 0; i < N; ++i) {
    if (bad[static_cast<std::size_t>(i)])
      throw CutLocusError("extract_map: significant coupling mass at the cut locus (row " +
                          std::to_string(i) + ")");
    map.images.push_back(
        exp_map(TangentVector(src->points[i], tangent[static_cast<std::size_t>(i)])));
  }
  return map;
}

namespace {

// tangent offsets and kernel weights of a node neighborhood
struct Neighborhood {
  std::vector<int> idx;
  std::vector<Vec> offsets;  // frame coordinates
  std::vector<double> weights;
};

Neighborhood gather_neighborhood(const NodeSet& nodes, int node, const Frame& frame) {
  Neighborhood nb;
  nb.idx = nodes.neighbors[static_cast<std::size_t>(node)];
  double mean_d = 0.0;
  for (int j : nb.idx)
    mean_d += geodesic_distance(nodes.points[node], nodes.points[j]);
  mean_d /= static_cast<double>(nb.idx.size());
  for (int j : nb.idx) {
    const auto l = log_map(nodes.points[node], nodes.points[j]);
    nb.offsets.push_back(frame.to_frame(l.vec()));
    const double d = l.norm() / mean_d;
    nb.weights.push_back(std::exp(-d * d));
  }
  return nb;
}

}  // namespace

Vec fit_gradient(const Vec& field, const NodeSet& nodes, int node,
                 double cond_limit) {
  const int n = nodes.n;
  const Frame frame(nodes.points[node]);
  const auto nb = gather_neighborhood(nodes, node, frame);
  const int rows = static_cast<int>(nb.idx.size());
  if (rows < n)
    throw DegenerateNeighborhood("fit_gradient: not enough neighbors");
  Mat A(rows, n);
  Vec b(rows);
  for (int r = 0; r < rows; ++r) {
    const double w = std::sqrt(nb.weights[static_cast<std::size_t>(r)]);
    A.row(r) = w * nb.offsets[static_cast<std::size_t>(r)].transpose();
    b(r) = w * (field(nb.idx[static_cast<std::size_t>(r)]) - field(node));
  }
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || svd.singularValues().maxCoeff() / smin > cond_limit)
    throw DegenerateNeighborhood("fit_gradient: ill-conditioned neighborhood at node " +
                                 std::to_string(node));
  return svd.solve(b);
}

LocalFit fit_quadratic(const Vec& field, const NodeSet& nodes, int node,
                       double cond_limit) {
  const int n = nodes.n;
  const Frame frame(nodes.points[node]);
  const auto nb = gather_neighborhood(nodes, node, frame);
  const int rows = static_cast<int>(nb.idx.size()) + 1;
  const int p = 1 + n + n * (n + 1) / 2;
  if (rows < p)
    throw DegenerateNeighborhood("fit_quadratic: not enough neighbors for node " +
                                 std::to_string(node));
  Mat A = Mat::Zero(rows, p);
  Vec b(rows);
  auto fill_row = [&](int r, const Vec& t, double value, double w) {
    const double sw = std::sqrt(w);
    int c = 0;
    A(r, c++) = sw;
    for (int k = 0; k < n; ++k) A(r, c++) = sw * t(k);
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l)
        A(r, c++) = sw * (k == l ? 0.5 * t(k) * t(k) : t(k) * t(l));
    b(r) = sw * value;
  };
  fill_row(0, Vec::Zero(n), field(node), 1.0);
  for (int r = 1; r < rows; ++r) {
    const auto q = static_cast<std::size_t>(r - 1);
    fill_row(r, nb.offsets[q], field(nb.idx[q]), nb.weights[q]);
  }
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0 || svd.singularValues().maxCoeff() / smin > cond_limit)
    throw DegenerateNeighborhood("fit_quadratic: ill-conditioned neighborhood at node " +
                                 std::to_string(node));
  const Vec sol = svd.solve(b);
  LocalFit fit;
  fit.condition = svd.singularValues().maxCoeff() / smin;
  fit.gradient = sol.segment(1, n);
  fit.hessian.resize(n, n);
  int c = 1 + n;
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) {
      fit.hessian(k, l) = fit.hessian(l, k) = sol(c);
      ++c;
    }
  return fit;
}

DiscreteMap map_from_potential(const Potentials& pot, const NodeSetPtr& src) {
  if (pot.u.size() != src->size())
    throw ValidationError("map_from_potential: potential size mismatch");
  const int N = src->size();
  DiscreteMap map;
  map.source = src;
  map.provenance = DiscreteMap::Provenance::potential_gradient;
  std::vector<Vec> grads(static_cast<std::size_t>(N));
  parallel_for(0, N, [&](int i) {
    const Frame frame(src->points[i]);
    grads[static_cast<std::size_t>(i)] =
        frame.to_ambient(fit_gradient(pot.u, *src, i));
  });
  map.images.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i)
    map.images.push_back(
        exp_map(TangentVector(src->points[i], grads[static_cast<std::size_t>(i)])));
  return map;
}

MaResidualReport ma_residual(const Potentials& pot, const DiscreteMap& map,
                             const DensityField& f1, const DensityField& f2,
                             const NodeSet& src, double cut_guard) {
  const int N = src.size();
  if (pot.u.size() != N || map.size() != N || f1.values.size() != N)
    throw ValidationError("ma_residual: size mismatch");
  MaResidualReport rep;
  rep.residual.resize(N);
  rep.rhs.resize(N);
  std::vector<int> bad(static_cast<std::size_t>(N), 0);
  parallel_for(0, N, [&](int i) {
    const SpherePoint& x = src.points[i];
    const SpherePoint& y = map.images[i];
    if (geodesic_distance(x, y) >= M_PI - cut_guard) {
      bad[static_cast<std::size_t>(i)] = 1;
      return;
    }
    const Frame frame(x);
    const Mat h_u = fit_quadratic(pot.u, src, i).hessian;
    const Mat h_c = cost_hess_x(x, y, frame, 1e-3, cut_guard);
    const double lhs = (h_u + h_c).determinant();
    const double f2_at_image = f2.interpolate(y, src);
    const double rhs = f1.values(i) / f2_at_image * mixed_det(x, y, 1e-3, cut_guard);
    rep.rhs(i) = rhs;
    rep.residual(i) = lhs - rhs;
  });
  for (int i = 0; i < N; ++i)
    if (bad[static_cast<std::size_t>(i)])
      throw CutLocusError("ma_residual: image at the cut locus for node " +
                          std::to_string(i));
  rep.sup_abs = rep.residual.cwiseAbs().maxCoeff();
  rep.sup_rel = 0.0;
  for (int i = 0; i < N; ++i)
    rep.sup_rel = std::max(rep.sup_rel,
                           std::abs(rep.residual(i)) / std::max(1e-12, std::abs(rep.rhs(i))));
  return rep;
}

}  // namespace sphereot
