#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sphereot/fields.hpp"

namespace sphereot {

// Pairwise quadratic geodesic costs; cut_flags marks entries with
// d >= pi - cut_guard.
struct CostMatrix {
  Mat entries;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> cut_flags;
  double mean() const { return entries.mean(); }
};

struct SolverConfig {
  // Explicit schedule wins when non-empty; otherwise geometric from
  // eps_start_factor*mean(cost) down to eps_final_factor*mean(cost) with the
  // given decay.
  std::vector<double> eps_schedule;
  double eps_start_factor = 1.0;
  double eps_final_factor = 3e-3;
  double eps_decay = 0.5;
  double tol_marginal = 1e-7;
  int max_iters = 5000;
  double cut_guard = kCutGuard;
  std::uint64_t seed = 0;
  // log-domain overrelaxation factor in [1,2); same fixed point, and for
  // omega above the SOR-optimal value the residual decays like (omega-1)^k
  // instead of (1-c*eps)^k. Each level starts plain; the factor drops back
  // to 1 only on outright divergence.
  double overrelax = 1.9;

  std::vector<double> schedule_for(double mean_cost) const;
};

// Dual potentials in the exp-form convention: the optimal map is
// T(x) = exp_x(grad u). u is centered to zero quadrature mean.
struct Potentials {
  Vec u;
  Vec v;
  double eps_final = 0.0;
};

struct TransportPlan {
  Mat coupling;
  double marginal_error_row = 0.0;
  double marginal_error_col = 0.0;
  double total_mass() const { return coupling.sum(); }
  double objective(const CostMatrix& cost) const {
    return (coupling.array() * cost.entries.array()).sum();
  }
};

struct SinkhornLevelStats {
  double eps = 0.0;
  int iterations = 0;
  double row_err = 0.0;
  double col_err = 0.0;
};

struct SinkhornStats {
  int iterations = 0;
  double eps_final = 0.0;
  std::vector<SinkhornLevelStats> levels;
};

CostMatrix build_cost(const NodeSet& src, const NodeSet& tgt,
                      double cut_guard = kCutGuard);

// Log-domain Sinkhorn with epsilon scaling. mu/nu are quadrature masses
// (same total); zero entries in nu are treated as absent columns. Throws
// NoConvergence when the final level exhausts max_iters above tol_marginal.
std::pair<TransportPlan, Potentials> sinkhorn(const CostMatrix& cost,
                                              const Vec& mu, const Vec& nu,
                                              const SolverConfig& config,
                                              SinkhornStats* stats = nullptr);

// Exact Monge-Kantorovich LP by transportation network simplex.
TransportPlan exact_plan(const CostMatrix& cost, const Vec& mu, const Vec& nu,
                         int n_max_exact = 256);

struct DiscreteMap {
  enum class Provenance { barycentric, potential_gradient, synthetic };
  std::vector<SpherePoint> images;
  NodeSetPtr source;
  Provenance provenance = Provenance::synthetic;

  int size() const { return static_cast<int>(images.size()); }
  double sup_displacement() const;
  // Interpolation rule for off-node queries: inverse-distance-weighted
  // barycenter of the images of the k nodes nearest to p, averaged in the
  // tangent space at p.
  SpherePoint evaluate(const SpherePoint& p, int k = 4) const;

  static DiscreteMap identity(const NodeSetPtr& nodes);
};

// Barycentric projection in the tangent space at each source node, ignoring
// entries below mass_floor_rel * total mass.
DiscreteMap extract_map(const TransportPlan& plan, const NodeSetPtr& src,
                        const NodeSetPtr& tgt, double cut_guard = kCutGuard,
                        double mass_floor_rel = 1e-12);

// T(x_i) = exp(grad u) with grad u from weighted least squares over neighbor
// differences in the tangent space.
DiscreteMap map_from_potential(const Potentials& pot, const NodeSetPtr& src);

struct MaResidualReport {
  Vec residual;        // det(H_u + H_c) - (f1/f2(T)) |det mixed|
  Vec rhs;             // (f1/f2(T)) |det mixed|, for relative scaling
  double sup_abs = 0.0;
  double sup_rel = 0.0;
};

MaResidualReport ma_residual(const Potentials& pot, const DiscreteMap& map,
                             const DensityField& f1, const DensityField& f2,
                             const NodeSet& src, double cut_guard = kCutGuard);

// Local weighted least-squares models over node neighborhoods; shared by the
// potential-gradient map, the Monge-Ampere residual and the analysis module.
struct LocalFit {
  Vec gradient;   // frame coordinates at the node
  Mat hessian;    // frame coordinates, symmetric
  double condition = 0.0;
};

LocalFit fit_quadratic(const Vec& field, const NodeSet& nodes, int node,
                       double cond_limit = 1e8);
Vec fit_gradient(const Vec& field, const NodeSet& nodes, int node,
                 double cond_limit = 1e8);

}  // namespace sphereot
