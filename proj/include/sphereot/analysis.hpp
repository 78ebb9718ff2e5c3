#pragma once

#include "sphereot/solver.hpp"

namespace sphereot {

// Per-node linear approximation of a map: an n x n matrix from the canonical
// frame at x_i to the canonical frame at T(x_i), least-squares fitted over the
// neighbor stencil. residuals record the RMS misfit of the stencil.
struct JacobianEstimate {
  std::vector<Mat> maps;
  Vec residuals;
};

struct LipschitzReport {
  Vec op_norms;  // per node, g_can -> g
  Vec hs_norms;
  double sup_op = 0.0;
  double sup_hs = 0.0;
  bool contraction = false;  // sup_op <= 1
  double k_rho = 0.0;        // proof-chain constant for the supplied metric
};

struct MapDistanceReport {
  double c0 = 0.0;         // sup geodesic distance between images
  double c1 = 0.0;         // sup operator norm of the Jacobian difference
  double holder_c1 = 0.0;  // discrete Holder seminorm of the difference field
  double combined = 0.0;   // c0 + c1 + holder_c1
  double alpha_prime = 0.0;
};

struct CutLocusReport {
  double sup_displacement = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // quadrature slack (2h)
  bool satisfied = false;
};

struct ProofChainReport {
  double k_rho = 0.0;
  double delta = 0.0;
  double bound = 0.0;  // delta * sqrt(k_rho) + rho
  bool contraction_possible = false;
};

struct RegularityRow {
  double eps = 0.0;
  double norm_u = 0.0;     // discrete C^{0,alpha} of u
  double norm_grad = 0.0;  // max over ambient components of the LS gradient
  double norm_hess = 0.0;  // max over ambient components of the LS Hessian
  bool flagged = false;    // exceeds 3x the first (largest-eps) row
};

struct RegularityInstance {
  double eps;
  Potentials potentials;
  DiscreteMap map;
};

JacobianEstimate jacobian(const DiscreteMap& map, const NodeSet& nodes,
                          int k_neighbors, double cut_guard = kCutGuard);

// Norms of the per-node Jacobian as a linear map (T_x, g_can) -> (T_{T(x)}, g):
// operator and Hilbert-Schmidt norms of A w.r.t. the image metric.
LipschitzReport lipschitz_norms(const JacobianEstimate& jac,
                                const DiscreteMap& map, const MetricField& g);

// Discrete C^{1,alpha'} distance: C0 plus the Jacobian difference after
// parallel transport between image points, plus the Holder seminorm of the
// difference field measured on ambient components.
MapDistanceReport map_distance(const DiscreteMap& t1, const DiscreteMap& t2,
                               double alpha_prime, const NodeSet& nodes,
                               double cut_guard = kCutGuard);

// pi - (1/2pi) * { (inf f1 / sup f2) [n vol(S^n) / (2 vol(S^{n-1}))]^2 }^{1/n}
double awaycut_bound(int n, double inf_f1, double sup_f2);

CutLocusReport cutlocus_check(const DiscreteMap& map, const DensityField& f1,
                              const DensityField& f2);

// K_rho = sup over nodes of sum_{i,j} g_can^{ii} [(g_rho)_{jj} + slack] with
// slack the max componentwise deviation of g from g_rho in the tangent frame.
ProofChainReport proof_chain_bound(double rho, double delta, int n,
                                   const MetricField& g, const NodeSet& nodes);

std::vector<RegularityRow> regularity_monitor(
    const std::vector<RegularityInstance>& sequence, double alpha,
    const NodeSet& nodes);

}  // namespace sphereot
