#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sphereot/solver.hpp"
#include "test_util.hpp"

using namespace sphereot;
using namespace sphereot::testutil;

namespace {

NodeSetPtr fib_nodes(int N, int k = 8) {
  return std::make_shared<NodeSet>(generate_nodes(2, N, NodeScheme::fibonacci, k, 0));
}

DensityField smooth_density(const NodeSet& nodes) {
  Vec v(nodes.size());
  for (int i = 0; i < nodes.size(); ++i) {
    const Vec& x = nodes.points[i].coords();
    v(i) = 1.0 + 0.3 * x(2) + 0.2 * x(0) * x(1);
  }
  return normalize_density(v, nodes);
}

}  // namespace

TEST_CASE("build_cost: diagonal, symmetry, cut flags") {
  auto nodes = fib_nodes(100);
  auto cm = build_cost(*nodes, *nodes);
  CHECK(cm.entries.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((cm.entries - cm.entries.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(!cm.cut_flags.any());

  // hand-built set with an antipodal pair
  std::vector<SpherePoint> pts = {axis_point(3, 0), SpherePoint(-unit_axis(3, 0)),
                                  axis_point(3, 1), axis_point(3, 2)};
  auto ns = nodes_from_data(2, NodeScheme::stratified_random, 0, 2, pts,
                            Vec::Constant(4, M_PI));
  auto cm2 = build_cost(ns, ns);
  CHECK(cm2.cut_flags(0, 1));
  CHECK(cm2.entries(0, 1) == doctest::Approx(M_PI * M_PI / 2));
  CHECK(!cm2.cut_flags(0, 2));
}

TEST_CASE("exact_plan: identity support, 2x2 enumeration, errors") {
  auto nodes = fib_nodes(60);
  auto cm = build_cost(*nodes, *nodes);
  auto plan = exact_plan(cm, nodes->weights, nodes->weights);
  CHECK(plan.objective(cm) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((plan.coupling.diagonal() - nodes->weights).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(plan.marginal_error_row < 1e-10);
  CHECK(plan.marginal_error_col < 1e-10);
  CHECK(std::abs(plan.total_mass() - 4 * M_PI) / (4 * M_PI) < 1e-8);

  // 2x2 with distinct costs: compare against both vertex plans
  CostMatrix small;
  small.entries.resize(2, 2);
  small.entries << 0.3, 1.1, 0.9, 0.2;
  small.cut_flags.setConstant(2, 2, false);
  Vec a(2), b(2);
  a << 0.6, 0.4;
  b << 0.5, 0.5;
  auto p = exact_plan(small, a, b);
  // vertex 1: x11 = 0.5, x12 = 0.1, x22 = 0.4 -> 0.3*0.5+1.1*0.1+0.2*0.4 = 0.34
  // vertex 2: x12 = 0.6, x21 = 0.5, x22 = -0.1 infeasible; the only other
  // vertex is x11 = 0.1, x12 = 0.5, x21 = 0.4: 0.03+0.55+0.36 = 0.94
  CHECK(p.objective(small) == doctest::Approx(0.34).epsilon(1e-12));
  CHECK(p.coupling(0, 0) == doctest::Approx(0.5));
  CHECK(p.coupling(1, 1) == doctest::Approx(0.4));

  CHECK_THROWS_AS((void)exact_plan(cm, nodes->weights, nodes->weights, 32), SizeLimit);
  Vec unbalanced = nodes->weights * 1.5;
  CHECK_THROWS_AS((void)exact_plan(cm, nodes->weights, unbalanced), Infeasible);
}

TEST_CASE("exact_plan matches brute-force assignment on equal weights") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int N = 4 + rep % 3;
    std::vector<SpherePoint> src, tgt;
    for (int i = 0; i < N; ++i) {
      src.push_back(random_point(2, rng));
      tgt.push_back(random_point(2, rng));
    }
    CostMatrix cm;
    cm.entries.resize(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) cm.entries(i, j) = cost(src[i], tgt[j]);
    cm.cut_flags.setConstant(N, N, false);
    const Vec w = Vec::Constant(N, 1.0 / N);
    auto plan = exact_plan(cm, w, w);

    // equal weights: the optimum is a permutation; enumerate all of them
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double obj = 0.0;
      for (int i = 0; i < N; ++i) obj += cm.entries(i, perm[i]) / N;
      best = std::min(best, obj);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(plan.objective(cm) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("sinkhorn: diagonal dominance for identical marginals") {
  auto nodes = fib_nodes(80);
  auto cm = build_cost(*nodes, *nodes);
  SolverConfig cfg;
  cfg.eps_final_factor = 1e-2;
  auto [plan, pot] = sinkhorn(cm, nodes->weights, nodes->weights, cfg);
  CHECK(plan.coupling.diagonal().sum() >= 0.9 * plan.total_mass());
  CHECK(plan.marginal_error_row <= cfg.tol_marginal);
  CHECK(plan.marginal_error_col <= cfg.tol_marginal);
  // u is gauge-fixed to zero quadrature mean
  CHECK(std::abs(nodes->weights.dot(pot.u)) < 1e-8);
}

TEST_CASE("sinkhorn: two-point instance with a zero target weight") {
  std::vector<SpherePoint> pts = {axis_point(3, 0), axis_point(3, 1)};
  auto ns = nodes_from_data(2, NodeScheme::stratified_random, 0, 1, pts,
                            Vec::Constant(2, 2 * M_PI));
  auto cm = build_cost(ns, ns);
  Vec mu = Vec::Constant(2, 2 * M_PI);
  Vec nu(2);
  nu << 4 * M_PI, 0.0;
  SolverConfig cfg;
  auto [plan, pot] = sinkhorn(cm, mu, nu, cfg);
  CHECK(plan.coupling(0, 0) == doctest::Approx(2 * M_PI).epsilon(1e-6));
  CHECK(plan.coupling(1, 0) == doctest::Approx(2 * M_PI).epsilon(1e-6));
  CHECK(plan.coupling(0, 1) == 0.0);
  CHECK(plan.coupling(1, 1) == 0.0);
}

TEST_CASE("sinkhorn converges to the exact plan as eps decreases") {
  auto nodes = fib_nodes(64);
  auto cm = build_cost(*nodes, *nodes);
  auto f2 = smooth_density(*nodes);
  const Vec mu = nodes->weights;
  const Vec nu = nodes->weights.cwiseProduct(f2.values);
  auto exact = exact_plan(cm, mu, nu);

  SolverConfig cfg;
  cfg.eps_final_factor = 1e-4;
  cfg.max_iters = 40000;
  auto [plan, pot] = sinkhorn(cm, mu, nu, cfg);
  CHECK(plan.marginal_error_row <= 1e-6);
  CHECK(plan.marginal_error_col <= 1e-6);
  CHECK(exact.objective(cm) <= plan.objective(cm) + 1e-12);

  // suboptimality shrinks with eps on the fixed instance
  SolverConfig coarse = cfg;
  coarse.eps_final_factor = 1e-2;
  auto [plan_c, pot_c] = sinkhorn(cm, mu, nu, coarse);
  const double gap_coarse = plan_c.objective(cm) - exact.objective(cm);
  const double gap_fine = plan.objective(cm) - exact.objective(cm);
  CHECK(gap_fine <= gap_coarse);
  CHECK(gap_fine <= 1e-3);

  // uniqueness cross-check: barycentric maps from both routes agree
  auto map_exact = extract_map(exact, nodes, nodes);
  auto map_sink = extract_map(plan, nodes, nodes);
  double sup = 0.0;
  for (int i = 0; i < nodes->size(); ++i)
    sup = std::max(sup, geodesic_distance(map_exact.images[i], map_sink.images[i]));
  CHECK(sup <= 0.05);
}

TEST_CASE("sinkhorn throws NoConvergence when starved of iterations") {
  auto nodes = fib_nodes(40);
  auto cm = build_cost(*nodes, *nodes);
  auto f2 = smooth_density(*nodes);
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.tol_marginal = 1e-12;
  try {
    (void)sinkhorn(cm, nodes->weights, nodes->weights.cwiseProduct(f2.values), cfg);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations > 0);
    CHECK(e.residual > 1e-12);
  }
}

TEST_CASE("sinkhorn honors an explicit eps schedule") {
  auto nodes = fib_nodes(48);
  auto cm = build_cost(*nodes, *nodes);
  auto f2 = smooth_density(*nodes);
  SolverConfig cfg;
  cfg.eps_schedule = {0.5, 0.1, 0.02};
  SinkhornStats stats;
  auto [plan, pot] = sinkhorn(cm, nodes->weights,
                              nodes->weights.cwiseProduct(f2.values), cfg, &stats);
  CHECK(stats.eps_final == 0.02);
  CHECK(pot.eps_final == 0.02);
  REQUIRE(stats.levels.size() == 3);
  CHECK(stats.levels[0].eps == 0.5);
  CHECK(plan.marginal_error_row <= cfg.tol_marginal);

  SolverConfig bad;
  bad.eps_schedule = {0.1, 0.5};
  CHECK_THROWS_AS((void)sinkhorn(cm, nodes->weights, nodes->weights, bad),
                  ValidationError);
}

TEST_CASE("extract_map: identity plan, single-target rows, cut locus error") {
  auto nodes = fib_nodes(50);
  TransportPlan plan;
  plan.coupling = nodes->weights.asDiagonal();
  auto map = extract_map(plan, nodes, nodes);
  for (int i = 0; i < nodes->size(); ++i)
    CHECK(geodesic_distance(map.images[i], nodes->points[i]) < 1e-12);
  CHECK(map.sup_displacement() < 1e-12);

  // all mass of each row on one off-diagonal target
  TransportPlan shifted;
  shifted.coupling = Mat::Zero(nodes->size(), nodes->size());
  for (int i = 0; i < nodes->size(); ++i)
    shifted.coupling(i, (i + 1) % nodes->size()) = nodes->weights(i);
  auto smap = extract_map(shifted, nodes, nodes);
  for (int i = 0; i < nodes->size(); ++i) {
    const int j = (i + 1) % nodes->size();
    CHECK((smap.images[i].coords() - nodes->points[j].coords()).norm() < 1e-10);
  }

  std::vector<SpherePoint> pts = {axis_point(3, 0), SpherePoint(-unit_axis(3, 0)),
                                  axis_point(3, 1)};
  auto ns = std::make_shared<NodeSet>(nodes_from_data(
      2, NodeScheme::stratified_random, 0, 1, pts, Vec::Constant(3, 4 * M_PI / 3)));
  TransportPlan antipodal;
  antipodal.coupling = Mat::Zero(3, 3);
  antipodal.coupling(0, 1) = 1.0;
  antipodal.coupling(1, 0) = 1.0;
  antipodal.coupling(2, 2) = 1.0;
  CHECK_THROWS_AS((void)extract_map(antipodal, ns, ns), CutLocusError);
}

TEST_CASE("map interpolation reproduces node images") {
  auto nodes = fib_nodes(200);
  auto map = DiscreteMap::identity(nodes);
  CHECK(geodesic_distance(map.evaluate(nodes->points[7]), nodes->points[7]) < 1e-12);
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto p = random_point(2, rng);
    CHECK(geodesic_distance(map.evaluate(p), p) < 2.0 * nodes->h);
  }
}

TEST_CASE("map_from_potential: zero potential, displacement sign") {
  auto nodes = fib_nodes(300);
  Potentials pot;
  pot.u = Vec::Zero(nodes->size());
  pot.v = Vec::Zero(nodes->size());
  pot.eps_final = 1e-3;
  auto id = map_from_potential(pot, nodes);
  // arccos of a self inner product floors the measurable displacement near 1e-8
  CHECK(id.sup_displacement() < 1e-7);
  CHECK(id.provenance == DiscreteMap::Provenance::potential_gradient);

  // u linear in the polar coordinate pushes along its tangential gradient
  const double a = 0.05;
  for (int i = 0; i < nodes->size(); ++i) pot.u(i) = a * nodes->points[i].coords()(2);
  auto map = map_from_potential(pot, nodes);
  int checked = 0;
  for (int i = 0; i < nodes->size(); ++i) {
    const Vec& x = nodes->points[i].coords();
    Vec grad_x3 = unit_axis(3, 2) - x(2) * x;  // tangential gradient of x3
    if (grad_x3.norm() < 0.3) continue;
    const Vec disp = log_map(nodes->points[i], map.images[i]).vec();
    if (disp.norm() < 1e-6) continue;
    ++checked;
    CHECK(disp.dot(grad_x3) > 0.0);
    CHECK(std::abs(disp.norm() - a * grad_x3.norm()) < 0.2 * a);
  }
  CHECK(checked > 100);
}

TEST_CASE("two extraction routes agree on a solved instance") {
  auto nodes = fib_nodes(300, 10);
  auto cm = build_cost(*nodes, *nodes);
  auto f2 = smooth_density(*nodes);
  SolverConfig cfg;
  auto [plan, pot] = sinkhorn(cm, nodes->weights,
                              nodes->weights.cwiseProduct(f2.values), cfg);
  auto bary = extract_map(plan, nodes, nodes);
  auto grad = map_from_potential(pot, nodes);
  double sup = 0.0;
  for (int i = 0; i < nodes->size(); ++i)
    sup = std::max(sup, geodesic_distance(bary.images[i], grad.images[i]));
  CHECK(sup <= 2.0 * nodes->h);
}

TEST_CASE("ma_residual vanishes for the identity data") {
  auto nodes = fib_nodes(200, 10);
  Potentials pot;
  pot.u = Vec::Zero(nodes->size());
  pot.v = Vec::Zero(nodes->size());
  pot.eps_final = 1e-3;
  auto id = DiscreteMap::identity(nodes);
  DensityField ones{Vec::Ones(nodes->size()), 0.5};
  auto rep = ma_residual(pot, id, ones, ones, *nodes);
  CHECK(rep.sup_abs < 1e-6);
}

TEST_CASE("local fits recover quadratic data and flag degenerate neighborhoods") {
  auto nodes = fib_nodes(1000, 12);
  // field with known gradient/Hessian structure: f = x3
  Vec f(nodes->size());
  for (int i = 0; i < nodes->size(); ++i) f(i) = nodes->points[i].coords()(2);
  for (int i : {200, 400, 500, 650}) {
    const Frame frame(nodes->points[i]);
    const Vec g_ambient = frame.to_ambient(fit_gradient(f, *nodes, i));
    const Vec& x = nodes->points[i].coords();
    const Vec truth = unit_axis(3, 2) - x(2) * x;
    // the linear fit carries an O(h^2 |Hess|) bias, the quadratic an O(h^3)
    CHECK((g_ambient - truth).norm() < 2e-2);
    const auto fit = fit_quadratic(f, *nodes, i);
    CHECK((frame.to_ambient(fit.gradient) - truth).norm() < 5e-3);
  }

  // nodes along a great circle: tangent offsets are collinear for n = 2
  std::vector<SpherePoint> circle;
  const int m = 40;
  for (int i = 0; i < m; ++i) {
    Vec p(3);
    p << std::cos(2 * M_PI * i / m), std::sin(2 * M_PI * i / m), 0.0;
    circle.emplace_back(p);
  }
  auto ring = nodes_from_data(2, NodeScheme::stratified_random, 0, 4, circle,
                              Vec::Constant(m, 4 * M_PI / m));
  Vec rf = Vec::Ones(m);
  CHECK_THROWS_AS((void)fit_gradient(rf, ring, 0), DegenerateNeighborhood);
}
