#include "sphereot/experiments.hpp"

#include <chrono>
#include <cmath>

#include "sphereot/parallel.hpp"

namespace sphereot {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(StageTimes& out) : out_(out), last_(Clock::now()) {}
  void mark(const std::string& stage) {
    const auto now = Clock::now();
    out_.add(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  StageTimes& out_;
  Clock::time_point last_;
};

void apply_threads(const ExperimentConfig& cfg) { set_thread_count(cfg.threads); }

NodeSetPtr make_nodes(const ExperimentConfig& cfg) {
  return std::make_shared<NodeSet>(
      generate_nodes(cfg.n, cfg.N, cfg.scheme, cfg.k_neighbors, cfg.seed));
}

void write_map_distance(JsonWriter& w, const MapDistanceReport& rep) {
  w.begin_object();
  w.field("alpha_prime", rep.alpha_prime);
  w.field("C0", rep.c0);
  w.field("C1", rep.c1);
  w.field("holder_C1", rep.holder_c1);
  w.field("combined", rep.combined);
  w.end_object();
}

void write_versions(JsonWriter& w) {
  w.key("versions").begin_object();
  w.field("artifact", "0.1.0");
  w.field("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                       std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION));
  w.end_object();
}

}  // namespace

std::string StageTimes::json() const {
  JsonWriter w;
  w.begin_object();
  for (const auto& [stage, s] : seconds) w.field(stage, s);
  w.end_object();
  return w.str() + "\n";
}

NodesResult run_nodes(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_threads(cfg);
  NodesResult res;
  res.config = cfg;
  StageTimer timer(res.times);
  res.nodes = make_nodes(cfg);
  timer.mark("generate_nodes");
  return res;
}

SolveOutput solve_uniform_to(const NodeSetPtr& nodes, const DensityField& target,
                             const SolverConfig& solver) {
  SolveOutput out;
  const CostMatrix cost = build_cost(*nodes, *nodes, solver.cut_guard);
  const Vec mu = nodes->weights;
  const Vec nu = nodes->weights.cwiseProduct(target.values);
  auto [plan, pot] = sinkhorn(cost, mu, nu, solver, &out.stats);
  out.plan = std::move(plan);
  out.potentials = std::move(pot);
  out.map = extract_map(out.plan, nodes, nodes, solver.cut_guard);
  return out;
}

DensityField conformal_target(const ExperimentConfig& cfg, const NodeSetPtr& nodes,
                              MetricField* metric_out) {
  const auto raw = profile_by_id(cfg.perturbation.profile, cfg.n);
  Vec vals(nodes->size());
  for (int i = 0; i < nodes->size(); ++i) vals(i) = raw(nodes->points[i]);
  const double mean = nodes->weights.dot(vals) / nodes->total_weight();
  ScalarProfile phi = [raw, mean](const SpherePoint& p) { return raw(p) - mean; };
  MetricField g = conformal_metric(nodes, cfg.rho, cfg.perturbation.eps, phi);
  DensityField f2 = metric_to_density(g, *nodes, cfg.alpha);
  if (metric_out) *metric_out = std::move(g);
  return f2;
}

DensityField stability_target(const ExperimentConfig& cfg, const NodeSetPtr& nodes,
                              double eps) {
  const Vec centered = profile_values_zero_mean(cfg.perturbation.profile, *nodes);
  DensityField f;
  f.alpha = cfg.alpha;
  if (eps == 0.0) {
    f.values = Vec::Ones(nodes->size());
    return f;
  }
  const double scale = eps / holder_norm(centered, cfg.alpha, *nodes);
  f.values = Vec::Ones(nodes->size()) + scale * centered;
  if (f.values.minCoeff() <= 0.0)
    throw NonPositiveDensity("stability_target: eps too large for profile " +
                             cfg.perturbation.profile);
  return f;
}

ContractionResult run_contraction(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_threads(cfg);
  ContractionResult res;
  res.config = cfg;
  StageTimer timer(res.times);

  const NodeSetPtr nodes = make_nodes(cfg);
  timer.mark("generate_nodes");

  MetricField g;
  res.f2 = conformal_target(cfg, nodes, &g);
  res.f1 = DensityField{Vec::Ones(nodes->size()), cfg.alpha};
  res.radius = radius_from_volume(g, *nodes);
  res.metric_distance =
      metric_holder_distance(g, round_metric(nodes, cfg.rho), cfg.alpha, *nodes);
  res.density_min = res.f2.min_value();
  res.density_max = res.f2.max_value();
  timer.mark("build_metric");

  res.solve = solve_uniform_to(nodes, res.f2, cfg.solver);
  timer.mark("solve");

  const auto jac = jacobian(res.solve.map, *nodes, cfg.k_neighbors,
                            cfg.solver.cut_guard);
  res.lipschitz = lipschitz_norms(jac, res.solve.map, g);
  res.cutlocus = cutlocus_check(res.solve.map, res.f1, res.f2);
  res.ma = ma_residual(res.solve.potentials, res.solve.map, res.f1, res.f2, *nodes,
                       cfg.solver.cut_guard);
  res.dist_to_id = map_distance(res.solve.map, DiscreteMap::identity(nodes),
                                cfg.alpha_prime, *nodes, cfg.solver.cut_guard);
  res.proof_chain =
      proof_chain_bound(cfg.rho, res.dist_to_id.combined, cfg.n, g, *nodes);
  timer.mark("analysis");
  return res;
}

std::string ContractionResult::report_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("command", "contraction");
  w.key("config");
  write_config_echo(w, config);
  w.key("results").begin_object();
  w.field("radius_from_volume", radius);
  w.field("metric_holder_distance", metric_distance);
  w.field("density_min", density_min);
  w.field("density_max", density_max);
  w.key("solver").begin_object();
  w.field("iterations", solve.stats.iterations);
  w.field("eps_final", solve.stats.eps_final);
  w.field("marginal_error_row", solve.plan.marginal_error_row);
  w.field("marginal_error_col", solve.plan.marginal_error_col);
  w.field("sup_displacement", solve.map.sup_displacement());
  w.end_object();
  w.key("lipschitz").begin_object();
  w.field("sup_op_norm", lipschitz.sup_op);
  w.field("sup_hs_norm", lipschitz.sup_hs);
  w.field("contraction", lipschitz.contraction);
  w.field("hs_exceeds_one_while_contractive",
          lipschitz.sup_hs > 1.0 && lipschitz.contraction);
  w.field("K_rho", lipschitz.k_rho);
  w.end_object();
  w.key("cutlocus").begin_object();
  w.field("sup_displacement", cutlocus.sup_displacement);
  w.field("bound", cutlocus.bound);
  w.field("slack", cutlocus.slack);
  w.field("satisfied", cutlocus.satisfied);
  w.end_object();
  w.key("ma_residual").begin_object();
  w.field("sup_abs", ma.sup_abs);
  w.field("sup_rel", ma.sup_rel);
  w.end_object();
  w.key("map_distance_to_id");
  write_map_distance(w, dist_to_id);
  w.key("proof_chain").begin_object();
  w.field("K_rho", proof_chain.k_rho);
  w.field("delta", proof_chain.delta);
  w.field("bound", proof_chain.bound);
  w.field("contraction_possible", proof_chain.contraction_possible);
  w.end_object();
  w.field("tensor_norm_convention", "ambient-components");
  w.end_object();
  write_versions(w);
  w.end_object();
  return w.str() + "\n";
}

StabilityResult run_stability(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.perturbation.eps_list.size() < 2)
    throw ValidationError("stability: eps_list needs at least two entries");
  apply_threads(cfg);
  StabilityResult res;
  res.config = cfg;
  StageTimer timer(res.times);

  const NodeSetPtr nodes = make_nodes(cfg);
  timer.mark("generate_nodes");

  std::vector<RegularityInstance> instances;
  const auto id = DiscreteMap::identity(nodes);
  for (double eps : cfg.perturbation.eps_list) {
    const DensityField target = stability_target(cfg, nodes, eps);
    SolveOutput solved = solve_uniform_to(nodes, target, cfg.solver);
    StabilityRow row;
    row.eps = eps;
    Vec deviation = target.values - Vec::Ones(nodes->size());
    row.holder_f = holder_norm(deviation, cfg.alpha, *nodes);
    row.dist = map_distance(solved.map, id, cfg.alpha_prime, *nodes,
                            cfg.solver.cut_guard);
    res.rows.push_back(row);
    instances.push_back({eps, solved.potentials, solved.map});
    res.maps.push_back(std::move(solved.map));
    timer.mark("solve_eps_" + format_double(eps));
  }
  res.regularity = regularity_monitor(instances, cfg.alpha, *nodes);
  timer.mark("regularity_monitor");
  return res;
}

std::string StabilityResult::report_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("command", "stability");
  w.key("config");
  write_config_echo(w, config);
  w.key("results").begin_object();
  w.key("rows").begin_array();
  for (const auto& row : rows) {
    w.begin_object();
    w.field("eps", row.eps);
    w.field("holder_f_minus_1", row.holder_f);
    w.key("map_distance_to_id");
    write_map_distance(w, row.dist);
    w.end_object();
  }
  w.end_array();
  w.key("regularity").begin_array();
  for (const auto& row : regularity) {
    w.begin_object();
    w.field("eps", row.eps);
    w.field("norm_u", row.norm_u);
    w.field("norm_grad", row.norm_grad);
    w.field("norm_hess", row.norm_hess);
    w.field("flagged", row.flagged);
    w.end_object();
  }
  w.end_array();
  w.field("tensor_norm_convention", "ambient-components");
  w.end_object();
  write_versions(w);
  w.end_object();
  return w.str() + "\n";
}

std::string StabilityResult::curve_csv() const {
  std::string out = "eps,C0,C1,holder_C1,combined,holder_f_minus_1\n";
  for (const auto& row : rows) {
    out += format_double(row.eps) + "," + format_double(row.dist.c0) + "," +
           format_double(row.dist.c1) + "," + format_double(row.dist.holder_c1) +
           "," + format_double(row.dist.combined) + "," +
           format_double(row.holder_f) + "\n";
  }
  return out;
}

MtwResult run_mtw(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mtw.samples < 1)
    throw ValidationError("mtw: samples must be >= 1");
  apply_threads(cfg);
  MtwResult res;
  res.config = cfg;
  StageTimer timer(res.times);
  res.report = a3s_scan(cfg.n, cfg.mtw.samples, cfg.mtw.cut_margin, cfg.seed);
  timer.mark("a3s_scan");
  return res;
}

std::string MtwResult::report_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("command", "mtw");
  w.key("config");
  write_config_echo(w, config);
  w.key("results").begin_object();
  w.field("n", report.n);
  w.field("samples", report.samples);
  w.field("seed", report.seed);
  w.field("cut_margin", report.cut_margin);
  w.field("theta_obs", report.theta_obs);
  w.field("failure_count", static_cast<int>(report.failures.size()));
  w.end_object();
  write_versions(w);
  w.end_object();
  return w.str() + "\n";
}

CompareResult run_compare(const ExperimentConfig& cfg, const std::string& map_json_a,
                          const std::string& map_json_b) {
  cfg.validate();
  apply_threads(cfg);
  CompareResult res;
  res.config = cfg;
  StageTimer timer(res.times);
  DiscreteMap a = map_from_json(map_json_a, cfg.k_neighbors);
  DiscreteMap b = map_from_json(map_json_b, cfg.k_neighbors);
  timer.mark("load");
  if (!a.source->same_discretization(*b.source))
    throw NodeSetMismatch("compare: maps live on different node sets");
  b.source = a.source;
  res.dist = map_distance(a, b, cfg.alpha_prime, *a.source, cfg.solver.cut_guard);
  timer.mark("map_distance");
  return res;
}

std::string CompareResult::report_json() const {
  JsonWriter w;
  w.begin_object();
  w.field("command", "compare");
  w.key("config");
  write_config_echo(w, config);
  w.key("results").begin_object();
  w.key("map_distance");
  write_map_distance(w, dist);
  w.end_object();
  write_versions(w);
  w.end_object();
  return w.str() + "\n";
}

}  // namespace sphereot
