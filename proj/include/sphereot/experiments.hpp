#pragma once

#include "sphereot/analysis.hpp"
#include "sphereot/config.hpp"
#include "sphereot/io.hpp"
#include "sphereot/mtw.hpp"

namespace sphereot {

struct StageTimes {
  std::vector<std::pair<std::string, double>> seconds;
  void add(const std::string& stage, double s) { seconds.emplace_back(stage, s); }
  std::string json() const;
};

struct NodesResult {
  ExperimentConfig config;
  NodeSetPtr nodes;
  StageTimes times;
  std::string nodes_json() const { return nodes_to_json(*nodes); }
};

NodesResult run_nodes(const ExperimentConfig& cfg);

// shared solve pipeline: uniform source onto the given target density
struct SolveOutput {
  TransportPlan plan;
  Potentials potentials;
  SinkhornStats stats;
  DiscreteMap map;
};

SolveOutput solve_uniform_to(const NodeSetPtr& nodes, const DensityField& target,
                             const SolverConfig& solver);

struct ContractionResult {
  ExperimentConfig config;
  double radius = 0.0;           // volume radius of the perturbed metric
  double metric_distance = 0.0;  // Holder distance of g to g_rho
  double density_min = 0.0, density_max = 0.0;
  SolveOutput solve;
  DensityField f1, f2;
  LipschitzReport lipschitz;
  CutLocusReport cutlocus;
  MaResidualReport ma;
  MapDistanceReport dist_to_id;
  ProofChainReport proof_chain;
  StageTimes times;

  bool verdict() const { return lipschitz.contraction; }
  std::string report_json() const;
};

ContractionResult run_contraction(const ExperimentConfig& cfg);

struct StabilityRow {
  double eps = 0.0;
  MapDistanceReport dist;
  double holder_f = 0.0;  // holder_norm(f - 1, alpha); equals eps by scaling
};

struct StabilityResult {
  ExperimentConfig config;
  std::vector<StabilityRow> rows;
  std::vector<RegularityRow> regularity;
  std::vector<DiscreteMap> maps;  // per eps, for serialization
  StageTimes times;

  std::string report_json() const;
  std::string curve_csv() const;
};

StabilityResult run_stability(const ExperimentConfig& cfg);

struct MtwResult {
  ExperimentConfig config;
  MTWReport report;
  StageTimes times;
  std::string report_json() const;
};

MtwResult run_mtw(const ExperimentConfig& cfg);

struct CompareResult {
  ExperimentConfig config;
  MapDistanceReport dist;
  StageTimes times;
  std::string report_json() const;
};

CompareResult run_compare(const ExperimentConfig& cfg, const std::string& map_json_a,
                          const std::string& map_json_b);

// target density for the conformal experiment: metric_to_density of
// (1 + eps * phi) g_rho with the quadrature-zero-mean profile
DensityField conformal_target(const ExperimentConfig& cfg, const NodeSetPtr& nodes,
                              MetricField* metric_out = nullptr);

// target density for the stability sweep: 1 + s * phi with s chosen so that
// holder_norm(f - 1, alpha) = eps exactly
DensityField stability_target(const ExperimentConfig& cfg, const NodeSetPtr& nodes,
                              double eps);

}  // namespace sphereot
