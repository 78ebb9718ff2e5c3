#pragma once

#include <string>
#include <vector>

#include "sphereot/solver.hpp"

namespace sphereot {

struct PerturbationConfig {
  std::string kind = "conformal";
  std::string profile = "p1";  // p1: x3^2 - 1/3, p2: x3, p3: x1*x2
  double eps = 0.02;
  std::vector<double> eps_list;  // stability sweeps; strictly decreasing
};

struct MtwConfig {
  int samples = 1000;
  double cut_margin = 0.3;
};

// Everything the experiment commands take; file values first, then flag
// overrides.
struct ExperimentConfig {
  int n = 2;
  int N = 2000;
  NodeScheme scheme = NodeScheme::fibonacci;
  std::uint64_t seed = 42;
  int k_neighbors = 20;
  double rho = 0.8;
  PerturbationConfig perturbation;
  double alpha = 0.5;
  double alpha_prime = 0.3;
  SolverConfig solver;
  MtwConfig mtw;
  std::string out_dir = "out";
  int threads = 0;  // 0 = automatic

  void validate() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
// deterministic echo embedded into every report
void write_config_echo(class JsonWriter& w, const ExperimentConfig& cfg);

// named perturbation profiles; evaluated raw (zero mean is enforced at the
// quadrature level where they are used)
ScalarProfile profile_by_id(const std::string& id, int n);
// profile values with the quadrature mean removed
Vec profile_values_zero_mean(const std::string& id, const NodeSet& nodes);

}  // namespace sphereot
