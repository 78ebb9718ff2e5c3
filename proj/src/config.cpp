#include "sphereot/config.hpp"

#include <sstream>

#include <json.hpp>

#include "sphereot/io.hpp"

namespace sphereot {

void ExperimentConfig::validate() const {
  if (n < 1) throw ValidationError("config: n must be >= 1");
  if (N < n + 2) throw ValidationError("config: N must be >= n + 2");
  if (!(rho > 0.0) || rho >= 1.0)
    throw ValidationError("config: rho must be in (0,1)");
  if (!(alpha > 0.0) || alpha >= 1.0)
    throw ValidationError("config: alpha must be in (0,1)");
  if (!(alpha_prime > 0.0) || alpha_prime >= alpha)
    throw ValidationError("config: alpha' must be in (0, alpha)");
  const int k_min = (n * n + 3 * n) / 2 + 1;
  if (k_neighbors < k_min)
    throw ValidationError("config: k_neighbors must be >= " + std::to_string(k_min) +
                          " for quadratic fits in dimension " + std::to_string(n));
  for (std::size_t i = 1; i < perturbation.eps_list.size(); ++i)
    if (perturbation.eps_list[i] >= perturbation.eps_list[i - 1])
      throw ValidationError("config: eps_list must be strictly decreasing");
  if (perturbation.eps < 0.0)
    throw ValidationError("config: perturbation eps must be >= 0");
  if (perturbation.kind != "conformal")
    throw ValidationError("config: unsupported perturbation kind " + perturbation.kind);
  if (mtw.samples < 0) throw ValidationError("config: mtw samples must be >= 0");
  if (threads < 0) throw ValidationError("config: threads must be >= 0");
  (void)profile_by_id(perturbation.profile, n);
}

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  read_if(j, "n", cfg.n);
  read_if(j, "N", cfg.N);
  if (j.contains("scheme")) cfg.scheme = scheme_from_string(j.at("scheme"));
  read_if(j, "seed", cfg.seed);
  read_if(j, "k_neighbors", cfg.k_neighbors);
  read_if(j, "rho", cfg.rho);
  read_if(j, "alpha", cfg.alpha);
  read_if(j, "alpha_prime", cfg.alpha_prime);
  read_if(j, "out", cfg.out_dir);
  read_if(j, "threads", cfg.threads);
  if (j.contains("perturbation")) {
    const auto& p = j.at("perturbation");
    read_if(p, "kind", cfg.perturbation.kind);
    read_if(p, "profile", cfg.perturbation.profile);
    read_if(p, "eps", cfg.perturbation.eps);
    read_if(p, "eps_list", cfg.perturbation.eps_list);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    read_if(s, "eps_schedule", cfg.solver.eps_schedule);
    read_if(s, "eps_start_factor", cfg.solver.eps_start_factor);
    read_if(s, "eps_final_factor", cfg.solver.eps_final_factor);
    read_if(s, "eps_decay", cfg.solver.eps_decay);
    read_if(s, "tol_marginal", cfg.solver.tol_marginal);
    read_if(s, "max_iters", cfg.solver.max_iters);
    read_if(s, "overrelax", cfg.solver.overrelax);
    read_if(s, "cut_guard", cfg.solver.cut_guard);
    read_if(s, "seed", cfg.solver.seed);
  }
  if (j.contains("mtw")) {
    const auto& m = j.at("mtw");
    read_if(m, "samples", cfg.mtw.samples);
    read_if(m, "cut_margin", cfg.mtw.cut_margin);
  }
  return cfg;
}

namespace {

std::vector<double> parse_double_list(const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  try {
    if (key == "n") cfg.n = std::stoi(value);
    else if (key == "N") cfg.N = std::stoi(value);
    else if (key == "scheme") cfg.scheme = scheme_from_string(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "k_neighbors") cfg.k_neighbors = std::stoi(value);
    else if (key == "rho") cfg.rho = std::stod(value);
    else if (key == "alpha") cfg.alpha = std::stod(value);
    else if (key == "alpha_prime") cfg.alpha_prime = std::stod(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "perturbation.kind") cfg.perturbation.kind = value;
    else if (key == "perturbation.profile") cfg.perturbation.profile = value;
    else if (key == "perturbation.eps") cfg.perturbation.eps = std::stod(value);
    else if (key == "perturbation.eps_list")
      cfg.perturbation.eps_list = parse_double_list(value);
    else if (key == "solver.eps_schedule")
      cfg.solver.eps_schedule = parse_double_list(value);
    else if (key == "solver.eps_start_factor")
      cfg.solver.eps_start_factor = std::stod(value);
    else if (key == "solver.eps_final_factor")
      cfg.solver.eps_final_factor = std::stod(value);
    else if (key == "solver.eps_decay") cfg.solver.eps_decay = std::stod(value);
    else if (key == "solver.tol_marginal") cfg.solver.tol_marginal = std::stod(value);
    else if (key == "solver.max_iters") cfg.solver.max_iters = std::stoi(value);
    else if (key == "solver.overrelax") cfg.solver.overrelax = std::stod(value);
    else if (key == "solver.cut_guard") cfg.solver.cut_guard = std::stod(value);
    else if (key == "solver.seed") cfg.solver.seed = std::stoull(value);
    else if (key == "mtw.samples") cfg.mtw.samples = std::stoi(value);
    else if (key == "mtw.cut_margin") cfg.mtw.cut_margin = std::stod(value);
    else throw ValidationError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ValidationError("bad value for config key " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ValidationError("out-of-range value for config key " + key + ": " + value);
  }
}

void write_config_echo(JsonWriter& w, const ExperimentConfig& cfg) {
  w.begin_object();
  w.field("n", cfg.n);
  w.field("N", cfg.N);
  w.field("scheme", to_string(cfg.scheme));
  w.field("seed", cfg.seed);
  w.field("k_neighbors", cfg.k_neighbors);
  w.field("rho", cfg.rho);
  w.field("alpha", cfg.alpha);
  w.field("alpha_prime", cfg.alpha_prime);
  w.key("perturbation").begin_object();
  w.field("kind", cfg.perturbation.kind);
  w.field("profile", cfg.perturbation.profile);
  w.field("eps", cfg.perturbation.eps);
  w.key("eps_list").begin_array();
  for (double e : cfg.perturbation.eps_list) w.value(e);
  w.end_array();
  w.end_object();
  w.key("solver").begin_object();
  w.key("eps_schedule").begin_array();
  for (double e : cfg.solver.eps_schedule) w.value(e);
  w.end_array();
  w.field("eps_start_factor", cfg.solver.eps_start_factor);
  w.field("eps_final_factor", cfg.solver.eps_final_factor);
  w.field("eps_decay", cfg.solver.eps_decay);
  w.field("tol_marginal", cfg.solver.tol_marginal);
  w.field("max_iters", cfg.solver.max_iters);
  w.field("overrelax", cfg.solver.overrelax);
  w.field("cut_guard", cfg.solver.cut_guard);
  w.field("seed", cfg.solver.seed);
  w.end_object();
  w.key("mtw").begin_object();
  w.field("samples", cfg.mtw.samples);
  w.field("cut_margin", cfg.mtw.cut_margin);
  w.end_object();
  w.field("threads", cfg.threads);
  w.end_object();
}

ScalarProfile profile_by_id(const std::string& id, int n) {
  // "x3" is the third ambient coordinate; on the circle (n = 1) the second
  // one plays its role
  const int axis = std::min(2, n);
  if (id == "p1")
    return [axis](const SpherePoint& p) {
      const double z = p.coords()(axis);
      return z * z - 1.0 / 3.0;
    };
  if (id == "p2")
    return [axis](const SpherePoint& p) { return p.coords()(axis); };
  if (id == "p3")
    return [](const SpherePoint& p) { return p.coords()(0) * p.coords()(1); };
  throw ValidationError("unknown perturbation profile: " + id);
}

Vec profile_values_zero_mean(const std::string& id, const NodeSet& nodes) {
  const auto phi = profile_by_id(id, nodes.n);
  Vec vals(nodes.size());
  for (int i = 0; i < nodes.size(); ++i) vals(i) = phi(nodes.points[i]);
  const double mean = nodes.weights.dot(vals) / nodes.total_weight();
  return vals.array() - mean;
}

}  // namespace sphereot
