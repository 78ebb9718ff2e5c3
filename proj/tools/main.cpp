#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "sphereot/experiments.hpp"

namespace fs = std::filesystem;
using namespace sphereot;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (JSON)");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
  cmd->add_option("--set", args.overrides, "config override key=value")
      ->take_all();
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty())
    cfg = config_from_json_text(read_text_file(args.config_path));
  for (const auto& kv : args.overrides) {
    const auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw ValidationError("--set expects key=value, got: " + kv);
    apply_override(cfg, kv.substr(0, pos), kv.substr(pos + 1));
  }
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.threads >= 0) cfg.threads = args.threads;
  return cfg;
}

fs::path out_file(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

void run_nodes_cmd(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto res = run_nodes(cfg);
  write_text_file(out_file(cfg, "nodes.json"), res.nodes_json());
  write_text_file(out_file(cfg, "timings.json"), res.times.json());
  std::cout << "N=" << res.nodes->size() << " h=" << format_double(res.nodes->h)
            << " sum_weights=" << format_double(res.nodes->total_weight()) << "\n";
}

void run_contraction_cmd(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto res = run_contraction(cfg);
  write_text_file(out_file(cfg, "report.json"), res.report_json());
  write_text_file(out_file(cfg, "map.json"), map_to_json(res.solve.map));
  write_text_file(out_file(cfg, "map.csv"), map_to_csv(res.solve.map));
  write_text_file(out_file(cfg, "potentials.json"),
                  potentials_to_json(res.solve.potentials));
  write_text_file(out_file(cfg, "timings.json"), res.times.json());
  std::cout << "CONTRACTION: " << (res.verdict() ? "yes" : "no")
            << " (sup op norm = " << format_double(res.lipschitz.sup_op) << ")\n";
}

void run_stability_cmd(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto res = run_stability(cfg);
  write_text_file(out_file(cfg, "report.json"), res.report_json());
  write_text_file(out_file(cfg, "curve.csv"), res.curve_csv());
  for (std::size_t k = 0; k < res.maps.size(); ++k)
    write_text_file(out_file(cfg, "map_" + std::to_string(k) + ".json"),
                    map_to_json(res.maps[k]));
  write_text_file(out_file(cfg, "timings.json"), res.times.json());
  for (const auto& row : res.rows)
    std::cout << "eps=" << format_double(row.eps)
              << " combined=" << format_double(row.dist.combined) << "\n";
}

void run_mtw_cmd(const CommonArgs& args) {
  const auto cfg = resolve_config(args);
  const auto res = run_mtw(cfg);
  write_text_file(out_file(cfg, "report.json"), res.report_json());
  write_text_file(out_file(cfg, "mtw.json"), mtw_report_to_json(res.report));
  write_text_file(out_file(cfg, "timings.json"), res.times.json());
  std::cout << "theta_obs=" << format_double(res.report.theta_obs) << "\n";
}

void run_compare_cmd(const CommonArgs& args, const std::string& file_a,
                     const std::string& file_b) {
  const auto cfg = resolve_config(args);
  const auto res =
      run_compare(cfg, read_text_file(file_a), read_text_file(file_b));
  write_text_file(out_file(cfg, "report.json"), res.report_json());
  write_text_file(out_file(cfg, "timings.json"), res.times.json());
  std::cout << "combined=" << format_double(res.dist.combined) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal transport maps and contraction checks on the round sphere"};
  app.require_subcommand(1);

  CommonArgs nodes_args, contraction_args, stability_args, mtw_args, compare_args;
  std::string map_a, map_b;

  auto* nodes_cmd = app.add_subcommand("nodes", "generate quadrature nodes");
  add_common(nodes_cmd, nodes_args);
  auto* contraction_cmd =
      app.add_subcommand("contraction", "uniform -> nearly-round volume measure");
  add_common(contraction_cmd, contraction_args);
  auto* stability_cmd =
      app.add_subcommand("stability", "map distance to identity across an eps sweep");
  add_common(stability_cmd, stability_args);
  auto* mtw_cmd = app.add_subcommand("mtw", "cost curvature positivity scan");
  add_common(mtw_cmd, mtw_args);
  auto* compare_cmd = app.add_subcommand("compare", "distance between two maps");
  compare_cmd->add_option("map_a", map_a, "first map.json")->required();
  compare_cmd->add_option("map_b", map_b, "second map.json")->required();
  add_common(compare_cmd, compare_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (nodes_cmd->parsed()) run_nodes_cmd(nodes_args);
    if (contraction_cmd->parsed()) run_contraction_cmd(contraction_args);
    if (stability_cmd->parsed()) run_stability_cmd(stability_args);
    if (mtw_cmd->parsed()) run_mtw_cmd(mtw_args);
    if (compare_cmd->parsed()) run_compare_cmd(compare_args, map_a, map_b);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
