#include "sphereot/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sphereot {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void JsonWriter::separator() {
  if (!needs_comma_.empty() && needs_comma_.back()) out_ += ',';
  if (!needs_comma_.empty()) needs_comma_.back() = true;
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  needs_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  needs_comma_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ += '[';
  needs_comma_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  needs_comma_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
  separator();
  out_ += '"';
  out_ += name;
  out_ += "\":";
  if (!needs_comma_.empty()) needs_comma_.back() = false;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  separator();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      default: out_ += c;
    }
  }
  out_ += '"';
  return *this;
}

JsonWriter& JsonWriter::value(const Vec& v) {
  begin_array();
  for (int i = 0; i < v.size(); ++i) value(v(i));
  return end_array();
}

JsonWriter& JsonWriter::value(const Mat& rows) {
  begin_array();
  for (int i = 0; i < rows.rows(); ++i) {
    begin_array();
    for (int j = 0; j < rows.cols(); ++j) value(rows(i, j));
    end_array();
  }
  return end_array();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_nodes_fields(JsonWriter& w, const NodeSet& nodes) {
  w.field("n", nodes.n);
  w.field("N", nodes.size());
  w.field("scheme", to_string(nodes.scheme));
  w.field("seed", nodes.seed);
  w.key("points").begin_array();
  for (const auto& p : nodes.points) w.value(p.coords());
  w.end_array();
  w.field("weights", nodes.weights);
}

NodeSet parse_nodes(const nlohmann::json& j, int k_neighbors) {
  const int n = j.at("n").get<int>();
  const int N = j.at("N").get<int>();
  std::vector<SpherePoint> points;
  points.reserve(static_cast<std::size_t>(N));
  for (const auto& row : j.at("points")) {
    Vec p(n + 1);
    if (static_cast<int>(row.size()) != n + 1)
      throw ValidationError("nodes json: point dimension mismatch");
    for (int c = 0; c <= n; ++c) p(c) = row[static_cast<std::size_t>(c)].get<double>();
    points.emplace_back(p);
  }
  Vec weights(N);
  const auto& wj = j.at("weights");
  if (static_cast<int>(wj.size()) != N)
    throw ValidationError("nodes json: weights size mismatch");
  for (int i = 0; i < N; ++i) weights(i) = wj[static_cast<std::size_t>(i)].get<double>();
  return nodes_from_data(n, scheme_from_string(j.at("scheme").get<std::string>()),
                         j.at("seed").get<std::uint64_t>(), k_neighbors,
                         std::move(points), std::move(weights));
}

std::string provenance_to_string(DiscreteMap::Provenance p) {
  switch (p) {
    case DiscreteMap::Provenance::barycentric: return "barycentric";
    case DiscreteMap::Provenance::potential_gradient: return "potential_gradient";
    default: return "synthetic";
  }
}

DiscreteMap::Provenance provenance_from_string(const std::string& s) {
  if (s == "barycentric") return DiscreteMap::Provenance::barycentric;
  if (s == "potential_gradient") return DiscreteMap::Provenance::potential_gradient;
  if (s == "synthetic") return DiscreteMap::Provenance::synthetic;
  throw ValidationError("unknown map provenance: " + s);
}

}  // namespace

std::string nodes_to_json(const NodeSet& nodes) {
  JsonWriter w;
  w.begin_object();
  write_nodes_fields(w, nodes);
  w.end_object();
  return w.str() + "\n";
}

NodeSet nodes_from_json(const std::string& text, int k_neighbors) {
  return parse_nodes(nlohmann::json::parse(text), k_neighbors);
}

std::string density_to_json(const NodeSet& nodes, const DensityField& f) {
  JsonWriter w;
  w.begin_object();
  write_nodes_fields(w, nodes);
  w.field("values", f.values);
  w.field("alpha", f.alpha);
  w.end_object();
  return w.str() + "\n";
}

std::string map_to_json(const DiscreteMap& map) {
  JsonWriter w;
  w.begin_object();
  w.field("n", map.source->n);
  w.field("N", map.size());
  w.field("provenance", provenance_to_string(map.provenance));
  w.key("source").begin_object();
  write_nodes_fields(w, *map.source);
  w.end_object();
  w.key("images").begin_array();
  for (const auto& p : map.images) w.value(p.coords());
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

DiscreteMap map_from_json(const std::string& text, int k_neighbors) {
  const auto j = nlohmann::json::parse(text);
  DiscreteMap map;
  map.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  map.source = std::make_shared<NodeSet>(parse_nodes(j.at("source"), k_neighbors));
  const int n = map.source->n;
  for (const auto& row : j.at("images")) {
    Vec p(n + 1);
    for (int c = 0; c <= n; ++c) p(c) = row[static_cast<std::size_t>(c)].get<double>();
    map.images.emplace_back(p);
  }
  if (map.size() != map.source->size())
    throw ValidationError("map json: image count mismatch");
  return map;
}

std::string plan_to_json(const TransportPlan& plan) {
  JsonWriter w;
  w.begin_object();
  w.field("rows", static_cast<int>(plan.coupling.rows()));
  w.field("cols", static_cast<int>(plan.coupling.cols()));
  w.field("marginal_error_row", plan.marginal_error_row);
  w.field("marginal_error_col", plan.marginal_error_col);
  w.field("coupling", plan.coupling);
  w.end_object();
  return w.str() + "\n";
}

std::string potentials_to_json(const Potentials& pot) {
  JsonWriter w;
  w.begin_object();
  w.field("eps_final", pot.eps_final);
  w.field("u", pot.u);
  w.field("v", pot.v);
  w.end_object();
  return w.str() + "\n";
}

std::string mtw_report_to_json(const MTWReport& rep) {
  JsonWriter w;
  w.begin_object();
  w.field("n", rep.n);
  w.field("samples", rep.samples);
  w.field("seed", rep.seed);
  w.field("cut_margin", rep.cut_margin);
  w.field("theta_obs", rep.theta_obs);
  w.key("failures").begin_array();
  for (const auto& fail : rep.failures) {
    w.begin_object();
    w.key("query").begin_object();
    w.field("x", fail.query.x.coords());
    w.field("v0", fail.query.v0.vec());
    w.field("xi", fail.query.xi.vec());
    w.field("nu", fail.query.nu.vec());
    w.end_object();
    w.field("value", fail.value);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string map_to_csv(const DiscreteMap& map) {
  const int d = map.source->n + 1;
  std::string out = "index";
  for (int c = 0; c < d; ++c) out += ",src_" + std::to_string(c);
  for (int c = 0; c < d; ++c) out += ",img_" + std::to_string(c);
  out += ",displacement\n";
  for (int i = 0; i < map.size(); ++i) {
    out += std::to_string(i);
    for (int c = 0; c < d; ++c)
      out += "," + format_double(map.source->points[static_cast<std::size_t>(i)].coords()(c));
    for (int c = 0; c < d; ++c)
      out += "," + format_double(map.images[static_cast<std::size_t>(i)].coords()(c));
    out += "," + format_double(geodesic_distance(
                     map.source->points[static_cast<std::size_t>(i)],
                     map.images[static_cast<std::size_t>(i)]));
    out += "\n";
  }
  return out;
}

}  // namespace sphereot
