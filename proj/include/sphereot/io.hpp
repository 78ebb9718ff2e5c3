#pragma once

#include <filesystem>
#include <string>

#include "sphereot/analysis.hpp"
#include "sphereot/mtw.hpp"

namespace sphereot {

// Minimal JSON writer with a fixed key order and %.17g floats so that equal
// inputs serialize byte-identically.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(long long v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& value(const Vec& v);
  JsonWriter& value(const Mat& row_major_rows);

  template <typename T>
  JsonWriter& field(const std::string& name, const T& v) {
    key(name);
    return value(v);
  }

  std::string str() const { return out_; }

 private:
  void separator();
  std::string out_;
  std::vector<bool> needs_comma_;
};

std::string format_double(double v);  // %.17g

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// nodes.json: {"n","N","scheme","seed","points","weights"}
std::string nodes_to_json(const NodeSet& nodes);
NodeSet nodes_from_json(const std::string& text, int k_neighbors);

// density values ride the same schema plus "values" and "alpha"
std::string density_to_json(const NodeSet& nodes, const DensityField& f);

// map.json: {"n","N","provenance","source":{nodes schema},"images"}
std::string map_to_json(const DiscreteMap& map);
DiscreteMap map_from_json(const std::string& text, int k_neighbors);

std::string plan_to_json(const TransportPlan& plan);
std::string potentials_to_json(const Potentials& pot);

std::string mtw_report_to_json(const MTWReport& rep);

// CSV with a header row, ',' delimiter and '.' decimals
std::string map_to_csv(const DiscreteMap& map);

}  // namespace sphereot
