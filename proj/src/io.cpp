#include "mfg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void CsvBuilder::header(const std::vector<std::string>& cols) {
  for (size_t i = 0; i < cols.size(); ++i) {
    if (i) body_ += ',';
    body_ += cols[i];
  }
  body_ += '\n';
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

std::string CsvBuilder::finish(std::uint64_t config_hash) const {
  std::ostringstream hex;
  hex << std::hex << config_hash;
  return body_ + "# config_hash=" + hex.str() + "\n";
}

nlohmann::json space_to_json(const SpinSpace& space) {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 0; i < space.size(); ++i) {
    nlohmann::json coord = nlohmann::json::array();
    for (int d = 0; d < space.dim(); ++d) coord.push_back(space.nodes(i, d));
    nodes.push_back(coord);
  }
  nlohmann::json j{{"label", space.label},
                   {"nodes", nodes},
                   {"weights", std::vector<double>(
                                   space.weights.data(),
                                   space.weights.data() + space.size())},
                   {"metric", space.metric_kind}};
  if (space.metric_kind != "chordal") {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < space.size(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < space.size(); ++k) row.push_back(space.dist(i, k));
      rows.push_back(row);
    }
    j["metric_matrix"] = rows;
  }
  return j;
}

nlohmann::json measure_to_json(const Measure& measure) {
  return nlohmann::json{
      {"space", measure.space ? measure.space->label : ""},
      {"weights", std::vector<double>(measure.weights.data(),
                                      measure.weights.data() + measure.size())}};
}

std::string measure_to_csv(const Measure& measure, std::uint64_t config_hash) {
  CsvBuilder csv;
  std::vector<std::string> cols{"node_index"};
  for (int d = 0; d < measure.space->dim(); ++d)
    cols.push_back("coordinate_" + std::to_string(d));
  cols.push_back("weight");
  csv.header(cols);
  for (int i = 0; i < measure.size(); ++i) {
    std::vector<std::string> cells{std::to_string(i)};
    for (int d = 0; d < measure.space->dim(); ++d)
      cells.push_back(format_double(measure.space->nodes(i, d)));
    cells.push_back(format_double(measure.weights(i)));
    csv.row(cells);
  }
  return csv.finish(config_hash);
}

std::string kernel_to_csv(const Kernel& kernel, std::uint64_t config_hash) {
  CsvBuilder csv;
  std::vector<std::string> cols{"sigma_index"};
  for (int e = 0; e < kernel.density.cols(); ++e)
    cols.push_back("eta_" + std::to_string(e));
  csv.header(cols);
  for (int s = 0; s < kernel.density.rows(); ++s) {
    std::vector<std::string> cells{std::to_string(s)};
    for (int e = 0; e < kernel.density.cols(); ++e)
      cells.push_back(format_double(kernel.density(s, e)));
    csv.row(cells);
  }
  return csv.finish(config_hash);
}

std::vector<int> read_partition_csv(const std::string& path, int n_nodes) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open partition file: " + path);
  std::map<std::string, int> class_ids;
  std::vector<int> labels(n_nodes, -1);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidParameter("partition file: expected 'node_index,label'");
    std::string idx_str = line.substr(0, comma);
    if (idx_str == "node_index") continue;  // optional header
    int idx = std::stoi(idx_str);
    if (idx < 0 || idx >= n_nodes)
      throw InvalidParameter("partition file: node index out of range");
    std::string label = line.substr(comma + 1);
    auto [it, inserted] =
        class_ids.emplace(label, static_cast<int>(class_ids.size()));
    labels[idx] = it->second;
  }
  for (int i = 0; i < n_nodes; ++i)
    if (labels[i] < 0)
      throw InvalidParameter("partition file: node " + std::to_string(i) +
                             " unassigned");
  return labels;
}

}  // namespace mfg
