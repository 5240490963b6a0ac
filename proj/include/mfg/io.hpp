#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mfg/kernel.hpp"
#include "mfg/spin_space.hpp"

namespace mfg {

// Shortest round-trip decimal representation (std::to_chars); used for
// every CSV number so repeated runs are byte-identical.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);

// Rows of already-formatted cells; terminates with the config-hash
// metadata comment line.
class CsvBuilder {
 public:
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);
  std::string finish(std::uint64_t config_hash) const;

 private:
  std::string body_;
};

nlohmann::json space_to_json(const SpinSpace& space);
nlohmann::json measure_to_json(const Measure& measure);

// One row per node: node_index, coordinate..., weight.
std::string measure_to_csv(const Measure& measure, std::uint64_t config_hash);

// Dense matrix with a header row of eta labels.
std::string kernel_to_csv(const Kernel& kernel, std::uint64_t config_hash);

// Partition file: CSV lines node_index,label.
std::vector<int> read_partition_csv(const std::string& path, int n_nodes);

}  // namespace mfg
