#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "json.hpp"

namespace le2 {

// Append-only run telemetry: a generic CSV stream
// (episode,metric,scope,goal_id,aux_id,value) plus a JSONL event log. Rows are
// formatted with fixed printf conversions so identical runs produce identical
// bytes.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& csv_path, const std::filesystem::path& events_path,
                bool append = false);

  // scope: "goal", "macro", "pooled", or "run"; goal_id / aux_id < 0 print empty
  void metric(int64_t episode, std::string_view name, std::string_view scope, int goal_id,
              int aux_id, double value);
  void event(const nlohmann::json& payload);
  void flush();

  static std::string format_value(double v);

 private:
  std::ofstream csv_;
  std::ofstream events_;
};

}  // namespace le2
