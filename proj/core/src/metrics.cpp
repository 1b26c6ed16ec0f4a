#include "le2/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace le2 {

MetricsWriter::MetricsWriter(const std::filesystem::path& csv_path,
                             const std::filesystem::path& events_path, bool append) {
  auto mode = append ? std::ios::app : std::ios::trunc;
  const bool fresh_csv = !append || !std::filesystem::exists(csv_path) ||
                         std::filesystem::file_size(csv_path) == 0;
  csv_.open(csv_path, std::ios::out | mode);
  events_.open(events_path, std::ios::out | mode);
  if (!csv_ || !events_)
    throw std::runtime_error("metrics: cannot open output files in " +
                             csv_path.parent_path().string());
  if (fresh_csv) csv_ << "episode,metric,scope,goal_id,aux_id,value\n";
}

std::string MetricsWriter::format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void MetricsWriter::metric(int64_t episode, std::string_view name, std::string_view scope,
                           int goal_id, int aux_id, double value) {
  csv_ << episode << ',' << name << ',' << scope << ',';
  if (goal_id >= 0) csv_ << goal_id;
  csv_ << ',';
  if (aux_id >= 0) csv_ << aux_id;
  csv_ << ',' << format_value(value) << '\n';
}

void MetricsWriter::event(const nlohmann::json& payload) { events_ << payload.dump() << '\n'; }

void MetricsWriter::flush() {
  csv_.flush();
  events_.flush();
}

}  // namespace le2
