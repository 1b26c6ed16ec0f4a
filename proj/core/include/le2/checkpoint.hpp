#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace le2 {

// Checkpoint container: a JSON header for structured state followed by named
// binary sections for bulk arrays (parameters, optimizer moments, replay
// episodes, reward examples, forest nodes). Doubles are stored raw so restores
// are bit exact.
inline constexpr char kCheckpointMagic[8] = {'L', 'E', '2', 'C', 'K', 'P', 'T', '1'};
inline constexpr int kCheckpointSchemaVersion = 1;

class BlobWriter {
 public:
  explicit BlobWriter(const std::filesystem::path& path);

  void write_header(const nlohmann::json& header);  // must be called first
  void write_f64(const std::string& name, std::span<const double> data);
  void write_i64(const std::string& name, std::span<const int64_t> data);
  void close();

 private:
  void write_section(const std::string& name, uint8_t dtype, const void* data, uint64_t count,
                     std::size_t elem_size);
  std::ofstream out_;
  bool header_written_ = false;
};

class BlobReader {
 public:
  explicit BlobReader(const std::filesystem::path& path);

  const nlohmann::json& header() const { return header_; }
  bool has(const std::string& name) const;
  std::vector<double> f64(const std::string& name) const;
  std::vector<int64_t> i64(const std::string& name) const;

 private:
  struct Section {
    uint8_t dtype;
    std::vector<char> bytes;
  };
  nlohmann::json header_;
  std::map<std::string, Section> sections_;
};

}  // namespace le2
