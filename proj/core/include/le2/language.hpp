#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "le2/types.hpp"

namespace le2 {

struct LanguageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// lowercase, whitespace split, leading/trailing punctuation stripped
std::vector<std::string> tokenize(std::string_view text);

// Word -> vector table in GLOVE text format ("word v1 ... vD" per line).
// Keys are stored lowercase; the dimension is inferred from the first line.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path);

  int dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }
  const std::vector<double>* find(std::string_view lowercase_word) const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
  std::vector<std::string> warnings_;
};

// Averages the embeddings of a description's in-vocabulary tokens. A
// description with zero in-vocabulary tokens is an error: a silent zero vector
// would collide distinct goals.
class GoalEncoder {
 public:
  explicit GoalEncoder(EmbeddingTable table) : table_(std::move(table)) {}

  int dim() const { return table_.dim(); }
  const EmbeddingTable& table() const { return table_; }
  std::vector<double> encode(const std::string& description) const;

 private:
  EmbeddingTable table_;
};

struct GoalRecord {
  int goal_id = 0;
  std::string description;
  std::vector<double> encoding;
  int64_t discovery_episode = 0;
};

// Discovered-goal registry: dense ids in discovery order, idempotent insertion.
class GoalRegistry {
 public:
  explicit GoalRegistry(const GoalEncoder* encoder) : encoder_(encoder) {}

  // Returns the existing id if the description was seen before; otherwise
  // encodes it and appends a record with the next id.
  int register_description(const std::string& description, int64_t episode);

  std::optional<int> find(const std::string& description) const;
  int size() const { return static_cast<int>(records_.size()); }
  const GoalRecord& record(int goal_id) const { return records_.at(goal_id); }
  const std::vector<GoalRecord>& records() const { return records_; }

  // Checkpoint form: [{goal_id, description, discovery_episode}]; encodings are
  // recomputed on load.
  std::string to_json_string() const;
  static GoalRegistry from_json_string(const std::string& text, const GoalEncoder* encoder);

 private:
  const GoalEncoder* encoder_;
  std::vector<GoalRecord> records_;
  std::unordered_map<std::string, int> by_description_;
};

}  // namespace le2
