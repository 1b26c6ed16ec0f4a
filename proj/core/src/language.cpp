#include "le2/language.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace le2 {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::size_t a = i, b = j;
      while (a < b && std::ispunct(static_cast<unsigned char>(text[a]))) ++a;
      while (b > a && std::ispunct(static_cast<unsigned char>(text[b - 1]))) --b;
      if (b > a) {
        std::string tok;
        tok.reserve(b - a);
        for (std::size_t k = a; k < b; ++k)
          tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
        tokens.push_back(std::move(tok));
      }
    }
    i = j;
  }
  return tokens;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw LanguageError("embeddings: cannot open file: " + path.string());

  EmbeddingTable t;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty()) continue;
    std::vector<double> vec;
    double v;
    while (ls >> v) vec.push_back(v);
    if (!ls.eof())
      throw LanguageError("embeddings: non-numeric value at line " + std::to_string(line_no) +
                          " of " + path.string());
    if (t.dim_ == 0) {
      if (vec.empty())
        throw LanguageError("embeddings: no values on line " + std::to_string(line_no) + " of " +
                            path.string());
      t.dim_ = static_cast<int>(vec.size());
    } else if (static_cast<int>(vec.size()) != t.dim_) {
      throw LanguageError("embeddings: expected " + std::to_string(t.dim_) + " values but got " +
                          std::to_string(vec.size()) + " at line " + std::to_string(line_no) +
                          " of " + path.string());
    }
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = t.table_.find(word);
    if (it != t.table_.end()) {
      it->second = std::move(vec);  // last occurrence wins
      t.warnings_.push_back("duplicate word '" + word + "' at line " + std::to_string(line_no));
    } else {
      t.table_.emplace(std::move(word), std::move(vec));
    }
  }
  if (t.table_.empty()) throw LanguageError("embeddings: empty table: " + path.string());
  return t;
}

const std::vector<double>* EmbeddingTable::find(std::string_view lowercase_word) const {
  auto it = table_.find(std::string(lowercase_word));
  return it == table_.end() ? nullptr : &it->second;
}

std::vector<double> GoalEncoder::encode(const std::string& description) const {
  std::vector<std::string> tokens = tokenize(description);
  std::vector<double> sum(static_cast<std::size_t>(table_.dim()), 0.0);
  int hits = 0;
  for (const std::string& tok : tokens) {
    const std::vector<double>* vec = table_.find(tok);
    if (!vec) continue;  // out-of-vocabulary tokens are skipped
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*vec)[i];
    ++hits;
  }
  if (hits == 0)
    throw LanguageError("encode: no in-vocabulary token in description: \"" + description + "\"");
  for (double& v : sum) v /= hits;
  return sum;
}

int GoalRegistry::register_description(const std::string& description, int64_t episode) {
  auto it = by_description_.find(description);
  if (it != by_description_.end()) return it->second;
  GoalRecord rec;
  rec.goal_id = static_cast<int>(records_.size());
  rec.description = description;
  rec.encoding = encoder_->encode(description);
  rec.discovery_episode = episode;
  by_description_.emplace(description, rec.goal_id);
  records_.push_back(std::move(rec));
  return records_.back().goal_id;
}

std::optional<int> GoalRegistry::find(const std::string& description) const {
  auto it = by_description_.find(description);
  if (it == by_description_.end()) return std::nullopt;
  return it->second;
}

std::string GoalRegistry::to_json_string() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const GoalRecord& r : records_)
    arr.push_back({{"goal_id", r.goal_id},
                   {"description", r.description},
                   {"discovery_episode", r.discovery_episode}});
  return arr.dump();
}

GoalRegistry GoalRegistry::from_json_string(const std::string& text, const GoalEncoder* encoder) {
  GoalRegistry reg(encoder);
  nlohmann::json arr = nlohmann::json::parse(text);
  for (const auto& item : arr) {
    int id = reg.register_description(item.at("description").get<std::string>(),
                                      item.at("discovery_episode").get<int64_t>());
    if (id != item.at("goal_id").get<int>())
      throw LanguageError("registry: non-contiguous goal ids in checkpoint");
  }
  return reg;
}

}  // namespace le2
