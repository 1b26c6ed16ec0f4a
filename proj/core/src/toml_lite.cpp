#include "le2/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "le2/types.hpp"

namespace le2 {
namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line;
  const std::string& origin;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
  bool done() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  void skip_ws() {
    while (!done() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
};

nlohmann::json parse_value(Cursor& c);

std::string parse_basic_string(Cursor& c) {
  // opening quote consumed by caller peeking; consume it here
  ++c.i;
  std::string out;
  while (true) {
    if (c.done()) c.fail("unterminated string");
    char ch = c.s[c.i++];
    if (ch == '"') break;
    if (ch == '\\') {
      if (c.done()) c.fail("dangling escape");
      char e = c.s[c.i++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: c.fail(std::string("unsupported escape \\") + e);
      }
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

nlohmann::json parse_array(Cursor& c) {
  ++c.i;  // '['
  nlohmann::json arr = nlohmann::json::array();
  c.skip_ws();
  if (!c.done() && c.peek() == ']') {
    ++c.i;
    return arr;
  }
  while (true) {
    c.skip_ws();
    arr.push_back(parse_value(c));
    c.skip_ws();
    if (c.done()) c.fail("unterminated array");
    char ch = c.s[c.i++];
    if (ch == ']') break;
    if (ch != ',') c.fail("expected ',' or ']' in array");
  }
  return arr;
}

nlohmann::json parse_scalar(Cursor& c) {
  std::size_t start = c.i;
  while (!c.done() && c.peek() != ',' && c.peek() != ']' && c.peek() != '#') ++c.i;
  std::string tok = c.s.substr(start, c.i - start);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
  if (tok.empty()) c.fail("empty value");
  if (tok == "true") return true;
  if (tok == "false") return false;

  bool integral = true;
  for (std::size_t k = 0; k < tok.size(); ++k) {
    char ch = tok[k];
    if (std::isdigit(static_cast<unsigned char>(ch))) continue;
    if ((ch == '+' || ch == '-') && k == 0) continue;
    if (ch == '_') continue;
    integral = false;
    break;
  }
  std::string digits;
  for (char ch : tok)
    if (ch != '_') digits.push_back(ch);
  try {
    if (integral) return static_cast<int64_t>(std::stoll(digits));
    std::size_t used = 0;
    double d = std::stod(digits, &used);
    if (used != digits.size()) c.fail("malformed value '" + tok + "'");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    c.fail("malformed value '" + tok + "'");
  }
}

nlohmann::json parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) c.fail("missing value");
  char ch = c.peek();
  if (ch == '"') return parse_basic_string(c);
  if (ch == '[') return parse_array(c);
  return parse_scalar(c);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (ch == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (ch == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char ch : k)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') return false;
  return true;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text, const std::string& origin) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name))
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad section name '" + name +
                          "'");
      section = &root[name];
      if (section->is_null()) *section = nlohmann::json::object();
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (!valid_key(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad key '" + key + "'");
    std::string value_text = trim(line.substr(eq + 1));

    Cursor c{value_text, 0, line_no, origin};
    nlohmann::json value = parse_value(c);
    c.skip_ws();
    if (!c.done()) c.fail("trailing characters after value");
    if (section->contains(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    (*section)[key] = std::move(value);
  }
  return root;
}

nlohmann::json parse_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open file: " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return parse_toml(body.str(), path.string());
}

}  // namespace le2
