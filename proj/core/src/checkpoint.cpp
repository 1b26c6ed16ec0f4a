#include "le2/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

namespace le2 {
namespace {

void put_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint64_t get_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

BlobWriter::BlobWriter(const std::filesystem::path& path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("checkpoint: cannot open for write: " + path.string());
  out_.write(kCheckpointMagic, sizeof(kCheckpointMagic));
}

void BlobWriter::write_header(const nlohmann::json& header) {
  if (header_written_) throw std::logic_error("checkpoint: header already written");
  std::string text = header.dump();
  put_u64(out_, text.size());
  out_.write(text.data(), static_cast<std::streamsize>(text.size()));
  header_written_ = true;
}

void BlobWriter::write_section(const std::string& name, uint8_t dtype, const void* data,
                               uint64_t count, std::size_t elem_size) {
  if (!header_written_) throw std::logic_error("checkpoint: header must come first");
  uint32_t name_len = static_cast<uint32_t>(name.size());
  out_.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
  out_.write(name.data(), name_len);
  out_.write(reinterpret_cast<const char*>(&dtype), 1);
  put_u64(out_, count);
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(count * elem_size));
}

void BlobWriter::write_f64(const std::string& name, std::span<const double> data) {
  write_section(name, 0, data.data(), data.size(), sizeof(double));
}

void BlobWriter::write_i64(const std::string& name, std::span<const int64_t> data) {
  write_section(name, 1, data.data(), data.size(), sizeof(int64_t));
}

void BlobWriter::close() {
  out_.flush();
  if (!out_) throw std::runtime_error("checkpoint: write failed");
  out_.close();
}

BlobReader::BlobReader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  uint64_t header_len = get_u64(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path.string());
  header_ = nlohmann::json::parse(text);

  while (true) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.eof()) break;
    if (!in) throw std::runtime_error("checkpoint: truncated section header");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint8_t dtype = 0;
    in.read(reinterpret_cast<char*>(&dtype), 1);
    uint64_t count = get_u64(in);
    std::size_t elem = dtype == 0 ? sizeof(double) : sizeof(int64_t);
    Section s;
    s.dtype = dtype;
    s.bytes.resize(count * elem);
    in.read(s.bytes.data(), static_cast<std::streamsize>(s.bytes.size()));
    if (!in) throw std::runtime_error("checkpoint: truncated section '" + name + "'");
    sections_.emplace(std::move(name), std::move(s));
  }
}

bool BlobReader::has(const std::string& name) const { return sections_.count(name) > 0; }

std::vector<double> BlobReader::f64(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.dtype != 0)
    throw std::runtime_error("checkpoint: missing f64 section '" + name + "'");
  std::vector<double> out(it->second.bytes.size() / sizeof(double));
  std::memcpy(out.data(), it->second.bytes.data(), it->second.bytes.size());
  return out;
}

std::vector<int64_t> BlobReader::i64(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end() || it->second.dtype != 1)
    throw std::runtime_error("checkpoint: missing i64 section '" + name + "'");
  std::vector<int64_t> out(it->second.bytes.size() / sizeof(int64_t));
  std::memcpy(out.data(), it->second.bytes.data(), it->second.bytes.size());
  return out;
}

}  // namespace le2
