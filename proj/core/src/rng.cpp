#include "le2/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace le2 {
namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(uint64_t seed) : gen_(splitmix64(seed)) {}

uint64_t RngStream::next_u64() { return gen_(); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::gaussian() {
  double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

int RngStream::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("RngStream::uniform_int: n must be positive");
  // Lemire multiply-shift; bias of n/2^64 is negligible and the draw count is fixed.
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n);
  return static_cast<int>(m >> 64);
}

std::string RngStream::state() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void RngStream::set_state(const std::string& s) {
  std::istringstream is(s);
  is >> gen_;
  if (!is) throw std::runtime_error("RngStream::set_state: malformed state string");
}

uint64_t derive_seed(uint64_t master_seed, std::string_view stream_name) {
  return splitmix64(splitmix64(master_seed) ^ fnv1a64(stream_name));
}

uint64_t derive_seed(uint64_t master_seed, std::string_view stream_name, uint64_t index) {
  return splitmix64(derive_seed(master_seed, stream_name) ^ splitmix64(index + 0x51ULL));
}

}  // namespace le2
