#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace le2 {

// One named random stream. All sampling in the project goes through this class
// so that sequences are reproducible and checkpointable: the raw bit source is
// std::mt19937_64, but every derived quantity (uniform doubles, gaussians,
// bounded ints) is computed here with fixed arithmetic rather than the standard
// library distributions, whose draw counts are implementation defined.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(uint64_t seed);

  uint64_t next_u64();
  double uniform();                      // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);  // [lo, hi)
  double gaussian();                     // N(0,1), Box-Muller, stateless (2 draws each)
  int uniform_int(int n);                // [0, n), n >= 1

  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 gen_;
};

// Fans a master seed out to named per-module streams. Streams with distinct
// names are decorrelated; the mapping is stable across versions so that module
// changes do not perturb unrelated streams.
uint64_t derive_seed(uint64_t master_seed, std::string_view stream_name);
uint64_t derive_seed(uint64_t master_seed, std::string_view stream_name, uint64_t index);

}  // namespace le2
