#pragma once

#include <cstdint>
#include <string_view>

namespace spad {

// Counter-based pseudo-random stream. Every draw is a pure function of
// (seed, stream name, counter), so any number of named streams can be derived
// from one run seed without coupling their draw order. No global state.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream_name);

  std::uint64_t next_u64();
  double next_double();  // uniform in [0, 1)
  double uniform(double lo, double hi);
  bool bernoulli(double p);  // true with probability p
  std::uint64_t next_below(std::uint64_t n);  // uniform in [0, n)

  // Child stream keyed off this stream's identity plus a name and index.
  Rng derive(std::string_view name, std::uint64_t index) const;

 private:
  Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spad
