#include "spad/rng.hpp"

namespace spad {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::string_view stream_name)
    : key_(splitmix64(splitmix64(seed) ^ fnv1a(stream_name))) {}

std::uint64_t Rng::next_u64() { return splitmix64(key_ + kGolden * counter_++); }

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

bool Rng::bernoulli(double p) { return next_double() < p; }

std::uint64_t Rng::next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

Rng Rng::derive(std::string_view name, std::uint64_t index) const {
  return Rng(splitmix64(key_ ^ fnv1a(name) ^ splitmix64(index)));
}

}  // namespace spad
