#include "blpcs/keyrand.hpp"

#include "blpcs/permutation.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace blpcs {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RandStream::RandStream(KeySeed seed, std::string_view label)
    : state_(mix64(seed.value ^ mix64(fnv1a64(label)))), label_(label) {}

std::uint64_t RandStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RandStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - next_uniform();  // (0, 1]
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t RandStream::next_below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Accept only draws below the largest multiple of bound.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v > limit);
  return v % bound;
}

RandStream derive_stream(KeySeed seed, std::string_view label) { return RandStream(seed, label); }

Permutation random_permutation(RandStream& stream, std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(m[i - 1], m[j]);
  }
  return Permutation(std::move(m));
}

}  // namespace blpcs
