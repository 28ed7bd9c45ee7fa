#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace blpcs {

class Permutation;

struct KeySeed {
  std::uint64_t value = 0;
  friend bool operator==(const KeySeed&, const KeySeed&) = default;
};

/// Sequential random stream derived from a (seed, label) pair.
///
/// The generator is SplitMix64: the 64-bit state advances by the golden-ratio
/// increment 0x9E3779B97F4A7C15 and each output is the state passed through
/// the MurmurHash3/Stafford "variant 13" finalizer. The initial state is
///
///     state0 = mix64(seed ^ mix64(fnv1a64(label)))
///
/// where fnv1a64 is the 64-bit FNV-1a hash of the label bytes and mix64 is
/// the same finalizer. Every derived object in the library is therefore a
/// pure function of (seed, label, parameters) and can be reproduced from any
/// language that implements these three functions.
///
/// A stream must not be shared between threads; derive one per task instead.
class RandStream {
 public:
  RandStream(KeySeed seed, std::string_view label);

  std::uint64_t next_u64();
  /// 53-bit uniform in [0, 1).
  double next_uniform();
  /// Standard normal via Box-Muller on consecutive uniform pairs. The second
  /// variate of each pair is cached, so two normals consume two uniforms.
  double next_gaussian();
  /// Unbiased integer in [0, bound) by rejection on the top of the range.
  std::uint64_t next_below(std::uint64_t bound);

  const std::string& label() const { return label_; }

 private:
  std::uint64_t state_;
  std::string label_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t fnv1a64(std::string_view bytes);

RandStream derive_stream(KeySeed seed, std::string_view label);

/// Fisher-Yates shuffle of {0..n-1}, drawing from the back.
Permutation random_permutation(RandStream& stream, std::size_t n);

}  // namespace blpcs
