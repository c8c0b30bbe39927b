#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace nldp {

// Counter-based pseudo-random generator. Every stream is a pure function of
// (key, counter), so any draw can be reproduced without replaying the ones
// before it, and substreams derived by name or index are independent of how
// many values their siblings consumed. This is what makes parallel data
// generation and encoding reproducible: each example / user / trial owns a
// substream keyed by its index.
//
// The mixer is two rounds of the splitmix64 finalizer; statistical quality is
// validated in the test suite (moments, cross-correlation). Not cryptographic.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  static RngStream root(std::uint64_t seed) { return RngStream(prf(0x6c1d3a5b9e0f7124ULL, seed)); }

  // Named substream, e.g. root.sub("data"). Derivation is salted so child
  // keys never collide with this stream's own draw sequence.
  RngStream sub(std::string_view name) const {
    return RngStream(prf(key_ ^ kChildSalt, fnv1a(name)));
  }

  RngStream sub(std::uint64_t index) const {
    return RngStream(prf(key_ ^ kChildSalt, index + 0x9e2fULL));
  }

  std::uint64_t next_u64() { return prf(key_, counter_++); }

  // Uniform on the open interval (0, 1); never returns an exact endpoint, so
  // it is safe to feed into log().
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch). Two uniforms per draw,
  // no cached state, so draw k depends only on (key, 2k), (key, 2k+1).
  double next_gaussian() {
    double u1 = next_uniform();
    double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> gaussian_vector(std::size_t n, double stddev = 1.0) {
    std::vector<double> v(n);
    for (auto& c : v) c = stddev * next_gaussian();
    return v;
  }

  // Fisher-Yates shuffle of indices 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = next_u64() % i;
      std::swap(idx[i - 1], idx[j]);
    }
    return idx;
  }

 private:
  static constexpr std::uint64_t kChildSalt = 0xa02bdbf7bb3c0a7ULL;

  static std::uint64_t prf(std::uint64_t key, std::uint64_t n) {
    std::uint64_t z = key + n * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    z += key ^ 0xd1b54a32d192ed03ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nldp
