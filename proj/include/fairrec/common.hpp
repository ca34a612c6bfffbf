#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace fairrec {

// Splitmix64: the PRNG behind every seeded shuffle/subsample in this
// project. Chosen because the sequence is fully specified by the
// algorithm (no libc/libstdc++ dependence), so splits reproduce across
// platforms.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Modulo bias is below 2^-40 for any bound we use.
  uint64_t below(uint64_t bound) { return next() % bound; }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
  uint64_t state_;
};

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace fairrec
