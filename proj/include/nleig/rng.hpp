#pragma once

#include "nleig/graph.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace nleig {

// Named, versioned stream: mt19937_64 with explicit mappings to uniform and
// normal variates so sequences are identical across standard libraries.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller.
  double normal();
  VertexField normal_field(Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nleig
