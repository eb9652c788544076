#pragma once

#include <cstdint>
#include <vector>

#include "condrel/engine.hpp"

namespace condrel {

// Counter-based generator: output i is a fixed 64-bit mix of (key, i), so a
// sequence is fully determined by (seed, stream) and independent of
// scheduling.  The mix is the splitmix64 finalizer over a Weyl sequence.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);
  std::uint64_t next_u64();
  double next_unit();  // uniform on [0, 1), 53 bits

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Single-owner sampling state bound to a suffix table.
struct SamplerState {
  const SuffixTable* table;
  CounterRng rng;
  SamplerState(const SuffixTable& t, std::uint64_t seed, std::uint64_t stream = 0)
      : table(&t), rng(seed, stream) {}
};

// Sequential conditioned-sum sampler: exact draw from the conditional
// spectrum law via suffix-table ratios.
Spectrum sample_spectrum_exact(SamplerState& state);

struct RejectionResult {
  bool accepted = false;
  Spectrum spectrum;   // valid iff accepted
  std::int64_t tries = 0;  // attempts consumed; == max_tries on exhaustion
};

// Draw independent (Z_1..Z_n) until the weighted sum hits n; the try count
// is an unbiased estimate of 1/P[T_{0n} = n].
RejectionResult sample_spectrum_rejection(const ModelSpec& spec, std::int64_t n,
                                          CounterRng& rng, std::int64_t max_tries);

double empirical_tv(const std::vector<Spectrum>& samples, const SpectrumLaw& law);

}  // namespace condrel
