#include "condrel/sampler.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace condrel {

namespace {

constexpr std::uint64_t kWeyl = 0x9e3779b97f4a7c15ull;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed) ^ mix64(mix64(stream) + kWeyl)) {}

std::uint64_t CounterRng::next_u64() { return mix64(key_ + (++counter_) * kWeyl); }

double CounterRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Spectrum sample_spectrum_exact(SamplerState& state) {
  const SuffixTable& st = *state.table;
  const std::int64_t n = st.n();
  if (st.log_prob(1, n) == -std::numeric_limits<double>::infinity())
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  Spectrum out;
  std::int64_t t = n;
  for (std::int64_t j = 1; j <= n && t > 0; ++j) {
    const double ld = st.log_prob(j, t);
    if (ld == -std::numeric_limits<double>::infinity())
      fail(Errc::internal, "suffix table has no mass on a reachable state");
    const Pmf& z = st.species(j);
    const double u = state.rng.next_unit();
    double cum = 0.0;
    std::int64_t chosen = -1;
    std::int64_t last_positive = -1;
    for (std::int64_t y = 0; y * j <= t; ++y) {
      const double py = z.at(y);
      if (py == 0.0) continue;
      const double lw = std::log(py) + st.log_prob(j + 1, t - j * y) - ld;
      if (lw == -std::numeric_limits<double>::infinity()) continue;
      cum += std::exp(lw);
      last_positive = y;
      if (u < cum) {
        chosen = y;
        break;
      }
    }
    if (chosen < 0) chosen = last_positive;  // u fell into round-off slack
    if (chosen < 0) fail(Errc::internal, "no admissible count at a reachable state");
    if (chosen > 0) {
      out.emplace_back(j, chosen);
      t -= j * chosen;
    }
  }
  if (t != 0) fail(Errc::internal, "sequential sampler failed to exhaust the weight");
  return out;
}

namespace {

std::int64_t draw_from_pmf(const Pmf& law, double u) {
  double cum = 0.0;
  for (std::int64_t y = law.offset(); y <= law.max_support(); ++y) {
    cum += law.at(y);
    if (u < cum) return y;
  }
  return law.max_support() + 1;  // tail mass; weight check rejects naturally
}

}  // namespace

RejectionResult sample_spectrum_rejection(const ModelSpec& spec, std::int64_t n,
                                          CounterRng& rng, std::int64_t max_tries) {
  if (n < 1) fail(Errc::domain, "rejection sampler needs n >= 1");
  if (max_tries < 1) fail(Errc::domain, "max_tries must be >= 1");
  std::vector<Pmf> species;
  for (std::int64_t j = 1; j <= n; ++j) species.push_back(spec.species_pmf(j));
  RejectionResult res;
  for (std::int64_t attempt = 1; attempt <= max_tries; ++attempt) {
    res.tries = attempt;
    Spectrum cand;
    std::int64_t w = 0;
    for (std::int64_t j = 1; j <= n && w <= n; ++j) {
      const std::int64_t y = draw_from_pmf(species[static_cast<std::size_t>(j) - 1],
                                           rng.next_unit());
      if (y > 0) {
        cand.emplace_back(j, y);
        w += j * y;
      }
    }
    if (w == n) {
      res.accepted = true;
      res.spectrum = std::move(cand);
      return res;
    }
  }
  return res;
}

double empirical_tv(const std::vector<Spectrum>& samples, const SpectrumLaw& law) {
  if (samples.empty()) fail(Errc::domain, "empirical_tv needs at least one sample");
  std::map<Spectrum, double> emp;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const Spectrum& s : samples) emp[s] += w;
  double sum = 0.0;
  auto ie = emp.begin();
  auto il = law.entries.begin();
  while (ie != emp.end() || il != law.entries.end()) {
    if (il == law.entries.end() || (ie != emp.end() && ie->first < il->first)) {
      sum += ie->second;
      ++ie;
    } else if (ie == emp.end() || il->first < ie->first) {
      sum += il->second;
      ++il;
    } else {
      sum += std::abs(ie->second - il->second);
      ++ie;
      ++il;
    }
  }
  return 0.5 * sum;
}

}  // namespace condrel
