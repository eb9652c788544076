#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "condrel/model.hpp"
#include "condrel/pmf.hpp"

namespace condrel {

// Sparse component spectrum: sorted (j, y_j) pairs with y_j >= 1.
using Spectrum = std::vector<std::pair<std::int64_t, std::int64_t>>;

std::int64_t spectrum_weight(const Spectrum& s);  // sum j*y_j
std::int64_t spectrum_count(const Spectrum& s);   // sum y_j

// Probability assignment over spectra.  For exact conditional laws
// uncovered == 0 and every key has weight n; Q_n additionally carries
// off-weight spectra and truncation mass in `uncovered`.
struct SpectrumLaw {
  std::int64_t n = 0;
  std::map<Spectrum, double> entries;
  double uncovered = 0.0;
  double total() const;
};

// d[j][t] = P[sum_{i=j}^n i*Z_i = t] for 1 <= j <= n+1, 0 <= t <= n, with a
// per-column overflow bucket for mass above n.  Stored in log space so that
// heavily tilted models survive the dynamic range.
class SuffixTable {
 public:
  SuffixTable(const ModelSpec& spec, std::int64_t n);

  std::int64_t n() const { return n_; }
  const ModelSpec& spec() const { return spec_; }
  double log_prob(std::int64_t j, std::int64_t t) const;  // log d[j][t]
  double prob(std::int64_t j, std::int64_t t) const;
  double log_overflow(std::int64_t j) const;
  double column_total(std::int64_t j) const;  // window + overflow, ~1
  const Pmf& species(std::int64_t j) const;   // law of Z_j, 1 <= j <= n

 private:
  ModelSpec spec_;
  std::int64_t n_;
  std::vector<Pmf> species_;                   // [j-1]
  std::vector<std::vector<double>> log_rows_;  // [j], j = 1..n+1
  std::vector<double> log_over_;
};

inline SuffixTable suffix_table(const ModelSpec& spec, std::int64_t n) {
  return SuffixTable(spec, n);
}

// Law of T_bn = sum_{j=b+1}^n j*Z_j on [0, cap] with overflow bucket;
// cap < 0 means cap = n.
Pmf t_distribution(const ModelSpec& spec, std::int64_t b, std::int64_t n,
                   std::int64_t cap = -1);

// Exact conditional spectrum law by enumerating all partitions of n.
inline constexpr std::int64_t kBruteForceGuard = 40;
SpectrumLaw spectrum_law_bruteforce(const ModelSpec& spec, std::int64_t n);

Pmf conditional_marginal(const ModelSpec& spec, std::int64_t n, std::int64_t j);
Pmf largest_component_law(const ModelSpec& spec, std::int64_t n);   // Y_n
Pmf smallest_component_law(const ModelSpec& spec, std::int64_t n);  // K_n
// X_n = sum_j C_j; mass at counts > kmax is reported in the tail bucket.
Pmf component_count_law(const ModelSpec& spec, std::int64_t n, std::int64_t kmax);

// Marginals read off a SpectrumLaw, for oracle comparisons.
Pmf spectrum_marginal_count_of_size(const SpectrumLaw& law, std::int64_t j);
Pmf spectrum_largest_law(const SpectrumLaw& law);
Pmf spectrum_smallest_law(const SpectrumLaw& law);
Pmf spectrum_count_law(const SpectrumLaw& law);

struct LimitLaws {
  Pmf t0_inf;        // law of sum_{j>=1} j*Z_j, truncated mass in tail bucket
  Pmf count_limit;   // law of 1 + sum_{j>=1} Z_j
  double rho_connect_lo = 0;  // bracket for prod_j P[Z_j = 0]
  double rho_connect_hi = 0;
  std::int64_t truncation_j = 0;
  double delta = 0;
};
LimitLaws limit_laws(const ModelSpec& spec, double delta);

inline constexpr std::int64_t kDefaultNodeBudget = 50'000'000;
SpectrumLaw qn_law(const ModelSpec& spec, std::int64_t n, double delta,
                   std::int64_t node_budget = kDefaultNodeBudget);

struct TvResult {
  double value;
  double error;  // certified interval half-width from uncovered masses
};
TvResult tv_distance(const SpectrumLaw& p, const SpectrumLaw& q);
double tv_pmf(const Pmf& p, const Pmf& q);  // window TV, tails ignored

double partition_function(const ModelSpec& spec, std::int64_t n);

// max_{b+1 <= l <= n} |l P[T_bn=l] - sum_j j a_j P[T_bn=l-j]|; exact
// identity for Poisson species, so the value is pure round-off.
double poisson_recursion_residual(const ModelSpec& spec, std::int64_t b, std::int64_t n);

// Residual of the three-line perturbed recursion (single-summand split),
// using exact leave-one-out laws; max over b+1 <= l <= n.
double general_recursion_residual(const ModelSpec& spec, std::int64_t b, std::int64_t n);

}  // namespace condrel
