#pragma once

#include <cstdint>
#include <vector>

#include "condrel/errors.hpp"

namespace condrel {

inline constexpr double kDefaultTau = 1e-12;
inline constexpr double kMassTol = 1e-12;
inline constexpr double kFlush = 1e-300;

// Truncated law of a non-negative integer random variable.  The window is
// [offset, offset + probs.size()); `tail` holds the mass above the window.
// A capped pmf uses `tail` as an explicit overflow bucket instead of a
// truncation remainder bounded by tau.
class Pmf {
 public:
  Pmf();  // point mass at 0

  static Pmf from_parts(std::int64_t offset, std::vector<double> probs, double tail,
                        double tau = kDefaultTau, bool capped = false);
  static Pmf point_mass(std::int64_t at, double tau = kDefaultTau);

  std::int64_t offset() const { return offset_; }
  const std::vector<double>& probs() const { return probs_; }
  double tail() const { return tail_; }
  double tau() const { return tau_; }
  bool capped() const { return capped_; }
  std::int64_t size() const { return static_cast<std::int64_t>(probs_.size()); }
  std::int64_t max_support() const { return offset_ + size() - 1; }

  // P[X = s]; zero outside the window.
  double at(std::int64_t s) const;
  // sum(probs) + tail
  double total() const;
  // window mass at points <= s
  double cdf(std::int64_t s) const;

 private:
  std::int64_t offset_ = 0;
  std::vector<double> probs_{1.0};
  double tail_ = 0.0;
  double tau_ = kDefaultTau;
  bool capped_ = false;

  void validate() const;
};

// The summand j*Z_j of a weighted sum of independent counts.
struct ScaledVar {
  std::int64_t j;
  Pmf law;
};

struct MeanResult {
  double value;            // window mean
  double tail_lower_bound; // at least this much mean sits in the tail
};

// min_support extends the window to cover [0, min_support] even where the
// mass is below tau; conditional laws can inflate that region arbitrarily.
Pmf pmf_poisson(double mean, double tau = kDefaultTau, std::int64_t min_support = 0);
Pmf pmf_negbinom(double m, double p, double tau = kDefaultTau, std::int64_t min_support = 0);

// Reweights P[i] by x^{j*i} and renormalizes.  Exact identity at x = 1;
// for x > 1 the tilted tail must be certifiably summable on the window.
Pmf tilt(const Pmf& law, std::int64_t j, double x);

MeanResult mean_with_bound(const Pmf& law);
double mean(const Pmf& law);

// Law of A + j*Z with A ~ acc (supported on [0, cap] plus overflow) and
// Z ~ v.law independent; mass landing above cap goes to the overflow bucket.
Pmf scaled_convolve(const Pmf& acc, const ScaledVar& v, std::int64_t cap);

struct EpsilonProfile {
  std::vector<double> eps;   // eps[s-1] = eps_{js}, s = 1..smax
  double identity_residual;  // |eps_{j1} - sum_{s>=2} s*eps_{js}|
};

// Divisibility profile with r_j = 1: eps_{j1} = 1 - P[1] j^{q+1}/lambda_j,
// eps_{js} = P[s] j^{q+1}/lambda_j for s >= 2.
EpsilonProfile epsilon_profile(const Pmf& law, std::int64_t j, double q, double lambda_j);

// r_j -> infinity reference value for NB(., rho^j); reported for comparison only.
double epsilon_star_negbinom(std::int64_t j, std::int64_t s, double rho);

}  // namespace condrel
