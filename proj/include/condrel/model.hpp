#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "condrel/pmf.hpp"
#include "condrel/trees.hpp"

namespace condrel {

enum class Family {
  poisson_power,
  forest_unlabelled_unrooted,
  forest_unlabelled_rooted,
  forest_labelled_unrooted,
  forest_labelled_rooted,
  custom_table,
};

const char* family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

// Slowly-varying factor lambda(j) of E Z_j = j^{-q-1} lambda(j), with a
// cached running maximum lambda^+(l).
class LambdaFn {
 public:
  LambdaFn();  // constant 1
  static LambdaFn constant(double c);
  static LambdaFn custom(std::function<double(std::int64_t)> f, std::string descriptor,
                         std::optional<double> sup_bound = {});

  double operator()(std::int64_t j) const;
  double running_max(std::int64_t l) const;  // lambda^+(l)
  const std::string& descriptor() const;
  std::optional<double> sup_bound() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// A species family: produces the law of Z_j for every j.  Immutable; copies
// share the memoization caches.
class ModelSpec {
 public:
  static ModelSpec poisson_power(double A, double q, LambdaFn lambda = LambdaFn::constant(1.0),
                                 double tau = kDefaultTau);
  static ModelSpec forest(Family family, int horizon = 400, double tau = kDefaultTau);
  // table maps j to the law of Z_j; tail_coeff C declares a_j <= C j^{-q-1}
  // for j beyond the table (needed by limit laws).
  static ModelSpec custom_table(std::map<std::int64_t, Pmf> table, double q,
                                double tau = kDefaultTau,
                                std::optional<double> tail_coeff = {});

  static ModelSpec from_file(const std::string& path);
  static ModelSpec parse(std::istream& in, const std::string& source_name);

  // Same conditional laws, tilted species laws (x folded analytically for
  // the closed families, generic tilt for custom tables).
  ModelSpec tilted(double x) const;
  // Replace the law of one species; used for sensitivity checks and
  // partially-degenerate test models.
  ModelSpec with_override(std::int64_t j, Pmf law) const;

  Family family() const;
  double q() const;
  double tau() const;
  double tilt_x() const;
  int horizon() const;
  double amplitude() const;  // A (poisson-power)
  const LambdaFn& lambda_fn() const;

  // Memoized, thread-safe.  min_support widens the window of the analytic
  // families to cover [0, min_support]; conditioning on a total can inflate
  // window entries far below tau, so exact-engine callers pass n/j here.
  Pmf species_pmf(std::int64_t j, std::int64_t min_support = 0) const;
  double mean_z(std::int64_t j) const;    // a_j = E Z_j
  double lambda_value(std::int64_t j) const;  // a_j j^{q+1}
  double lambda_plus(std::int64_t l) const;   // max_{s<=l} lambda_value(s)
  double log_prob_zero(std::int64_t j) const;

  // certified bound on sum_{j>J} a_j; throws tail_unknown for custom tables
  // without a declared coefficient.
  double mean_tail_bound(std::int64_t J) const;

  const TreeCounts& trees() const;      // forest families only
  const OtterConstants& otter() const;  // forest families only

  std::string fingerprint() const;  // stable hash of the resolved parameters
  std::string describe() const;     // canonical key=value serialization

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  ModelSpec(std::shared_ptr<Impl> impl);
};

struct ConditionReport {
  double L_hat = 0;                  // max_{2<=l<=jmax} max_{l/2<t<=l} lambda(l-t)/lambda(l)
  std::vector<double> lambda_growth; // lambda^+(l)/l^beta at the sample points
  std::vector<std::int64_t> lambda_growth_at;
  double beta = 0.1;
  std::vector<double> eps_of_j;      // eps(j) = max_{s>=2} eps_{js}, j = 1..jmax
  std::vector<double> gamma;         // fitted dominating sequence, gamma[s-2] for s>=2
  std::vector<double> eps_hat;       // max_s eps_{js}/gamma_s per j
  double G_hat = 0;                  // sum s gamma_s
  double Gq_hat = 0;                 // sum L_s s^{1+q} gamma_s
  double p0_hat = 1;                 // min_j P[Z_j = 0]
  std::vector<std::string> warnings; // quantities that failed to stabilize
};

ConditionReport condition_diagnostics(const ModelSpec& spec, std::int64_t jmax,
                                      std::int64_t smax);

}  // namespace condrel
