#pragma once

#include <gmpxx.h>

#include <vector>

#include "condrel/errors.hpp"

namespace condrel {

// Exact counts of unlabelled trees, 1-indexed (index 0 unused).
// r[j] = rooted trees on j nodes, m[j] = free (unrooted) trees on j nodes.
struct TreeCounts {
  std::vector<mpz_class> r;
  std::vector<mpz_class> m;
  int horizon() const { return static_cast<int>(r.size()) - 1; }
};

// Euler-transform recurrence: n * r_{n+1} = sum_{k=1}^{n} (sum_{d|k} d r_d) r_{n+1-k}.
std::vector<mpz_class> rooted_tree_counts(int jmax);

// Dissimilarity formula: m_n = r_n - (1/2) sum_{i=1}^{n-1} r_i r_{n-i} + [n even] r_{n/2}/2.
std::vector<mpz_class> unrooted_tree_counts(const std::vector<mpz_class>& r);

TreeCounts tree_counts(int jmax);

struct OtterConstants {
  double rho;       // radius of convergence of the rooted tree gf
  double c_free;    // m_j ~ c_free    * rho^{-j} j^{-5/2}
  double c_rooted;  // r_j ~ c_rooted  * rho^{-j} j^{-3/2}
  double rho_spread;  // |estimate(h) - estimate(h/2)|, empirical convergence report
  int horizon;
};

OtterConstants otter_constants(const TreeCounts& counts, int horizon = -1);

// log of a positive big integer, exact to double rounding
double log_mpz(const mpz_class& v);

}  // namespace condrel
