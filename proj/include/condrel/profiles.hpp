#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "condrel/engine.hpp"

namespace condrel {

// A tracked quantity along an increasing grid, with certified numerical
// error per point.
struct ConvergenceProfile {
  std::vector<double> abscissae;
  std::vector<double> values;
  std::vector<double> error_bars;
  std::string quantity;
  std::string fingerprint;
  std::vector<std::string> notes;  // finite-grid caveats etc.
};

struct LltRequest {
  std::int64_t b;
  std::int64_t n;
  std::int64_t l;
};

// H_n(l) = |l^{1+q} P[T_bn = l] / lambda(l) - 1| at the requested (b, n),
// plus a finite-grid stand-in for the sup over n >= l and b <= l-1 in
// `h_bmax`: n in {l, 2l, 4l}, b in {0, floor(l/2), l-1}.  The grids can
// only lower-bound the true sup; the profile notes say so.
struct LltProfile {
  ConvergenceProfile at_b;
  std::vector<double> h_bmax;
};
LltProfile llt_profile(const ModelSpec& spec, const std::vector<LltRequest>& points);

// d_TV(conditional law, Q_n) per n; error bar = sum of uncovered masses.
ConvergenceProfile tv_to_qn(const ModelSpec& spec, const std::vector<std::int64_t>& ngrid,
                            double delta);

// d_TV(L(C_1..b), L(Z_1..b)) via the exact conditioning identity
// sum_j P[T_{0b} = j] (1 - P[T_bn = n-j]/P[T_{0n} = n])_+.
ConvergenceProfile small_counts_convergence(const ModelSpec& spec,
                                            const std::vector<std::int64_t>& ngrid,
                                            std::int64_t b);

// Same quantity by direct enumeration of the prefix laws; n is limited by
// the brute-force guard.  Used to cross-check the identity route.
double prefix_tv_direct(const ModelSpec& spec, std::int64_t n, std::int64_t b);

struct GelationProfiles {
  ConvergenceProfile giant;     // d_TV(L(n - Y_n), L(T_{0,inf}))
  ConvergenceProfile smallest;  // |P[K_n > b] - prod_{j<=b} P[Z_j = 0]|
  ConvergenceProfile count;     // d_TV(L(X_n), L(1 + sum_j Z_j))
  ConvergenceProfile connect;   // |P[Y_n = n] - rho_connect|
  std::vector<double> prob_connected;  // P[Y_n = n] per grid point
  double rho_connect_lo = 0;
  double rho_connect_hi = 0;
};
GelationProfiles gelation_profile(const ModelSpec& spec,
                                  const std::vector<std::int64_t>& ngrid, double delta,
                                  std::int64_t b_small = 2);

}  // namespace condrel
