#include "condrel/trees.hpp"

#include <cmath>
#include <string>

namespace condrel {

std::vector<mpz_class> rooted_tree_counts(int jmax) {
  if (jmax < 1) fail(Errc::domain, "tree-count horizon must be >= 1");
  std::vector<mpz_class> r(static_cast<std::size_t>(jmax) + 1);
  r[0] = 0;
  r[1] = 1;
  // c[k] = sum_{d|k} d * r_d, filled as r becomes available
  std::vector<mpz_class> c(static_cast<std::size_t>(jmax) + 1);
  for (int n = 1; n < jmax; ++n) {
    // complete c[n]
    c[n] = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) c[n] += mpz_class(d) * r[d];
    mpz_class acc = 0;
    for (int k = 1; k <= n; ++k) acc += c[k] * r[n + 1 - k];
    mpz_class rem;
    mpz_fdiv_qr_ui(r[n + 1].get_mpz_t(), rem.get_mpz_t(), acc.get_mpz_t(),
                   static_cast<unsigned long>(n));
    if (rem != 0) fail(Errc::internal, "rooted tree recurrence produced a non-integer");
  }
  return r;
}

std::vector<mpz_class> unrooted_tree_counts(const std::vector<mpz_class>& r) {
  if (r.size() < 2 || r[1] != 1) fail(Errc::domain, "invalid rooted tree counts");
  const int jmax = static_cast<int>(r.size()) - 1;
  std::vector<mpz_class> m(r.size());
  m[0] = 0;
  for (int n = 1; n <= jmax; ++n) {
    mpz_class s = 0;
    for (int i = 1; i < n; ++i) s += r[i] * r[n - i];
    mpz_class twice = 2 * r[n] - s;
    if (n % 2 == 0) twice += r[n / 2];
    if (mpz_odd_p(twice.get_mpz_t()))
      fail(Errc::inconsistent_model,
           "dissimilarity formula non-integral at n = " + std::to_string(n) +
               "; rooted counts are wrong");
    m[n] = twice / 2;
    if (m[n] < 1) fail(Errc::inconsistent_model, "free tree count below 1");
  }
  return m;
}

TreeCounts tree_counts(int jmax) {
  TreeCounts tc;
  tc.r = rooted_tree_counts(jmax);
  tc.m = unrooted_tree_counts(tc.r);
  return tc;
}

double log_mpz(const mpz_class& v) {
  if (v <= 0) fail(Errc::domain, "log of non-positive integer");
  signed long exp2;
  const double d = mpz_get_d_2exp(&exp2, v.get_mpz_t());
  return std::log(d) + static_cast<double>(exp2) * std::log(2.0);
}

namespace {

// r_j / r_{j+1} with the known (1 + 1/j)^{3/2} drift removed; the remainder
// approaches rho with O(1/j^2) error.
double drift_corrected_ratio(const TreeCounts& tc, int j) {
  mpq_class ratio(tc.r[static_cast<std::size_t>(j)], tc.r[static_cast<std::size_t>(j) + 1]);
  return ratio.get_d() *
         std::pow(static_cast<double>(j) / (static_cast<double>(j) + 1.0), 1.5);
}

double rho_at(const TreeCounts& tc, int h) {
  const int j1 = h - 1;
  const int j0 = j1 / 2;
  const double y1 = drift_corrected_ratio(tc, j1);
  const double y0 = drift_corrected_ratio(tc, j0);
  const double w1 = static_cast<double>(j1) * j1;
  const double w0 = static_cast<double>(j0) * j0;
  return (w1 * y1 - w0 * y0) / (w1 - w0);
}

// Richardson step for sequences with O(1/j) error.
double extrapolate_linear(double g0, int j0, double g1, int j1) {
  return (static_cast<double>(j1) * g1 - static_cast<double>(j0) * g0) /
         static_cast<double>(j1 - j0);
}

double fitted_constant(const std::vector<mpz_class>& seq, double rho, double power, int h) {
  const int j1 = h - 1;
  const int j0 = j1 / 2;
  auto g = [&](int j) {
    return std::exp(log_mpz(seq[static_cast<std::size_t>(j)]) +
                    static_cast<double>(j) * std::log(rho) + power * std::log(static_cast<double>(j)));
  };
  return extrapolate_linear(g(j0), j0, g(j1), j1);
}

}  // namespace

OtterConstants otter_constants(const TreeCounts& counts, int horizon) {
  if (horizon < 0) horizon = counts.horizon();
  if (horizon > counts.horizon())
    fail(Errc::insufficient_data, "requested horizon exceeds the computed counts");
  if (horizon < 60)
    fail(Errc::insufficient_data, "otter constants need a tree-count horizon >= 60");

  OtterConstants out;
  out.horizon = horizon;
  out.rho = rho_at(counts, horizon);
  out.rho_spread = std::abs(out.rho - rho_at(counts, horizon / 2));
  out.c_rooted = fitted_constant(counts.r, out.rho, 1.5, horizon);
  out.c_free = fitted_constant(counts.m, out.rho, 2.5, horizon);
  if (!(out.rho > 0.0) || !(out.rho < 1.0))
    fail(Errc::internal, "otter rho estimate outside (0,1)");
  return out;
}

}  // namespace condrel
