#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "condrel/profiles.hpp"
#include "doctest.h"

using namespace condrel;

namespace {

ModelSpec poisson_ref() { return ModelSpec::poisson_power(1.0, 1.5); }

}  // namespace

TEST_CASE("llt ratio at b = n - 1 reduces to the single-species value") {
  const ModelSpec spec = poisson_ref();
  const std::int64_t n = 80;
  const LltProfile prof = llt_profile(spec, {{n - 1, n, n}});
  // T_{n-1,n} = n Z_n, so P[T = n] = P[Z_n = 1]
  const double direct = std::abs(std::pow(static_cast<double>(n), 2.5) *
                                     spec.species_pmf(n).at(1) / spec.lambda_value(n) -
                                 1.0);
  CHECK(prof.at_b.values[0] == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("llt deviation shrinks along the grid and bounds its b sweep") {
  const ModelSpec spec = poisson_ref();
  std::vector<LltRequest> req;
  for (std::int64_t l : {std::int64_t(50), std::int64_t(100), std::int64_t(200),
                         std::int64_t(400)})
    req.push_back({0, l, l});
  const LltProfile prof = llt_profile(spec, req);
  REQUIRE(prof.at_b.values.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) CHECK(prof.at_b.values[i] < prof.at_b.values[i - 1]);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(prof.h_bmax[i] >= prof.at_b.values[i]);  // the sweep includes b = 0
    CHECK(prof.at_b.error_bars[i] <= 1e-10);
  }
  CHECK(!prof.at_b.notes.empty());  // finite-b-grid caveat is spelled out
}

TEST_CASE("small-counts identity agrees with direct prefix enumeration") {
  const ModelSpec spec = poisson_ref();
  const std::int64_t b = 3;
  for (std::int64_t n : {std::int64_t(20), std::int64_t(40)}) {
    const ConvergenceProfile prof = small_counts_convergence(spec, {n}, b);
    const double direct = prefix_tv_direct(spec, n, b);
    CHECK(prof.values[0] == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("small-counts distance vanishes when the prefix is deterministic") {
  // sizes 1..3 impossible on both sides, so the prefix laws coincide
  ModelSpec spec = poisson_ref();
  for (std::int64_t j = 1; j <= 3; ++j) spec = spec.with_override(j, Pmf::point_mass(0));
  const ConvergenceProfile prof = small_counts_convergence(spec, {12, 16}, 3);
  for (double v : prof.values) CHECK(v < 1e-12);
}

TEST_CASE("small-counts distance decreases in n") {
  const ConvergenceProfile prof =
      small_counts_convergence(poisson_ref(), {10, 20, 40, 80}, 3);
  REQUIRE(prof.values.size() == 4);
  for (std::size_t i = 1; i < prof.values.size(); ++i)
    CHECK(prof.values[i] < prof.values[i - 1]);
  for (double e : prof.error_bars) CHECK(e < 1e-9);
}

TEST_CASE("distance to the independent-plus-unit law decreases in n") {
  for (const ModelSpec& spec :
       {poisson_ref(), ModelSpec::forest(Family::forest_unlabelled_unrooted, 200)}) {
    const double delta = 1e-6;
    const ConvergenceProfile prof = tv_to_qn(spec, {10, 20, 40}, delta);
    REQUIRE(prof.values.size() == 3);
    CHECK(prof.values[1] < prof.values[0]);
    CHECK(prof.values[2] < prof.values[1]);
    for (double e : prof.error_bars) CHECK(e < 2.0 * delta);
    CHECK(prof.fingerprint == spec.fingerprint());
  }
}

TEST_CASE("gelation profiles all shrink along the grid") {
  const ModelSpec spec = poisson_ref();
  const double delta = 1e-6;
  const GelationProfiles g = gelation_profile(spec, {25, 50, 100, 200}, delta);
  for (const ConvergenceProfile* p : {&g.giant, &g.smallest, &g.count, &g.connect}) {
    REQUIRE(p->values.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(p->values[i] < p->values[i - 1]);
  }
  REQUIRE(g.prob_connected.size() == 4);
  // P[Y_n = n] approaches the infinite-volume connectivity constant from
  // within its certified bracket, up to the profile's own last discrepancy
  const double slack = g.connect.values[3] + 1e-9;
  CHECK(g.prob_connected[3] > g.rho_connect_lo - slack);
  CHECK(g.prob_connected[3] < g.rho_connect_hi + slack);
  CHECK(g.rho_connect_lo < g.rho_connect_hi);
}

TEST_CASE("gelation error bars track the requested tolerance") {
  const ModelSpec spec = poisson_ref();
  const GelationProfiles loose = gelation_profile(spec, {25, 50}, 1e-4);
  const GelationProfiles tight = gelation_profile(spec, {25, 50}, 1e-6);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(loose.giant.error_bars[i] <= 2e-4);
    CHECK(tight.giant.error_bars[i] <= 2e-6);
    // the reported values themselves agree to the coarser tolerance
    CHECK(std::abs(loose.giant.values[i] - tight.giant.values[i]) < 3e-4);
  }
}
