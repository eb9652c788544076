#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "condrel/pmf.hpp"
#include "doctest.h"

using namespace condrel;

TEST_CASE("poisson degenerate and unit mean") {
  const Pmf zero = pmf_poisson(0.0);
  CHECK(zero.at(0) == 1.0);
  CHECK(zero.tail() == 0.0);

  const Pmf one = pmf_poisson(1.0);
  CHECK(one.at(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(one.at(3) == doctest::Approx(std::exp(-1.0) / 6.0).epsilon(1e-14));
  CHECK(one.tail() < 1e-12);
}

TEST_CASE("poisson truncation point matches extended-precision tail") {
  // oracle: smallest s with 1 - cdf(s) < 1e-12, summed in long double
  const double mean = 0.25;
  long double term = std::exp((long double)-mean);
  long double sum = term;
  std::int64_t sstar = 0;
  for (std::int64_t s = 1; s <= 200; ++s) {
    term *= (long double)mean / (long double)s;
    sum += term;
    if (1.0L - sum < 1e-12L) {
      sstar = s;
      break;
    }
  }
  REQUIRE(sstar > 0);
  const Pmf law = pmf_poisson(mean, 1e-12);
  CHECK(law.max_support() == sstar);
  CHECK(law.tail() < 1e-12);
}

TEST_CASE("poisson domain errors") {
  CHECK_THROWS_AS(pmf_poisson(-0.1), Error);
  CHECK_THROWS_AS(pmf_poisson(1.0, 0.0), Error);
  CHECK_THROWS_AS(pmf_poisson(1.0, 1e-3), Error);
}

TEST_CASE("negbinom zero term, mean, geometric case") {
  const Pmf nb = pmf_negbinom(3.0, 0.2);
  CHECK(nb.at(0) == doctest::Approx(std::pow(0.8, 3.0)).epsilon(1e-13));
  CHECK(mean(nb) == doctest::Approx(0.75).epsilon(1e-10));

  // direct summation cross-check of the mean
  double direct = 0.0;
  for (std::int64_t s = 0; s <= nb.max_support(); ++s)
    direct += static_cast<double>(s) * nb.at(s);
  CHECK(direct == doctest::Approx(0.75).epsilon(1e-10));

  const Pmf geo = pmf_negbinom(1.0, 0.5);
  for (std::int64_t s = 0; s <= 10; ++s)
    CHECK(geo.at(s) == doctest::Approx(std::pow(2.0, -(double)(s + 1))).epsilon(1e-13));

  CHECK_THROWS_AS(pmf_negbinom(0.0, 0.5), Error);
  CHECK_THROWS_AS(pmf_negbinom(1.0, 1.0), Error);
}

TEST_CASE("negbinom huge real shape stays normalized") {
  // forest-sized shapes: m so large that (1-p)^m underflows
  const Pmf law = pmf_negbinom(1e120, 1e-121);
  CHECK(std::abs(law.total() - 1.0) < 1e-10);
  CHECK(mean(law) == doctest::Approx(1e120 * 1e-121 / (1.0 - 1e-121)).epsilon(1e-8));
}

TEST_CASE("tilt identity at x = 1") {
  const Pmf law = pmf_poisson(0.7);
  const Pmf same = tilt(law, 3, 1.0);
  for (std::int64_t s = 0; s <= law.max_support(); ++s) CHECK(same.at(s) == law.at(s));
}

TEST_CASE("tilted poisson is poisson with mean a x^j") {
  const double a = 0.8, x = 0.6;
  const std::int64_t j = 2;
  const Pmf tilted = tilt(pmf_poisson(a), j, x);
  const Pmf target = pmf_poisson(a * std::pow(x, (double)j));
  for (std::int64_t s = 0; s <= 8; ++s)
    CHECK(tilted.at(s) == doctest::Approx(target.at(s)).epsilon(1e-10));
}

TEST_CASE("tilted negbinom satisfies the shifted-ratio identity") {
  // NegBinom(m, rho^j) tilted by (j, x) must obey
  // P'[s+1]/P'[s] = (rho x)^j (m+s)/(s+1)
  const double m = 2.0, rho = 0.3, x = 1.5;
  const std::int64_t j = 3;
  const Pmf base = pmf_negbinom(m, std::pow(rho, (double)j));
  const Pmf tilted = tilt(base, j, x);
  const double pxj = std::pow(rho * x, (double)j);
  for (std::int64_t s = 0; s <= 6; ++s) {
    REQUIRE(tilted.at(s) > 0.0);
    const double ratio = tilted.at(s + 1) / tilted.at(s);
    CHECK(ratio == doctest::Approx(pxj * (m + (double)s) / ((double)s + 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("non-summable tilt is rejected") {
  // polynomially decaying window: tilted weights grow, no certifiable decay
  std::vector<double> probs(40, 0.0);
  double sum = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    probs[s] = 1.0 / std::pow((double)(s + 1), 2.0);
    sum += probs[s];
  }
  for (double& p : probs) p *= (1.0 - 1e-12) / sum;
  const Pmf heavy = Pmf::from_parts(0, std::move(probs), 1e-12, 1e-12);
  CHECK_THROWS_AS(tilt(heavy, 1, 2.0), Error);
  CHECK(tilt(heavy, 1, 0.5).total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean of point mass and poisson") {
  CHECK(mean(Pmf::point_mass(0)) == 0.0);
  CHECK(mean(pmf_poisson(0.7)) == doctest::Approx(0.7).epsilon(1e-10));
  const MeanResult mr = mean_with_bound(pmf_poisson(0.7));
  CHECK(mr.tail_lower_bound >= 0.0);
}

TEST_CASE("scaled_convolve identity element") {
  std::vector<double> init{0.25, 0.5, 0.25};
  const Pmf acc = Pmf::from_parts(0, init, 0.0, 1e-12, true);
  const Pmf out = scaled_convolve(acc, ScaledVar{5, Pmf::point_mass(0)}, 2);
  for (std::int64_t s = 0; s <= 2; ++s) CHECK(out.at(s) == acc.at(s));
}

TEST_CASE("scaled_convolve two-species mass at 2") {
  // Z1 ~ Po(1) scaled by 1, then Z2 ~ Po(0.5) scaled by 2; mass at 2 is
  // e^{-1}/2 * e^{-0.5} + e^{-1} * 0.5 e^{-0.5} = e^{-1.5}
  const std::int64_t cap = 16;
  std::vector<double> init(cap + 1, 0.0);
  init[0] = 1.0;
  Pmf acc = Pmf::from_parts(0, std::move(init), 0.0, 1e-12, true);
  acc = scaled_convolve(acc, ScaledVar{1, pmf_poisson(1.0)}, cap);
  acc = scaled_convolve(acc, ScaledVar{2, pmf_poisson(0.5)}, cap);
  CHECK(acc.at(2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(acc.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("epsilon profile for poisson species") {
  const double a = 0.37;
  const std::int64_t j = 4;
  const double q = 1.5;
  const Pmf law = pmf_poisson(a);
  const double lam = mean(law) * std::pow((double)j, q + 1.0);
  const EpsilonProfile ep = epsilon_profile(law, j, q, lam);
  // eps_{j2} = P[2]/a = e^{-a} a / 2
  CHECK(ep.eps[1] == doctest::Approx(std::exp(-a) * a / 2.0).epsilon(1e-9));
  CHECK(ep.identity_residual < 1e-12);
}

TEST_CASE("epsilon profile vanishes beyond s=1 for a two-point law") {
  const double a = 0.2;
  const Pmf law = Pmf::from_parts(0, {1.0 - a, a}, 0.0, 1e-12);
  const EpsilonProfile ep = epsilon_profile(law, 3, 0.5, a * std::pow(3.0, 1.5));
  for (std::size_t i = 1; i < ep.eps.size(); ++i) CHECK(ep.eps[i] == 0.0);
  CHECK(std::abs(ep.eps[0]) < 1e-12);
}

TEST_CASE("epsilon profile rejects an inconsistent lambda") {
  const Pmf law = pmf_poisson(0.3);
  CHECK_THROWS_AS(epsilon_profile(law, 2, 1.5, 1.0), Error);
}

TEST_CASE("negbinom limiting epsilon reference value") {
  const double rho = 0.3383;
  const std::int64_t j = 2, s = 3;
  const double rj = std::pow(rho, 2.0);
  CHECK(epsilon_star_negbinom(j, s, rho) ==
        doctest::Approx((1.0 - rj) * rj * rj / 3.0).epsilon(1e-13));
}

TEST_CASE("pmf invariants are enforced") {
  CHECK_THROWS_AS(Pmf::from_parts(0, {0.5, 0.4}, 0.0, 1e-12), Error);   // mass lost
  CHECK_THROWS_AS(Pmf::from_parts(0, {1.1, -0.1}, 0.0, 1e-12), Error);  // range
  CHECK_THROWS_AS(Pmf::from_parts(0, {0.9}, 0.1, 1e-12), Error);        // tail > tau
  const Pmf capped = Pmf::from_parts(0, {0.9}, 0.1, 1e-12, true);       // explicit bucket
  CHECK(capped.tail() == 0.1);
}
