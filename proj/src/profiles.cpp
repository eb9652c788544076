#include "condrel/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace condrel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void push_point(ConvergenceProfile& p, double x, double v, double e) {
  if (!p.abscissae.empty() && x <= p.abscissae.back())
    fail(Errc::domain, "profile grid must be strictly increasing");
  p.abscissae.push_back(x);
  p.values.push_back(v);
  p.error_bars.push_back(e);
}

}  // namespace

LltProfile llt_profile(const ModelSpec& spec, const std::vector<LltRequest>& points) {
  LltProfile out;
  out.at_b.quantity = "llt-deviation";
  out.at_b.fingerprint = spec.fingerprint();
  out.at_b.notes.push_back("finite (b, n) grid only lower-bounds the sup over all b, n");
  const double q = spec.q();
  for (const auto& pt : points) {
    if (pt.b < 0 || pt.b > pt.l - 1 || pt.l > pt.n)
      fail(Errc::domain, "llt point needs 0 <= b <= l-1 <= n-1");
    auto h_at = [&](const SuffixTable& st, std::int64_t b) {
      const double p = st.prob(b + 1, pt.l);
      return std::abs(std::pow(static_cast<double>(pt.l), 1.0 + q) * p /
                          spec.lambda_value(pt.l) -
                      1.0);
    };
    const SuffixTable st(spec, pt.n);
    push_point(out.at_b, static_cast<double>(pt.l), h_at(st, pt.b), 1e-12);
    // sup over all n >= l and b <= l-1 approximated on the grids
    // n in {l, 2l, 4l}, b in {0, l/2, l-1}
    double hb = 0.0;
    for (std::int64_t nn : {pt.l, 2 * pt.l, 4 * pt.l}) {
      const SuffixTable stn(spec, nn);
      for (std::int64_t b : {std::int64_t{0}, pt.l / 2, pt.l - 1})
        if (b >= 0 && b <= pt.l - 1) hb = std::max(hb, h_at(stn, b));
    }
    out.h_bmax.push_back(hb);
  }
  return out;
}

ConvergenceProfile tv_to_qn(const ModelSpec& spec, const std::vector<std::int64_t>& ngrid,
                            double delta) {
  ConvergenceProfile out;
  out.quantity = "tv-to-limit-law";
  out.fingerprint = spec.fingerprint();
  for (std::int64_t n : ngrid) {
    const SpectrumLaw exact = spectrum_law_bruteforce(spec, n);
    const SpectrumLaw qn = qn_law(spec, n, delta);
    const TvResult tv = tv_distance(exact, qn);
    push_point(out, static_cast<double>(n), tv.value, tv.error);
  }
  return out;
}

ConvergenceProfile small_counts_convergence(const ModelSpec& spec,
                                            const std::vector<std::int64_t>& ngrid,
                                            std::int64_t b) {
  if (b < 1) fail(Errc::domain, "prefix size b must be >= 1");
  for (std::int64_t n : ngrid)
    if (b >= n) fail(Errc::domain, "prefix size must be below every grid point");
  ConvergenceProfile out;
  out.quantity = "small-counts-tv";
  out.fingerprint = spec.fingerprint();

  // law of T_{0b}, cap grown until the tail is negligible
  std::int64_t cap = 8 * b + 64;
  Pmf t0b = t_distribution(spec, 0, b, cap);
  while (t0b.tail() >= 1e-12 && cap <= 1'000'000) {
    cap *= 2;
    t0b = t_distribution(spec, 0, b, cap);
  }

  for (std::int64_t n : ngrid) {
    SuffixTable st(spec, n);
    const double ld = st.log_prob(1, n);
    if (ld == kNegInf)
      fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
    double sum = 0.0;
    for (std::int64_t j = 0; j <= t0b.max_support(); ++j) {
      const double pj = t0b.at(j);
      if (pj == 0.0) continue;
      double ratio = 0.0;
      if (j <= n) {
        const double lnum = st.log_prob(b + 1, n - j);
        if (lnum != kNegInf) ratio = std::exp(lnum - ld);
      }
      sum += pj * std::max(0.0, 1.0 - ratio);
    }
    push_point(out, static_cast<double>(n), sum, t0b.tail() + 1e-12);
  }
  return out;
}

double prefix_tv_direct(const ModelSpec& spec, std::int64_t n, std::int64_t b) {
  if (b < 1 || b >= n) fail(Errc::domain, "need 1 <= b < n");
  const SpectrumLaw law = spectrum_law_bruteforce(spec, n);

  // conditional law of (C_1..C_b)
  std::map<std::vector<std::int64_t>, double> cond;
  for (const auto& [key, p] : law.entries) {
    std::vector<std::int64_t> prefix(static_cast<std::size_t>(b), 0);
    for (auto& [j, y] : key)
      if (j <= b) prefix[static_cast<std::size_t>(j) - 1] = y;
    cond[prefix] += p;
  }

  // independent product law of (Z_1..Z_b), enumerated over the species
  // windows; the unenumerated product mass is the sum of species tails
  std::vector<Pmf> species;
  double tail_mass = 0.0;
  for (std::int64_t j = 1; j <= b; ++j) {
    species.push_back(spec.species_pmf(j));
    tail_mass += species.back().tail();
  }
  std::map<std::vector<std::int64_t>, double> prod;
  std::vector<std::int64_t> z(static_cast<std::size_t>(b), 0);
  std::function<void(std::int64_t, double)> rec = [&](std::int64_t j, double w) {
    if (w == 0.0) return;
    if (j > b) {
      prod[z] += w;
      return;
    }
    const Pmf& s = species[static_cast<std::size_t>(j) - 1];
    for (std::int64_t y = s.offset(); y <= s.max_support(); ++y) {
      z[static_cast<std::size_t>(j) - 1] = y;
      rec(j + 1, w * s.at(y));
    }
    z[static_cast<std::size_t>(j) - 1] = 0;
  };
  rec(1, 1.0);

  double sum = 0.0;
  auto ic = cond.begin();
  auto ip = prod.begin();
  while (ic != cond.end() || ip != prod.end()) {
    if (ip == prod.end() || (ic != cond.end() && ic->first < ip->first)) {
      sum += ic->second;
      ++ic;
    } else if (ic == cond.end() || ip->first < ic->first) {
      sum += ip->second;
      ++ip;
    } else {
      sum += std::abs(ic->second - ip->second);
      ++ic;
      ++ip;
    }
  }
  return 0.5 * (sum + tail_mass);
}

GelationProfiles gelation_profile(const ModelSpec& spec,
                                  const std::vector<std::int64_t>& ngrid, double delta,
                                  std::int64_t b_small) {
  if (b_small < 1) fail(Errc::domain, "b_small must be >= 1");
  GelationProfiles out;
  for (ConvergenceProfile* p : {&out.giant, &out.smallest, &out.count, &out.connect}) {
    p->fingerprint = spec.fingerprint();
  }
  out.giant.quantity = "tv-defect-to-limit";
  out.smallest.quantity = "smallest-survival-gap";
  out.count.quantity = "tv-count-to-limit";
  out.connect.quantity = "connectedness-gap";

  const LimitLaws lim = limit_laws(spec, delta);
  out.rho_connect_lo = lim.rho_connect_lo;
  out.rho_connect_hi = lim.rho_connect_hi;
  const double rho_mid = 0.5 * (lim.rho_connect_lo + lim.rho_connect_hi);
  const double rho_err = 0.5 * (lim.rho_connect_hi - lim.rho_connect_lo);

  double small_zero = 0.0;
  for (std::int64_t j = 1; j <= b_small; ++j) small_zero += spec.log_prob_zero(j);
  const double small_limit = std::exp(small_zero);

  const std::int64_t kmax =
      std::max<std::int64_t>(16, lim.count_limit.max_support() + 8);

  for (std::int64_t n : ngrid) {
    const Pmf y = largest_component_law(spec, n);
    // law of the defect n - Y_n
    std::vector<double> defect(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t s = 0; s < n; ++s) defect[static_cast<std::size_t>(s)] = y.at(n - s);
    const Pmf defect_law =
        Pmf::from_parts(0, std::move(defect), y.tail(), y.tau(), true);
    push_point(out.giant, static_cast<double>(n), tv_pmf(defect_law, lim.t0_inf),
               2.0 * delta);

    const Pmf k = smallest_component_law(spec, n);
    double survival = 0.0;
    for (std::int64_t s = b_small + 1; s <= k.max_support(); ++s) survival += k.at(s);
    push_point(out.smallest, static_cast<double>(n), std::abs(survival - small_limit),
               1e-12);

    const Pmf x = component_count_law(spec, n, kmax);
    push_point(out.count, static_cast<double>(n), tv_pmf(x, lim.count_limit), 2.0 * delta);

    const double pconn = y.at(n);
    out.prob_connected.push_back(pconn);
    push_point(out.connect, static_cast<double>(n), std::abs(pconn - rho_mid),
               rho_err + 1e-12);
  }
  return out;
}

}  // namespace condrel
