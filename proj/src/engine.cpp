#include "condrel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace condrel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_at(const Pmf& law, std::int64_t s) {
  const double p = law.at(s);
  return p > 0.0 ? std::log(p) : kNegInf;
}

double window_log_total(const std::vector<double>& row) {
  double acc = kNegInf;
  for (double v : row) acc = lse(acc, v);
  return acc;
}

// One log-domain convolution step: row (capped at cap, overflow lover)
// becomes the law of previous + j*Z.
void conv_step_log(std::vector<double>& row, double& lover, std::int64_t j, const Pmf& z,
                   std::int64_t cap) {
  std::vector<double> out(static_cast<std::size_t>(cap) + 1, kNegInf);
  const double lwin = window_log_total(row);
  double lo = lover + std::log(z.total());  // old overflow stays overflow
  if (z.tail() > 0.0) lo = lse(lo, std::log(z.tail()) + lwin);
  for (std::int64_t y = std::max<std::int64_t>(0, z.offset()); y <= z.max_support(); ++y) {
    const double ly = log_at(z, y);
    if (ly == kNegInf) continue;
    const std::int64_t base = j * y;
    if (base > cap) {
      lo = lse(lo, ly + lwin);
      continue;
    }
    for (std::int64_t t = 0; t + base <= cap; ++t)
      if (row[static_cast<std::size_t>(t)] != kNegInf)
        out[static_cast<std::size_t>(t + base)] =
            lse(out[static_cast<std::size_t>(t + base)],
                ly + row[static_cast<std::size_t>(t)]);
    for (std::int64_t t = cap - base + 1; t <= cap; ++t)
      if (row[static_cast<std::size_t>(t)] != kNegInf)
        lo = lse(lo, ly + row[static_cast<std::size_t>(t)]);
  }
  row = std::move(out);
  lover = lo;
}

std::vector<Pmf> species_range(const ModelSpec& spec, std::int64_t n) {
  std::vector<Pmf> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t j = 1; j <= n; ++j) out.push_back(spec.species_pmf(j, n / j));
  return out;
}

}  // namespace

std::int64_t spectrum_weight(const Spectrum& s) {
  std::int64_t w = 0;
  for (auto& [j, y] : s) w += j * y;
  return w;
}

std::int64_t spectrum_count(const Spectrum& s) {
  std::int64_t c = 0;
  for (auto& [j, y] : s) c += y;
  return c;
}

double SpectrumLaw::total() const {
  double t = 0.0;
  for (const auto& [k, p] : entries) {
    (void)k;
    t += p;
  }
  return t;
}

// ------------------------------------------------------------ SuffixTable

SuffixTable::SuffixTable(const ModelSpec& spec, std::int64_t n) : spec_(spec), n_(n) {
  if (n < 1) fail(Errc::domain, "suffix table needs n >= 1");
  species_ = species_range(spec, n);
  log_rows_.assign(static_cast<std::size_t>(n) + 2, {});
  log_over_.assign(static_cast<std::size_t>(n) + 2, kNegInf);
  std::vector<double> row(static_cast<std::size_t>(n) + 1, kNegInf);
  row[0] = 0.0;
  double lover = kNegInf;
  log_rows_[static_cast<std::size_t>(n) + 1] = row;
  for (std::int64_t j = n; j >= 1; --j) {
    conv_step_log(row, lover, j, species_[static_cast<std::size_t>(j) - 1], n);
    log_rows_[static_cast<std::size_t>(j)] = row;
    log_over_[static_cast<std::size_t>(j)] = lover;
  }
}

double SuffixTable::log_prob(std::int64_t j, std::int64_t t) const {
  if (j < 1 || j > n_ + 1) fail(Errc::domain, "suffix table column out of range");
  if (t < 0 || t > n_) return kNegInf;
  return log_rows_[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
}

double SuffixTable::prob(std::int64_t j, std::int64_t t) const {
  const double lp = log_prob(j, t);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

double SuffixTable::log_overflow(std::int64_t j) const {
  if (j < 1 || j > n_ + 1) fail(Errc::domain, "suffix table column out of range");
  return log_over_[static_cast<std::size_t>(j)];
}

double SuffixTable::column_total(std::int64_t j) const {
  if (j < 1 || j > n_ + 1) fail(Errc::domain, "suffix table column out of range");
  const double l = lse(window_log_total(log_rows_[static_cast<std::size_t>(j)]),
                       log_over_[static_cast<std::size_t>(j)]);
  return l == kNegInf ? 0.0 : std::exp(l);
}

const Pmf& SuffixTable::species(std::int64_t j) const {
  if (j < 1 || j > n_) fail(Errc::domain, "species index out of range");
  return species_[static_cast<std::size_t>(j) - 1];
}

// --------------------------------------------------------- t_distribution

Pmf t_distribution(const ModelSpec& spec, std::int64_t b, std::int64_t n, std::int64_t cap) {
  if (b < 0 || b >= n) fail(Errc::domain, "t_distribution needs 0 <= b < n");
  if (cap < 0) cap = n;
  std::vector<double> init(static_cast<std::size_t>(cap) + 1, 0.0);
  init[0] = 1.0;
  Pmf acc = Pmf::from_parts(0, std::move(init), 0.0, spec.tau(), true);
  for (std::int64_t j = b + 1; j <= n; ++j)
    acc = scaled_convolve(acc, ScaledVar{j, spec.species_pmf(j, cap / j)}, cap);
  return acc;
}

// ----------------------------------------------------------- brute force

SpectrumLaw spectrum_law_bruteforce(const ModelSpec& spec, std::int64_t n) {
  if (n < 1) fail(Errc::domain, "spectrum law needs n >= 1");
  if (n > kBruteForceGuard)
    fail(Errc::size_guard, "brute-force enumeration is guarded at n = " +
                               std::to_string(kBruteForceGuard));
  std::vector<Pmf> species = species_range(spec, n);
  // lp[j][y] = log P[Z_j = y] for 0 <= y <= n/j
  std::vector<std::vector<double>> lp(static_cast<std::size_t>(n) + 1);
  for (std::int64_t j = 1; j <= n; ++j) {
    auto& v = lp[static_cast<std::size_t>(j)];
    for (std::int64_t y = 0; y * j <= n; ++y)
      v.push_back(log_at(species[static_cast<std::size_t>(j) - 1], y));
  }

  std::vector<std::pair<Spectrum, double>> raw;
  Spectrum parts;  // built with j descending, reversed at the leaf
  double logZ = kNegInf;
  // enumerate partitions of n as multiplicity vectors, largest part first
  std::function<void(std::int64_t, std::int64_t, double)> rec =
      [&](std::int64_t j, std::int64_t rem, double lw) {
        if (lw == kNegInf) return;
        if (j == 0) {
          if (rem != 0) return;
          Spectrum key(parts.rbegin(), parts.rend());
          raw.emplace_back(std::move(key), lw);
          logZ = lse(logZ, lw);
          return;
        }
        for (std::int64_t y = 0; y * j <= rem; ++y) {
          if (j == 1 && y != rem) continue;  // last index must absorb the rest
          const double lwy = lw + lp[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)];
          if (y > 0) parts.emplace_back(j, y);
          rec(j - 1, rem - j * y, lwy);
          if (y > 0) parts.pop_back();
        }
      };
  rec(n, n, 0.0);

  if (logZ == kNegInf)
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  SpectrumLaw law;
  law.n = n;
  for (auto& [key, lw] : raw)
    if (lw != kNegInf) law.entries.emplace(std::move(key), std::exp(lw - logZ));
  return law;
}

// ----------------------------------------------------- conditional laws

namespace {

// prefix rows e[k] = law of sum_{j<=k} j*Z_j capped at n (log domain);
// returns rows 0..upto.
std::vector<std::vector<double>> prefix_rows(const std::vector<Pmf>& species, std::int64_t n,
                                             std::int64_t upto) {
  std::vector<std::vector<double>> rows;
  std::vector<double> row(static_cast<std::size_t>(n) + 1, kNegInf);
  row[0] = 0.0;
  double lover = kNegInf;
  rows.push_back(row);
  for (std::int64_t k = 1; k <= upto; ++k) {
    conv_step_log(row, lover, k, species[static_cast<std::size_t>(k) - 1], n);
    rows.push_back(row);
  }
  return rows;
}

double log_conv_at(const std::vector<double>& a, const std::vector<double>& b,
                   std::int64_t m) {
  double acc = kNegInf;
  for (std::int64_t t = 0; t <= m; ++t) {
    const double la = a[static_cast<std::size_t>(t)];
    const double lb = b[static_cast<std::size_t>(m - t)];
    if (la != kNegInf && lb != kNegInf) acc = lse(acc, la + lb);
  }
  return acc;
}

Pmf pmf_from_probs(std::vector<double> probs, double tau) {
  double sum = 0.0;
  for (double& p : probs) {
    if (p < 0.0) {
      if (p < -1e-10) fail(Errc::internal, "negative probability in derived law");
      p = 0.0;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(Errc::internal, "derived law mass deviates from 1 beyond round-off budget");
  const double rem = std::max(0.0, 1.0 - sum);
  return Pmf::from_parts(0, std::move(probs), rem, tau, rem > tau);
}

}  // namespace

Pmf conditional_marginal(const ModelSpec& spec, std::int64_t n, std::int64_t j) {
  if (j < 1 || j > n) fail(Errc::domain, "conditional_marginal needs 1 <= j <= n");
  SuffixTable st(spec, n);
  const double ld = st.log_prob(1, n);
  if (ld == kNegInf)
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  const auto pre = prefix_rows(
      [&] {
        std::vector<Pmf> sp;
        for (std::int64_t i = 1; i < j; ++i) sp.push_back(st.species(i));
        return sp;
      }(),
      n, j - 1);
  const auto& left = pre[static_cast<std::size_t>(j) - 1];
  // right rows come straight from the suffix table
  std::vector<double> right(static_cast<std::size_t>(n) + 1, kNegInf);
  for (std::int64_t t = 0; t <= n; ++t) right[static_cast<std::size_t>(t)] = st.log_prob(j + 1, t);

  std::vector<double> probs(static_cast<std::size_t>(n / j) + 1, 0.0);
  const Pmf& zj = st.species(j);
  for (std::int64_t y = 0; y * j <= n; ++y) {
    const double ly = log_at(zj, y);
    if (ly == kNegInf) continue;
    const double lnum = ly + log_conv_at(left, right, n - j * y);
    if (lnum != kNegInf) probs[static_cast<std::size_t>(y)] = std::exp(lnum - ld);
  }
  return pmf_from_probs(std::move(probs), spec.tau());
}

Pmf largest_component_law(const ModelSpec& spec, std::int64_t n) {
  if (n < 1) fail(Errc::domain, "largest_component_law needs n >= 1");
  SuffixTable st(spec, n);
  const double ld = st.log_prob(1, n);
  if (ld == kNegInf)
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  std::vector<Pmf> species;
  for (std::int64_t i = 1; i <= n; ++i) species.push_back(st.species(i));
  const auto pre = prefix_rows(species, n, n);

  // suffix0[k] = sum_{j=k}^n log P[Z_j = 0]
  std::vector<double> suffix0(static_cast<std::size_t>(n) + 2, 0.0);
  for (std::int64_t k = n; k >= 1; --k)
    suffix0[static_cast<std::size_t>(k)] =
        suffix0[static_cast<std::size_t>(k) + 1] + log_at(species[static_cast<std::size_t>(k) - 1], 0);

  // P[Y_n <= k] = prod_{j>k} P[Z_j=0] * P[T_{0k} = n] / P[T_{0n} = n]
  std::vector<double> cdf(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t k = 1; k <= n; ++k) {
    const double lnum =
        suffix0[static_cast<std::size_t>(k) + 1] + pre[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
    cdf[static_cast<std::size_t>(k)] = (lnum == kNegInf) ? 0.0 : std::exp(lnum - ld);
  }
  if (std::abs(cdf[static_cast<std::size_t>(n)] - 1.0) > 1e-9)
    fail(Errc::internal, "largest-component cdf fails to reach 1");
  std::vector<double> probs(static_cast<std::size_t>(n) + 1, 0.0);
  double prev = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double c = std::min(1.0, cdf[static_cast<std::size_t>(k)]);
    if (c < prev - 1e-12) fail(Errc::internal, "largest-component cdf not monotone");
    probs[static_cast<std::size_t>(k)] = std::max(0.0, c - prev);
    prev = std::max(prev, c);
  }
  return pmf_from_probs(std::move(probs), spec.tau());
}

Pmf smallest_component_law(const ModelSpec& spec, std::int64_t n) {
  if (n < 1) fail(Errc::domain, "smallest_component_law needs n >= 1");
  SuffixTable st(spec, n);
  const double ld = st.log_prob(1, n);
  if (ld == kNegInf)
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  // P[K_n > b] = prod_{j<=b} P[Z_j=0] * P[T_bn = n] / P[T_{0n} = n]
  std::vector<double> gtail(static_cast<std::size_t>(n) + 1, 0.0);
  double prefix0 = 0.0;
  gtail[0] = 1.0;
  for (std::int64_t b = 1; b <= n; ++b) {
    prefix0 += log_at(st.species(b), 0);
    const double lnum = prefix0 + st.log_prob(b + 1, n);
    gtail[static_cast<std::size_t>(b)] = (lnum == kNegInf) ? 0.0 : std::exp(lnum - ld);
  }
  std::vector<double> probs(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t b = 1; b <= n; ++b) {
    const double p = gtail[static_cast<std::size_t>(b) - 1] - gtail[static_cast<std::size_t>(b)];
    if (p < -1e-12) fail(Errc::internal, "smallest-component survival not monotone");
    probs[static_cast<std::size_t>(b)] = std::max(0.0, p);
  }
  return pmf_from_probs(std::move(probs), spec.tau());
}

Pmf component_count_law(const ModelSpec& spec, std::int64_t n, std::int64_t kmax) {
  if (n < 1 || kmax < 1) fail(Errc::domain, "component_count_law needs n >= 1, kmax >= 1");
  const std::size_t T = static_cast<std::size_t>(n) + 1;
  const std::size_t K = static_cast<std::size_t>(kmax) + 1;
  // m[t][k] = P[sum j Z_j = t, sum Z_j = k] (scaled); kover[t] holds k > kmax
  std::vector<std::vector<double>> m(T, std::vector<double>(K, 0.0));
  std::vector<double> kover(T, 0.0);
  m[0][0] = 1.0;
  for (std::int64_t j = 1; j <= n; ++j) {
    const Pmf z = spec.species_pmf(j, n / j);
    std::vector<std::vector<double>> nm(T, std::vector<double>(K, 0.0));
    std::vector<double> nkover(T, 0.0);
    for (std::int64_t y = std::max<std::int64_t>(0, z.offset());
         y <= z.max_support() && y * j <= n; ++y) {
      const double py = z.at(y);
      if (py == 0.0) continue;
      for (std::size_t t = 0; t + static_cast<std::size_t>(y * j) < T; ++t) {
        const std::size_t tt = t + static_cast<std::size_t>(y * j);
        nkover[tt] += py * kover[t];
        for (std::size_t k = 0; k < K; ++k) {
          const double v = m[t][k];
          if (v == 0.0) continue;
          if (k + static_cast<std::size_t>(y) < K)
            nm[tt][k + static_cast<std::size_t>(y)] += py * v;
          else
            nkover[tt] += py * v;
        }
      }
    }
    m = std::move(nm);
    kover = std::move(nkover);
    // keep the matrix away from the underflow floor
    double mx = 0.0;
    for (auto& row : m)
      for (double v : row) mx = std::max(mx, v);
    if (mx > 0.0 && mx < 1e-200) {
      for (auto& row : m)
        for (double& v : row) v /= mx;
      for (double& v : kover) v /= mx;
    }
  }
  double denom = kover[static_cast<std::size_t>(n)];
  for (std::size_t k = 0; k < K; ++k) denom += m[static_cast<std::size_t>(n)][k];
  if (denom <= 0.0)
    fail(Errc::conditioning_impossible, "P[T_{0n} = n] vanishes; conditioning undefined");
  std::vector<double> probs(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) probs[k] = m[static_cast<std::size_t>(n)][k] / denom;
  const double unc = kover[static_cast<std::size_t>(n)] / denom;
  return Pmf::from_parts(0, std::move(probs), unc, spec.tau(), unc > spec.tau());
}

// ----------------------------------------------- SpectrumLaw marginals

namespace {

Pmf accumulate_marginal(const SpectrumLaw& law,
                        const std::function<std::int64_t(const Spectrum&)>& stat) {
  std::map<std::int64_t, double> acc;
  for (const auto& [key, p] : law.entries) acc[stat(key)] += p;
  std::int64_t top = acc.empty() ? 0 : acc.rbegin()->first;
  std::vector<double> probs(static_cast<std::size_t>(top) + 1, 0.0);
  for (auto& [s, p] : acc) probs[static_cast<std::size_t>(s)] = p;
  return Pmf::from_parts(0, std::move(probs), law.uncovered, kDefaultTau,
                         law.uncovered > kDefaultTau);
}

}  // namespace

Pmf spectrum_marginal_count_of_size(const SpectrumLaw& law, std::int64_t j) {
  return accumulate_marginal(law, [j](const Spectrum& s) {
    for (auto& [jj, y] : s)
      if (jj == j) return y;
    return std::int64_t{0};
  });
}

Pmf spectrum_largest_law(const SpectrumLaw& law) {
  return accumulate_marginal(
      law, [](const Spectrum& s) { return s.empty() ? 0 : s.back().first; });
}

Pmf spectrum_smallest_law(const SpectrumLaw& law) {
  return accumulate_marginal(
      law, [](const Spectrum& s) { return s.empty() ? 0 : s.front().first; });
}

Pmf spectrum_count_law(const SpectrumLaw& law) {
  return accumulate_marginal(law, [](const Spectrum& s) { return spectrum_count(s); });
}

// -------------------------------------------------------------- limits

LimitLaws limit_laws(const ModelSpec& spec, double delta) {
  if (!(delta > 0.0) || delta > 1e-2) fail(Errc::domain, "delta must lie in (0, 1e-2]");
  std::int64_t J = 8;
  while (spec.mean_tail_bound(J) >= delta) {
    if (J > (std::int64_t{1} << 40)) fail(Errc::budget, "tail truncation index exploded");
    J *= 2;
  }
  // shrink J back to near the threshold
  std::int64_t lo = J / 2, hi = J;
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (spec.mean_tail_bound(mid) < delta)
      hi = mid;
    else
      lo = mid;
  }
  J = hi;

  LimitLaws out;
  out.truncation_j = J;
  out.delta = delta;

  // laws of sum_{j<=J} j*Z_j and 1 + sum_{j<=J} Z_j, caps grown until the
  // overflow bucket is below delta
  auto build = [&](bool weighted) {
    std::int64_t cap = 64;
    for (;;) {
      std::vector<double> probs(static_cast<std::size_t>(cap) + 1, 0.0);
      probs[0] = 1.0;
      Pmf acc = Pmf::from_parts(0, std::move(probs), 0.0, spec.tau(), true);
      for (std::int64_t j = 1; j <= J; ++j)
        acc = scaled_convolve(acc, ScaledVar{weighted ? j : 1, spec.species_pmf(j)}, cap);
      if (acc.tail() < delta || cap > 1'000'000) return acc;
      cap *= 2;
    }
  };
  out.t0_inf = build(true);
  {
    const Pmf counts = build(false);
    std::vector<double> probs(counts.probs());
    out.count_limit =
        Pmf::from_parts(counts.offset() + 1, std::move(probs), counts.tail(), counts.tau(), true);
  }

  double logz = 0.0;
  for (std::int64_t j = 1; j <= J; ++j) logz += spec.log_prob_zero(j);
  out.rho_connect_hi = std::exp(logz);
  out.rho_connect_lo = out.rho_connect_hi * (1.0 - delta);
  return out;
}

// ---------------------------------------------------------------- Q_n

SpectrumLaw qn_law(const ModelSpec& spec, std::int64_t n, double delta,
                   std::int64_t node_budget) {
  if (n < 1) fail(Errc::domain, "qn_law needs n >= 1");
  if (!(delta > 0.0) || delta > 1e-3) fail(Errc::domain, "delta must lie in (0, 1e-3]");

  // certified upper quantile of T_{0n}
  std::int64_t cap = std::max<std::int64_t>(2 * n, 64);
  Pmf tlaw = t_distribution(spec, 0, n, cap);
  while (tlaw.tail() >= delta / 4.0) {
    cap *= 2;
    if (cap > 1'000'000) fail(Errc::budget, "T distribution tail refuses to drop below delta");
    tlaw = t_distribution(spec, 0, n, cap);
  }
  std::int64_t t_max = cap;
  {
    double above = tlaw.tail();
    while (t_max > n && above + tlaw.at(t_max) < delta / 2.0) {
      above += tlaw.at(t_max);
      --t_max;
    }
  }

  std::vector<Pmf> species = species_range(spec, n);
  std::vector<std::vector<double>> lp(static_cast<std::size_t>(n) + 1);
  for (std::int64_t j = 1; j <= n; ++j) {
    auto& v = lp[static_cast<std::size_t>(j)];
    for (std::int64_t y = 0; y * j <= t_max; ++y)
      v.push_back(log_at(species[static_cast<std::size_t>(j) - 1], y));
  }

  // start shallow and deepen only while the certified coverage falls short;
  // the pruned mass usually decays much faster than the worst case
  double lthresh = std::log(delta) - 4.0 * std::log(10.0);
  for (int attempt = 0;; ++attempt) {
    SpectrumLaw law;
    law.n = n;
    double covered = 0.0;
    std::int64_t nodes = 0;
    Spectrum parts;
    bool budget_hit = false;
    std::function<void(std::int64_t, std::int64_t, double)> rec =
        [&](std::int64_t j, std::int64_t t, double lw) {
          if (budget_hit) return;
          if (++nodes > node_budget) {
            budget_hit = true;
            return;
          }
          if (lw < lthresh) return;
          if (j > n) {
            Spectrum key = parts;
            if (t < n) {
              // the unit at size n - t per the limit construction
              const std::int64_t g = n - t;
              auto it = std::lower_bound(
                  key.begin(), key.end(), g,
                  [](const auto& e, std::int64_t v) { return e.first < v; });
              if (it != key.end() && it->first == g)
                it->second += 1;
              else
                key.insert(it, {g, 1});
            }
            const double p = std::exp(lw);
            law.entries[key] += p;
            covered += p;
            return;
          }
          for (std::int64_t y = 0; t + y * j <= t_max; ++y) {
            const auto& v = lp[static_cast<std::size_t>(j)];
            if (static_cast<std::size_t>(y) >= v.size()) break;
            const double ly = v[static_cast<std::size_t>(y)];
            if (ly == kNegInf) continue;
            if (y > 0) parts.emplace_back(j, y);
            rec(j + 1, t + y * j, lw + ly);
            if (y > 0) parts.pop_back();
          }
        };
    rec(1, 0, 0.0);
    if (budget_hit) fail(Errc::budget, "qn_law enumeration exceeded the node budget");
    law.uncovered = std::max(0.0, 1.0 - covered);
    if (law.uncovered < delta) return law;
    if (attempt >= 7)
      fail(Errc::budget, "qn_law could not reach the requested coverage");
    lthresh -= 3.0 * std::log(10.0);
  }
}

// ------------------------------------------------------------------ TV

TvResult tv_distance(const SpectrumLaw& p, const SpectrumLaw& q) {
  if (p.n != q.n) fail(Errc::domain, "tv_distance needs laws with equal n");
  double sum = 0.0;
  auto ip = p.entries.begin();
  auto iq = q.entries.begin();
  while (ip != p.entries.end() || iq != q.entries.end()) {
    if (iq == q.entries.end() || (ip != p.entries.end() && ip->first < iq->first)) {
      sum += ip->second;
      ++ip;
    } else if (ip == p.entries.end() || iq->first < ip->first) {
      sum += iq->second;
      ++iq;
    } else {
      sum += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  return TvResult{0.5 * sum, p.uncovered + q.uncovered};
}

double tv_pmf(const Pmf& p, const Pmf& q) {
  const std::int64_t lo = std::min(p.offset(), q.offset());
  const std::int64_t hi = std::max(p.max_support(), q.max_support());
  double sum = 0.0;
  for (std::int64_t s = lo; s <= hi; ++s) sum += std::abs(p.at(s) - q.at(s));
  sum += std::abs(p.tail() - q.tail());
  return 0.5 * sum;
}

// --------------------------------------------------------- identities

double partition_function(const ModelSpec& spec, std::int64_t n) {
  const Family f = spec.family();
  if (f != Family::poisson_power && f != Family::forest_labelled_unrooted &&
      f != Family::forest_labelled_rooted)
    fail(Errc::family, "partition function is defined for Poisson-species families only");
  if (n < 1) fail(Errc::domain, "partition function needs n >= 1");
  double sum_a = 0.0;
  for (std::int64_t j = 1; j <= n; ++j) sum_a += spec.mean_z(j);
  SuffixTable st(spec, n);
  const double lp = st.log_prob(1, n);
  if (lp == kNegInf) return 0.0;
  return std::exp(sum_a + lp);
}

double poisson_recursion_residual(const ModelSpec& spec, std::int64_t b, std::int64_t n) {
  const Family f = spec.family();
  if (f != Family::poisson_power && f != Family::forest_labelled_unrooted &&
      f != Family::forest_labelled_rooted)
    fail(Errc::family, "recursion identity holds for Poisson-species families only");
  if (b < 0 || b >= n) fail(Errc::domain, "need 0 <= b < n");
  const Pmf t = t_distribution(spec, b, n);
  std::vector<double> ja(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t j = b + 1; j <= n; ++j)
    ja[static_cast<std::size_t>(j)] = static_cast<double>(j) * mean(spec.species_pmf(j));
  double residual = 0.0;
  for (std::int64_t l = b + 1; l <= n; ++l) {
    double rhs = 0.0;
    for (std::int64_t j = b + 1; j <= l; ++j) rhs += ja[static_cast<std::size_t>(j)] * t.at(l - j);
    residual = std::max(residual, std::abs(static_cast<double>(l) * t.at(l) - rhs));
  }
  return residual;
}

double general_recursion_residual(const ModelSpec& spec, std::int64_t b, std::int64_t n) {
  if (b < 0 || b >= n) fail(Errc::domain, "need 0 <= b < n");
  // species j = b+1..n; linear-domain prefix/suffix rows capped at n
  std::vector<Pmf> species;
  for (std::int64_t j = b + 1; j <= n; ++j) species.push_back(spec.species_pmf(j, n / j));
  auto zero_row = [&] {
    std::vector<double> r(static_cast<std::size_t>(n) + 1, 0.0);
    r[0] = 1.0;
    return r;
  };
  auto step = [&](std::vector<double> row, std::int64_t j, const Pmf& z) {
    std::vector<double> out(row.size(), 0.0);
    for (std::int64_t y = std::max<std::int64_t>(0, z.offset()); y <= z.max_support(); ++y) {
      const double py = z.at(y);
      if (py == 0.0) continue;
      const std::int64_t base = j * y;
      for (std::int64_t u = 0; u + base <= n; ++u)
        out[static_cast<std::size_t>(u + base)] += py * row[static_cast<std::size_t>(u)];
    }
    return out;
  };
  const std::int64_t cnt = n - b;
  std::vector<std::vector<double>> pre(static_cast<std::size_t>(cnt) + 1);
  pre[0] = zero_row();
  for (std::int64_t i = 1; i <= cnt; ++i)
    pre[static_cast<std::size_t>(i)] =
        step(pre[static_cast<std::size_t>(i) - 1], b + i, species[static_cast<std::size_t>(i) - 1]);
  std::vector<std::vector<double>> suf(static_cast<std::size_t>(cnt) + 2);
  suf[static_cast<std::size_t>(cnt) + 1] = zero_row();
  for (std::int64_t i = cnt; i >= 1; --i)
    suf[static_cast<std::size_t>(i)] =
        step(suf[static_cast<std::size_t>(i) + 1], b + i, species[static_cast<std::size_t>(i) - 1]);

  const std::vector<double>& t = pre[static_cast<std::size_t>(cnt)];
  // tj[i][m] = P[T - j Z_j = m] with j = b + i
  std::vector<std::vector<double>> tj(static_cast<std::size_t>(cnt) + 1);
  for (std::int64_t i = 1; i <= cnt; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    const auto& a = pre[static_cast<std::size_t>(i) - 1];
    const auto& c = suf[static_cast<std::size_t>(i) + 1];
    for (std::int64_t m = 0; m <= n; ++m) {
      double acc = 0.0;
      for (std::int64_t u = 0; u <= m; ++u)
        acc += a[static_cast<std::size_t>(u)] * c[static_cast<std::size_t>(m - u)];
      row[static_cast<std::size_t>(m)] = acc;
    }
    tj[static_cast<std::size_t>(i)] = std::move(row);
  }

  double residual = 0.0;
  for (std::int64_t l = b + 1; l <= n; ++l) {
    double line1 = 0.0, line2 = 0.0, line3 = 0.0;
    for (std::int64_t j = b + 1; j <= l; ++j) {
      const std::int64_t i = j - b;
      const Pmf& z = species[static_cast<std::size_t>(i) - 1];
      const double aj = mean(z);
      const double jlam = static_cast<double>(j) * aj;  // j^{-q} lambda(j)
      line1 += jlam * t[static_cast<std::size_t>(l - j)];
      // (1 - eps_{j1}) j^{-q} lambda(j) = j P[Z_j = 1]
      line2 += static_cast<double>(j) * z.at(1) * tj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l - j)] -
               jlam * t[static_cast<std::size_t>(l - j)];
      if (2 * j <= l)
        for (std::int64_t s = 2; j * s <= l; ++s)
          line3 += static_cast<double>(j) * static_cast<double>(s) * z.at(s) *
                   tj[static_cast<std::size_t>(i)][static_cast<std::size_t>(l - j * s)];
    }
    residual = std::max(residual,
                        std::abs(static_cast<double>(l) * t[static_cast<std::size_t>(l)] -
                                 (line1 + line2 + line3)));
  }
  return residual;
}

}  // namespace condrel
