#include "condrel/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace condrel {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::tilt_divergence: return "tilt-divergence";
    case Errc::inconsistent_model: return "inconsistent-model";
    case Errc::horizon: return "horizon";
    case Errc::size_guard: return "size-guard";
    case Errc::conditioning_impossible: return "conditioning-impossible";
    case Errc::family: return "family";
    case Errc::tail_unknown: return "tail-unknown";
    case Errc::budget: return "budget";
    case Errc::parse: return "parse";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

Pmf::Pmf() = default;

Pmf Pmf::from_parts(std::int64_t offset, std::vector<double> probs, double tail,
                    double tau, bool capped) {
  Pmf out;
  out.offset_ = offset;
  out.probs_ = std::move(probs);
  out.tail_ = tail;
  out.tau_ = tau;
  out.capped_ = capped;
  out.validate();
  return out;
}

Pmf Pmf::point_mass(std::int64_t at, double tau) {
  if (at < 0) fail(Errc::domain, "point mass at negative support point");
  return from_parts(at, {1.0}, 0.0, tau);
}

void Pmf::validate() const {
  if (offset_ < 0) fail(Errc::domain, "pmf offset must be non-negative");
  if (probs_.empty()) fail(Errc::domain, "pmf window must be nonempty");
  if (!(tau_ > 0.0)) fail(Errc::domain, "truncation tolerance must be positive");
  if (!(tail_ >= 0.0)) fail(Errc::domain, "pmf tail must be non-negative");
  for (double p : probs_) {
    if (!(p >= -1e-12) || !(p <= 1.0 + 1e-12) || !std::isfinite(p))
      fail(Errc::domain, "pmf entry outside [0,1]");
  }
  double t = total();
  if (std::abs(t - 1.0) > kMassTol)
    fail(Errc::domain, "pmf mass not conserved: total = " + std::to_string(t));
  if (!capped_ && tail_ > tau_ * (1.0 + 1e-6))
    fail(Errc::domain, "pmf tail exceeds declared truncation tolerance");
}

double Pmf::at(std::int64_t s) const {
  if (s < offset_ || s > max_support()) return 0.0;
  return probs_[static_cast<std::size_t>(s - offset_)];
}

double Pmf::total() const {
  double s = tail_;
  for (double p : probs_) s += p;
  return s;
}

double Pmf::cdf(std::int64_t s) const {
  double acc = 0.0;
  std::int64_t hi = std::min(s, max_support());
  for (std::int64_t i = offset_; i <= hi; ++i) acc += probs_[static_cast<std::size_t>(i - offset_)];
  return acc;
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || tau > 1e-6) fail(Errc::domain, "tau must lie in (0, 1e-6]");
}

}  // namespace

Pmf pmf_poisson(double mean, double tau, std::int64_t min_support) {
  check_tau(tau);
  if (!(mean >= 0.0) || !std::isfinite(mean))
    fail(Errc::domain, "poisson mean must be finite and non-negative");
  if (mean == 0.0) return Pmf::point_mass(0, tau);
  if (mean > 5e6) fail(Errc::domain, "poisson mean too large for a dense window");

  const double log_mean = std::log(mean);
  const std::int64_t guard =
      std::max(static_cast<std::int64_t>(mean + 60.0 * std::sqrt(mean) + 80.0), min_support);
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(std::min<std::int64_t>(guard + 1, 1 << 20)));
  double sum = 0.0;
  double flushed = 0.0;
  for (std::int64_t s = 0;; ++s) {
    double lp = -mean + static_cast<double>(s) * log_mean - std::lgamma(static_cast<double>(s) + 1.0);
    double v = std::exp(lp);
    if (v < kFlush) {
      flushed += v;
      v = 0.0;
    }
    probs.push_back(v);
    sum += v;
    if (s >= static_cast<std::int64_t>(mean) && s >= min_support && 1.0 - sum < tau) break;
    if (s > guard) fail(Errc::internal, "poisson truncation failed to converge");
  }
  double tail = std::max(0.0, 1.0 - sum);
  return Pmf::from_parts(0, std::move(probs), tail, tau);
}

Pmf pmf_negbinom(double m, double p, double tau, std::int64_t min_support) {
  check_tau(tau);
  if (!(m > 0.0) || !std::isfinite(m)) fail(Errc::domain, "negbinom shape must be positive");
  if (!(p > 0.0) || !(p < 1.0)) fail(Errc::domain, "negbinom p must lie in (0,1)");
  const double mean = m * p / (1.0 - p);
  if (mean > 5e6) fail(Errc::domain, "negbinom mean too large for a dense window");

  const double l0 = m * std::log1p(-p);
  const std::int64_t guard = std::max(
      static_cast<std::int64_t>(mean + 80.0 * std::sqrt(mean + 1.0) + 200.0), min_support);
  std::vector<double> probs;
  double sum = 0.0;
  if (l0 >= -700.0) {
    // linear-space recurrence
    double t = std::exp(l0);
    for (std::int64_t s = 0;; ++s) {
      probs.push_back(t < kFlush ? 0.0 : t);
      sum += t;
      if (s >= static_cast<std::int64_t>(mean) && s >= min_support && 1.0 - sum < tau) break;
      if (s > guard) fail(Errc::internal, "negbinom truncation failed to converge");
      t *= p * (m + static_cast<double>(s)) / (static_cast<double>(s) + 1.0);
    }
  } else {
    // (1-p)^m underflows: accumulate the recurrence in log space
    const double log_p = std::log(p);
    double lt = l0;
    for (std::int64_t s = 0;; ++s) {
      double v = std::exp(lt);
      probs.push_back(v < kFlush ? 0.0 : v);
      sum += v;
      if (s >= static_cast<std::int64_t>(mean) && s >= min_support && 1.0 - sum < tau) break;
      if (s > guard) fail(Errc::internal, "negbinom truncation failed to converge");
      lt += log_p + std::log(m + static_cast<double>(s)) - std::log(static_cast<double>(s) + 1.0);
    }
  }
  double tail = std::max(0.0, 1.0 - sum);
  return Pmf::from_parts(0, std::move(probs), tail, tau);
}

Pmf tilt(const Pmf& law, std::int64_t j, double x) {
  if (j < 1) fail(Errc::domain, "tilt index j must be >= 1");
  if (!(x > 0.0) || !std::isfinite(x)) fail(Errc::domain, "tilt parameter x must be positive");
  if (x == 1.0) return law;

  const auto& P = law.probs();
  const double lx = std::log(x);
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> lw(P.size(), ninf);
  double peak = ninf;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i] <= 0.0) continue;
    std::int64_t s = law.offset() + static_cast<std::int64_t>(i);
    lw[i] = std::log(P[i]) + static_cast<double>(j * s) * lx;
    peak = std::max(peak, lw[i]);
  }
  if (peak == ninf) fail(Errc::domain, "cannot tilt a law with empty window mass");

  double norm = 0.0;
  for (double v : lw)
    if (v != ninf) norm += std::exp(v - peak);

  double tail_new = 0.0;
  if (law.tail() > 0.0) {
    const double lt = std::log(law.tail()) +
                      static_cast<double>(j * (law.max_support() + 1)) * lx;
    if (x < 1.0) {
      tail_new = std::exp(lt - peak) / norm;
    } else {
      // Certify decay from the last two populated window points; the
      // unseen tail is bounded by a geometric continuation.
      std::size_t i2 = P.size();
      while (i2 > 0 && lw[i2 - 1] == ninf) --i2;
      if (i2 < 2 || lw[i2 - 2] == ninf)
        fail(Errc::tilt_divergence, "cannot certify summability of tilt with x > 1");
      double step = lw[i2 - 1] - lw[i2 - 2];
      double ratio = std::exp(step);
      if (!(ratio < 1.0))
        fail(Errc::tilt_divergence, "tilted weights not decaying on the window; x > 1 tilt diverges");
      tail_new = std::exp(lt - peak) / (1.0 - ratio) / norm;
      if (!(tail_new < 1e-3))
        fail(Errc::tilt_divergence, "tilted tail mass not negligible; refusing x > 1 tilt");
    }
  }

  std::vector<double> out(P.size(), 0.0);
  const double scale = (1.0 - tail_new) / norm;
  for (std::size_t i = 0; i < P.size(); ++i)
    if (lw[i] != ninf) out[i] = std::exp(lw[i] - peak) * scale;
  // tilting can only bound the unseen tail, so the result carries an
  // honestly widened truncation tolerance when needed
  const double tau_new = std::max(law.tau(), 2.0 * tail_new);
  return Pmf::from_parts(law.offset(), std::move(out), tail_new, tau_new, law.capped());
}

MeanResult mean_with_bound(const Pmf& law) {
  double m = 0.0;
  for (std::int64_t s = law.offset(); s <= law.max_support(); ++s)
    m += static_cast<double>(s) * law.at(s);
  return {m, law.tail() * static_cast<double>(law.max_support() + 1)};
}

double mean(const Pmf& law) { return mean_with_bound(law).value; }

Pmf scaled_convolve(const Pmf& acc, const ScaledVar& v, std::int64_t cap) {
  if (cap < 0) fail(Errc::domain, "convolution cap must be non-negative");
  if (v.j < 1) fail(Errc::domain, "component size j must be >= 1");
  if (acc.offset() != 0) fail(Errc::domain, "accumulator window must start at 0");
  if (acc.max_support() > cap) fail(Errc::domain, "accumulator exceeds the cap");

  const auto& a = acc.probs();
  const auto& z = v.law.probs();
  std::vector<double> out(static_cast<std::size_t>(cap) + 1, 0.0);
  double overflow = acc.tail();

  for (std::size_t yi = 0; yi < z.size(); ++yi) {
    const double pz = z[yi];
    if (pz == 0.0) continue;
    const std::int64_t shift = v.j * (v.law.offset() + static_cast<std::int64_t>(yi));
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (a[t] == 0.0) continue;
      const std::int64_t u = static_cast<std::int64_t>(t) + shift;
      const double w = pz * a[t];
      if (u <= cap)
        out[static_cast<std::size_t>(u)] += w;
      else
        overflow += w;
    }
  }
  // Mass of v beyond its window lands at unknown (large) points; book it as
  // overflow.  It is bounded by v.law.tau().
  overflow += v.law.tail() * (1.0 - acc.tail());

  for (double& p : out) {
    if (p != 0.0 && p < kFlush) {
      overflow += p;
      p = 0.0;
    }
  }

  double got = overflow;
  for (double p : out) got += p;
  const double want = acc.total() * v.law.total();
  if (std::abs(got - want) > kMassTol)
    fail(Errc::internal, "scaled_convolve lost probability mass");
  return Pmf::from_parts(0, std::move(out), overflow, acc.tau(), /*capped=*/true);
}

EpsilonProfile epsilon_profile(const Pmf& law, std::int64_t j, double q, double lambda_j) {
  if (j < 1) fail(Errc::domain, "epsilon profile needs j >= 1");
  if (!(lambda_j > 0.0)) fail(Errc::domain, "lambda_j must be positive");
  const double a = mean(law);
  const double jq1 = std::pow(static_cast<double>(j), q + 1.0);
  if (!(a > 0.0)) fail(Errc::domain, "law has zero mean; epsilon profile undefined");
  if (std::abs(a * jq1 - lambda_j) > 1e-9 * std::abs(lambda_j))
    fail(Errc::domain, "lambda_j inconsistent with the law mean");

  EpsilonProfile out;
  const std::int64_t smax = std::max<std::int64_t>(law.max_support(), 1);
  out.eps.resize(static_cast<std::size_t>(smax), 0.0);
  out.eps[0] = 1.0 - law.at(1) * jq1 / lambda_j;
  double rhs = 0.0;
  for (std::int64_t s = 2; s <= smax; ++s) {
    const double e = law.at(s) * jq1 / lambda_j;
    out.eps[static_cast<std::size_t>(s - 1)] = e;
    rhs += static_cast<double>(s) * e;
  }
  out.identity_residual = std::abs(out.eps[0] - rhs);
  if (out.identity_residual > 1e-9)
    fail(Errc::inconsistent_model, "epsilon identity eps_{j1} = sum s*eps_{js} violated");
  return out;
}

double epsilon_star_negbinom(std::int64_t j, std::int64_t s, double rho) {
  if (j < 1 || s < 2) fail(Errc::domain, "epsilon_star needs j >= 1, s >= 2");
  if (!(rho > 0.0) || !(rho < 1.0)) fail(Errc::domain, "rho must lie in (0,1)");
  const double rj = std::pow(rho, static_cast<double>(j));
  return (1.0 - rj) * std::pow(rj, static_cast<double>(s - 1)) / static_cast<double>(s);
}

}  // namespace condrel
