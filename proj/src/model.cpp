#include "condrel/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

namespace condrel {

const char* family_name(Family f) {
  switch (f) {
    case Family::poisson_power: return "poisson-power";
    case Family::forest_unlabelled_unrooted: return "forest-unlabelled-unrooted";
    case Family::forest_unlabelled_rooted: return "forest-unlabelled-rooted";
    case Family::forest_labelled_unrooted: return "forest-labelled-unrooted";
    case Family::forest_labelled_rooted: return "forest-labelled-rooted";
    case Family::custom_table: return "custom-table";
  }
  return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
  for (Family f : {Family::poisson_power, Family::forest_unlabelled_unrooted,
                   Family::forest_unlabelled_rooted, Family::forest_labelled_unrooted,
                   Family::forest_labelled_rooted, Family::custom_table})
    if (name == family_name(f)) return f;
  return std::nullopt;
}

namespace {

bool is_forest(Family f) {
  return f == Family::forest_unlabelled_unrooted || f == Family::forest_unlabelled_rooted ||
         f == Family::forest_labelled_unrooted || f == Family::forest_labelled_rooted;
}

double forest_q(Family f) {
  return (f == Family::forest_unlabelled_unrooted || f == Family::forest_labelled_unrooted)
             ? 1.5
             : 0.5;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// cumulative log factorial, extended on demand
double log_factorial(std::int64_t n) {
  static std::vector<double> cache{0.0};  // cache[k] = log k!
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<std::int64_t>(cache.size()) <= n)
    cache.push_back(cache.back() + std::log(static_cast<double>(cache.size())));
  return cache[static_cast<std::size_t>(n)];
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------- LambdaFn

struct LambdaFn::Impl {
  std::function<double(std::int64_t)> eval;
  std::string descriptor;
  std::optional<double> sup_bound;
  mutable std::vector<double> run_max;  // run_max[l-1] = max_{s<=l} lambda(s)
  mutable std::mutex mu;
};

LambdaFn::LambdaFn() {
  impl_ = std::make_shared<Impl>();
  impl_->eval = [](std::int64_t) { return 1.0; };
  impl_->descriptor = "const:1";
  impl_->sup_bound = 1.0;
}

LambdaFn LambdaFn::constant(double c) {
  if (!(c > 0.0)) fail(Errc::domain, "lambda must be positive");
  return custom([c](std::int64_t) { return c; }, "const:" + fmt_double(c), c);
}

LambdaFn LambdaFn::custom(std::function<double(std::int64_t)> f, std::string descriptor,
                          std::optional<double> sup_bound) {
  LambdaFn out;
  out.impl_ = std::make_shared<Impl>();
  out.impl_->eval = std::move(f);
  out.impl_->descriptor = std::move(descriptor);
  out.impl_->sup_bound = sup_bound;
  return out;
}

double LambdaFn::operator()(std::int64_t j) const {
  const double v = impl_->eval(j);
  if (!(v > 0.0)) fail(Errc::domain, "lambda(j) must be positive");
  return v;
}

double LambdaFn::running_max(std::int64_t l) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  while (static_cast<std::int64_t>(impl_->run_max.size()) < l) {
    const std::int64_t j = static_cast<std::int64_t>(impl_->run_max.size()) + 1;
    const double v = impl_->eval(j);
    impl_->run_max.push_back(impl_->run_max.empty() ? v : std::max(impl_->run_max.back(), v));
  }
  return impl_->run_max[static_cast<std::size_t>(l) - 1];
}

const std::string& LambdaFn::descriptor() const { return impl_->descriptor; }
std::optional<double> LambdaFn::sup_bound() const { return impl_->sup_bound; }

// ---------------------------------------------------------------- ModelSpec

struct ModelSpec::Impl {
  Family family = Family::poisson_power;
  double q = 1.5;
  double A = 1.0;
  LambdaFn lambda;
  double tau = kDefaultTau;
  int horizon = 400;
  double tilt_x = 1.0;
  std::map<std::int64_t, Pmf> overrides;  // also the table for custom-table
  std::optional<double> tail_coeff;

  // lazy forest data, shared across copies
  struct ForestData {
    TreeCounts counts;
    OtterConstants otter;
  };
  mutable std::shared_ptr<ForestData> forest;

  mutable std::map<std::int64_t, Pmf> pmf_cache;
  mutable std::vector<double> lambda_max;  // running max of lambda_value
  mutable std::mutex mu;

  Impl() = default;
  Impl(const Impl& o)
      : family(o.family),
        q(o.q),
        A(o.A),
        lambda(o.lambda),
        tau(o.tau),
        horizon(o.horizon),
        tilt_x(o.tilt_x),
        overrides(o.overrides),
        tail_coeff(o.tail_coeff),
        forest(o.forest) {}

  const ForestData& forest_data() const {
    std::lock_guard<std::mutex> lock(mu);
    if (!forest) {
      auto fd = std::make_shared<ForestData>();
      fd->counts = tree_counts(horizon);
      fd->otter = otter_constants(fd->counts);
      forest = std::move(fd);
    }
    return *forest;
  }
};

ModelSpec::ModelSpec(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

ModelSpec ModelSpec::poisson_power(double A, double q, LambdaFn lambda, double tau) {
  if (!(A > 0.0)) fail(Errc::domain, "amplitude A must be positive");
  if (!(q > 0.0)) fail(Errc::domain, "convergence exponent q must be positive");
  auto impl = std::make_shared<Impl>();
  impl->family = Family::poisson_power;
  impl->A = A;
  impl->q = q;
  impl->lambda = std::move(lambda);
  impl->tau = tau;
  return ModelSpec(std::move(impl));
}

ModelSpec ModelSpec::forest(Family family, int horizon, double tau) {
  if (!is_forest(family)) fail(Errc::domain, "forest() needs a forest family");
  if (horizon < 1) fail(Errc::domain, "horizon must be >= 1");
  if (horizon > 600) fail(Errc::domain, "horizon above 600 exceeds double range for NB shapes");
  auto impl = std::make_shared<Impl>();
  impl->family = family;
  impl->q = forest_q(family);
  impl->horizon = horizon;
  impl->tau = tau;
  return ModelSpec(std::move(impl));
}

ModelSpec ModelSpec::custom_table(std::map<std::int64_t, Pmf> table, double q, double tau,
                                  std::optional<double> tail_coeff) {
  if (!(q > 0.0)) fail(Errc::domain, "convergence exponent q must be positive");
  if (table.empty()) fail(Errc::domain, "custom table must not be empty");
  for (const auto& [j, law] : table) {
    (void)law;
    if (j < 1) fail(Errc::domain, "custom table keys must be >= 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->family = Family::custom_table;
  impl->q = q;
  impl->tau = tau;
  impl->overrides = std::move(table);
  impl->tail_coeff = tail_coeff;
  return ModelSpec(std::move(impl));
}

ModelSpec ModelSpec::tilted(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) fail(Errc::domain, "tilt parameter must be positive");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->pmf_cache.clear();
  impl->lambda_max.clear();
  impl->tilt_x = impl_->tilt_x * x;
  return ModelSpec(std::move(impl));
}

ModelSpec ModelSpec::with_override(std::int64_t j, Pmf law) const {
  if (j < 1) fail(Errc::domain, "override index must be >= 1");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->pmf_cache.clear();
  impl->lambda_max.clear();
  impl->overrides.insert_or_assign(j, std::move(law));
  return ModelSpec(std::move(impl));
}

Family ModelSpec::family() const { return impl_->family; }
double ModelSpec::q() const { return impl_->q; }
double ModelSpec::tau() const { return impl_->tau; }
double ModelSpec::tilt_x() const { return impl_->tilt_x; }
int ModelSpec::horizon() const { return impl_->horizon; }
double ModelSpec::amplitude() const { return impl_->A; }
const LambdaFn& ModelSpec::lambda_fn() const { return impl_->lambda; }

const TreeCounts& ModelSpec::trees() const {
  if (!is_forest(impl_->family)) fail(Errc::family, "tree counts exist only for forest families");
  return impl_->forest_data().counts;
}

const OtterConstants& ModelSpec::otter() const {
  if (!is_forest(impl_->family)) fail(Errc::family, "otter constants exist only for forest families");
  return impl_->forest_data().otter;
}

Pmf ModelSpec::species_pmf(std::int64_t j, std::int64_t min_support) const {
  if (j < 1) fail(Errc::domain, "species index j must be >= 1");
  const bool analytic = !impl_->overrides.count(j) && impl_->family != Family::custom_table;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->pmf_cache.find(j);
    if (it != impl_->pmf_cache.end() &&
        (!analytic || it->second.max_support() >= min_support))
      return it->second;
  }

  const double x = impl_->tilt_x;
  Pmf law;
  auto ov = impl_->overrides.find(j);
  if (ov != impl_->overrides.end()) {
    law = (x == 1.0) ? ov->second : tilt(ov->second, j, x);
  } else {
    switch (impl_->family) {
      case Family::poisson_power: {
        const double a = impl_->A * impl_->lambda(j) *
                         std::pow(static_cast<double>(j), -impl_->q - 1.0) *
                         std::pow(x, static_cast<double>(j));
        law = pmf_poisson(a, impl_->tau, min_support);
        break;
      }
      case Family::forest_unlabelled_unrooted:
      case Family::forest_unlabelled_rooted: {
        if (j > impl_->horizon)
          fail(Errc::horizon, "j = " + std::to_string(j) + " beyond tree-count horizon " +
                                  std::to_string(impl_->horizon));
        const auto& fd = impl_->forest_data();
        const mpz_class& cnt = (impl_->family == Family::forest_unlabelled_unrooted)
                                   ? fd.counts.m[static_cast<std::size_t>(j)]
                                   : fd.counts.r[static_cast<std::size_t>(j)];
        const double px = fd.otter.rho * x;
        if (!(px < 1.0))
          fail(Errc::tilt_divergence, "tilt x >= 1/rho makes the forest NB law non-summable");
        const double p = std::exp(static_cast<double>(j) * std::log(px));
        law = pmf_negbinom(mpz_get_d(cnt.get_mpz_t()), p, impl_->tau, min_support);
        break;
      }
      case Family::forest_labelled_unrooted:
      case Family::forest_labelled_rooted: {
        const double top = (impl_->family == Family::forest_labelled_unrooted) ? 2.0 : 1.0;
        const double log_a = (static_cast<double>(j) - top) * std::log(static_cast<double>(j)) -
                             log_factorial(j) - static_cast<double>(j) +
                             static_cast<double>(j) * std::log(x);
        law = pmf_poisson(std::exp(log_a), impl_->tau, min_support);
        break;
      }
      case Family::custom_table:
        fail(Errc::horizon, "custom table has no row for j = " + std::to_string(j));
    }
  }

  std::lock_guard<std::mutex> lock(impl_->mu);
  auto [it, inserted] = impl_->pmf_cache.emplace(j, law);
  if (!inserted && law.max_support() > it->second.max_support()) it->second = std::move(law);
  return it->second;
}

double ModelSpec::mean_z(std::int64_t j) const {
  if (impl_->overrides.count(j) || impl_->family == Family::custom_table)
    return mean(species_pmf(j));
  const double x = impl_->tilt_x;
  switch (impl_->family) {
    case Family::poisson_power:
      return impl_->A * impl_->lambda(j) * std::pow(static_cast<double>(j), -impl_->q - 1.0) *
             std::pow(x, static_cast<double>(j));
    case Family::forest_unlabelled_unrooted:
    case Family::forest_unlabelled_rooted: {
      if (j > impl_->horizon) fail(Errc::horizon, "j beyond tree-count horizon");
      const auto& fd = impl_->forest_data();
      const mpz_class& cnt = (impl_->family == Family::forest_unlabelled_unrooted)
                                 ? fd.counts.m[static_cast<std::size_t>(j)]
                                 : fd.counts.r[static_cast<std::size_t>(j)];
      const double px = fd.otter.rho * x;
      if (!(px < 1.0)) fail(Errc::tilt_divergence, "non-summable tilt");
      const double p = std::exp(static_cast<double>(j) * std::log(px));
      return mpz_get_d(cnt.get_mpz_t()) * p / (1.0 - p);
    }
    case Family::forest_labelled_unrooted:
    case Family::forest_labelled_rooted: {
      const double top = (impl_->family == Family::forest_labelled_unrooted) ? 2.0 : 1.0;
      return std::exp((static_cast<double>(j) - top) * std::log(static_cast<double>(j)) -
                      log_factorial(j) - static_cast<double>(j) +
                      static_cast<double>(j) * std::log(x));
    }
    case Family::custom_table: break;
  }
  fail(Errc::internal, "unreachable");
}

double ModelSpec::lambda_value(std::int64_t j) const {
  return mean_z(j) * std::pow(static_cast<double>(j), impl_->q + 1.0);
}

double ModelSpec::lambda_plus(std::int64_t l) const {
  if (l < 1) fail(Errc::domain, "lambda_plus needs l >= 1");
  std::int64_t have;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    have = static_cast<std::int64_t>(impl_->lambda_max.size());
  }
  if (have < l) {
    std::vector<double> vals;
    for (std::int64_t j = have + 1; j <= l; ++j) vals.push_back(lambda_value(j));
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (std::int64_t j = have + 1; j <= l; ++j) {
      if (static_cast<std::int64_t>(impl_->lambda_max.size()) >= j) continue;
      const double v = vals[static_cast<std::size_t>(j - have - 1)];
      impl_->lambda_max.push_back(
          impl_->lambda_max.empty() ? v : std::max(impl_->lambda_max.back(), v));
    }
  }
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->lambda_max[static_cast<std::size_t>(l) - 1];
}

double ModelSpec::log_prob_zero(std::int64_t j) const {
  if (impl_->overrides.count(j) || impl_->family == Family::custom_table) {
    const double p0 = species_pmf(j).at(0);
    if (!(p0 > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(p0);
  }
  switch (impl_->family) {
    case Family::poisson_power:
    case Family::forest_labelled_unrooted:
    case Family::forest_labelled_rooted:
      return -mean_z(j);  // Poisson
    case Family::forest_unlabelled_unrooted:
    case Family::forest_unlabelled_rooted: {
      if (j > impl_->horizon) fail(Errc::horizon, "j beyond tree-count horizon");
      const auto& fd = impl_->forest_data();
      const mpz_class& cnt = (impl_->family == Family::forest_unlabelled_unrooted)
                                 ? fd.counts.m[static_cast<std::size_t>(j)]
                                 : fd.counts.r[static_cast<std::size_t>(j)];
      const double px = fd.otter.rho * impl_->tilt_x;
      const double p = std::exp(static_cast<double>(j) * std::log(px));
      return mpz_get_d(cnt.get_mpz_t()) * std::log1p(-p);
    }
    case Family::custom_table: break;
  }
  fail(Errc::internal, "unreachable");
}

double ModelSpec::mean_tail_bound(std::int64_t J) const {
  if (J < 1) fail(Errc::domain, "tail bound needs J >= 1");
  const double q = impl_->q;
  const double Jq = std::pow(static_cast<double>(J), -q) / q;  // integral bound on sum j^{-q-1}
  if (impl_->tilt_x > 1.0)
    fail(Errc::tail_unknown, "no mean tail bound for tilts with x > 1");
  switch (impl_->family) {
    case Family::poisson_power: {
      auto sup = impl_->lambda.sup_bound();
      if (!sup) fail(Errc::tail_unknown, "lambda has no declared upper bound");
      return impl_->A * *sup * Jq;
    }
    case Family::forest_unlabelled_unrooted:
    case Family::forest_unlabelled_rooted: {
      // a_j j^{q+1} converges to the otter constant; use the observed maximum
      // over the horizon with a safety margin.
      double chat = 0.0;
      for (std::int64_t j = 1; j <= impl_->horizon; ++j)
        chat = std::max(chat, mean_z(j) * std::pow(static_cast<double>(j), q + 1.0));
      return 1.05 * chat * Jq;
    }
    case Family::forest_labelled_unrooted:
    case Family::forest_labelled_rooted:
      // j! e^j >= sqrt(2 pi j) j^j gives a_j <= j^{-q-1}/sqrt(2 pi)
      return Jq / std::sqrt(2.0 * M_PI);
    case Family::custom_table: {
      if (!impl_->tail_coeff)
        fail(Errc::tail_unknown, "custom table declares no tail coefficient");
      return *impl_->tail_coeff * Jq;
    }
  }
  fail(Errc::internal, "unreachable");
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os << "family=" << family_name(impl_->family) << ";q=" << fmt_double(impl_->q)
     << ";A=" << fmt_double(impl_->A) << ";lambda=" << impl_->lambda.descriptor()
     << ";tau=" << fmt_double(impl_->tau) << ";horizon=" << impl_->horizon
     << ";tilt=" << fmt_double(impl_->tilt_x);
  if (impl_->tail_coeff) os << ";tail-coeff=" << fmt_double(*impl_->tail_coeff);
  for (const auto& [j, law] : impl_->overrides) {
    os << ";row" << j << "=" << law.offset() << ":";
    for (double p : law.probs()) os << fmt_double(p) << ",";
    os << "|" << fmt_double(law.tail());
  }
  return os.str();
}

std::string ModelSpec::fingerprint() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(describe())));
  return buf;
}

// ------------------------------------------------------------- file format

namespace {

struct Line {
  int number;
  std::string text;
};

[[noreturn]] void parse_fail(const std::string& src, int line, const std::string& msg) {
  fail(Errc::parse, src + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& src, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    parse_fail(src, line, "expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& src, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    parse_fail(src, line, "expected an integer, got '" + v + "'");
  }
}

}  // namespace

ModelSpec ModelSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse, path + ": cannot open model file");
  return parse(in, path);
}

ModelSpec ModelSpec::parse(std::istream& in, const std::string& src) {
  std::map<std::string, std::pair<int, std::string>> kv;
  // rows[j] -> (s -> prob), remembering the first line of each j for errors
  std::map<std::int64_t, std::map<std::int64_t, double>> rows;
  std::map<std::int64_t, int> row_line;

  bool in_table = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line == "[pmf-table]") {
        in_table = true;
        continue;
      }
      parse_fail(src, lineno, "unknown section '" + line + "'");
    }
    if (in_table) {
      std::istringstream ls(line);
      std::string js, ss, ps, extra;
      if (!(ls >> js >> ss >> ps) || (ls >> extra))
        parse_fail(src, lineno, "table rows must be 'j s probability'");
      const long j = parse_long(src, lineno, js);
      const long s = parse_long(src, lineno, ss);
      const double p = parse_double(src, lineno, ps);
      if (j < 1 || s < 0) parse_fail(src, lineno, "table row needs j >= 1 and s >= 0");
      if (p < 0.0 || p > 1.0) parse_fail(src, lineno, "probability outside [0,1]");
      if (!rows[j].emplace(s, p).second)
        parse_fail(src, lineno, "duplicate table entry for (j,s)");
      row_line.emplace(j, lineno);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(src, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) parse_fail(src, lineno, "expected 'key = value'");
    if (!kv.emplace(key, std::make_pair(lineno, val)).second)
      parse_fail(src, lineno, "duplicate key '" + key + "'");
  }

  auto take = [&](const std::string& key) -> std::optional<std::pair<int, std::string>> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };

  auto fam_kv = take("family");
  if (!fam_kv) fail(Errc::parse, src + ": missing required key 'family'");
  auto fam = family_from_name(fam_kv->second);
  if (!fam) parse_fail(src, fam_kv->first, "unknown family '" + fam_kv->second + "'");

  double tau = kDefaultTau;
  if (auto v = take("tau")) {
    tau = parse_double(src, v->first, v->second);
    if (!(tau > 0.0) || tau > 1e-6) parse_fail(src, v->first, "tau must lie in (0, 1e-6]");
  }
  double tilt_x = 1.0;
  if (auto v = take("tilt")) tilt_x = parse_double(src, v->first, v->second);

  ModelSpec spec = [&] {
    switch (*fam) {
      case Family::poisson_power: {
        double A = 1.0, q = 0.0;
        if (auto v = take("A")) A = parse_double(src, v->first, v->second);
        auto qv = take("q");
        if (!qv) fail(Errc::parse, src + ": poisson-power requires 'q'");
        q = parse_double(src, qv->first, qv->second);
        LambdaFn lam = LambdaFn::constant(1.0);
        if (auto v = take("lambda")) {
          const std::string& d = v->second;
          if (d.rfind("const:", 0) != 0)
            parse_fail(src, v->first, "lambda descriptor must be 'const:<value>'");
          lam = LambdaFn::constant(parse_double(src, v->first, d.substr(6)));
        }
        return ModelSpec::poisson_power(A, q, lam, tau);
      }
      case Family::custom_table: {
        auto qv = take("q");
        if (!qv) fail(Errc::parse, src + ": custom-table requires 'q'");
        const double q = parse_double(src, qv->first, qv->second);
        std::optional<double> coeff;
        if (auto v = take("tail-coeff")) coeff = parse_double(src, v->first, v->second);
        if (rows.empty()) fail(Errc::parse, src + ": custom-table requires a [pmf-table] section");
        std::map<std::int64_t, Pmf> table;
        for (auto& [j, ps] : rows) {
          std::int64_t smax = ps.rbegin()->first;
          std::vector<double> probs(static_cast<std::size_t>(smax) + 1, 0.0);
          double sum = 0.0;
          for (auto& [s, p] : ps) {
            probs[static_cast<std::size_t>(s)] = p;
            sum += p;
          }
          if (sum > 1.0 + kMassTol || 1.0 - sum > tau * (1.0 + 1e-6))
            parse_fail(src, row_line[j],
                       "probabilities for j = " + std::to_string(j) +
                           " must sum to 1 (up to tau)");
          table.emplace(j, Pmf::from_parts(0, std::move(probs), std::max(0.0, 1.0 - sum), tau));
        }
        return ModelSpec::custom_table(std::move(table), q, tau, coeff);
      }
      default: {
        int horizon = 400;
        if (auto v = take("horizon")) {
          horizon = static_cast<int>(parse_long(src, v->first, v->second));
          if (horizon < 1) parse_fail(src, v->first, "horizon must be >= 1");
        }
        if (auto v = take("q"))
          parse_fail(src, v->first, "q is fixed for forest families and may not be overridden");
        return ModelSpec::forest(*fam, horizon, tau);
      }
    }
  }();

  if (!rows.empty() && spec.family() != Family::custom_table)
    parse_fail(src, row_line.begin()->second, "[pmf-table] is only valid for custom-table");
  if (!kv.empty())
    parse_fail(src, kv.begin()->second.first, "unknown key '" + kv.begin()->first + "'");
  if (tilt_x != 1.0) spec = spec.tilted(tilt_x);
  return spec;
}

// ------------------------------------------------------------- diagnostics

ConditionReport condition_diagnostics(const ModelSpec& spec, std::int64_t jmax,
                                      std::int64_t smax) {
  if (jmax < 4) fail(Errc::domain, "diagnostics need jmax >= 4");
  if (smax < 2) fail(Errc::domain, "diagnostics need smax >= 2");
  ConditionReport rep;

  std::vector<double> lam(static_cast<std::size_t>(jmax) + 1, 0.0);
  for (std::int64_t l = 1; l <= jmax; ++l) lam[static_cast<std::size_t>(l)] = spec.lambda_value(l);
  auto lam_at = [&](std::int64_t l) { return lam[static_cast<std::size_t>(std::max<std::int64_t>(l, 1))]; };

  double Lhat = 0.0, Lhat_half = 0.0;
  for (std::int64_t l = 2; l <= jmax; ++l) {
    for (std::int64_t t = l / 2 + 1; t <= l; ++t)
      Lhat = std::max(Lhat, lam_at(l - t) / lam_at(l));
    if (l == jmax / 2) Lhat_half = Lhat;
  }
  rep.L_hat = Lhat;
  if (Lhat > 1.1 * Lhat_half && Lhat_half > 0)
    rep.warnings.push_back("L estimate still growing between jmax/2 and jmax");

  for (std::int64_t l : {jmax / 8, jmax / 4, jmax / 2, jmax}) {
    if (l < 1) continue;
    rep.lambda_growth_at.push_back(l);
    rep.lambda_growth.push_back(spec.lambda_plus(l) /
                                std::pow(static_cast<double>(l), rep.beta));
  }
  if (rep.lambda_growth.size() >= 2 &&
      rep.lambda_growth.back() > 1.1 * rep.lambda_growth[rep.lambda_growth.size() - 2])
    rep.warnings.push_back("lambda^+(l)/l^beta still growing at jmax");

  // eps_{js} with r_j = 1, against the window mean (so the identity holds exactly)
  std::vector<std::vector<double>> eps_rows;  // per j, index s-2
  rep.eps_of_j.clear();
  double p0 = 1.0;
  for (std::int64_t j = 1; j <= jmax; ++j) {
    const Pmf law = spec.species_pmf(j);
    p0 = std::min(p0, std::exp(spec.log_prob_zero(j)));
    const double a = mean(law);
    std::vector<double> row;
    double emax = 0.0;
    for (std::int64_t s = 2; s <= smax; ++s) {
      const double e = (a > 0.0) ? law.at(s) / a : 0.0;
      row.push_back(e);
      emax = std::max(emax, e);
    }
    eps_rows.push_back(std::move(row));
    rep.eps_of_j.push_back(emax);
  }
  rep.p0_hat = p0;

  rep.gamma.assign(static_cast<std::size_t>(smax - 1), 0.0);
  for (std::size_t ji = 0; ji < eps_rows.size(); ++ji) {
    if (rep.eps_of_j[ji] <= 0.0) continue;
    for (std::size_t si = 0; si < rep.gamma.size(); ++si)
      rep.gamma[si] = std::max(rep.gamma[si], eps_rows[ji][si] / rep.eps_of_j[ji]);
  }
  rep.eps_hat.assign(eps_rows.size(), 0.0);
  for (std::size_t ji = 0; ji < eps_rows.size(); ++ji)
    for (std::size_t si = 0; si < rep.gamma.size(); ++si)
      if (rep.gamma[si] > 0.0)
        rep.eps_hat[ji] = std::max(rep.eps_hat[ji], eps_rows[ji][si] / rep.gamma[si]);

  const double q = spec.q();
  rep.G_hat = 0.0;
  rep.Gq_hat = 0.0;
  for (std::int64_t s = 2; s <= smax; ++s) {
    double Ls = 0.0;
    for (std::int64_t l = s; l <= jmax; ++l)
      Ls = std::max(Ls, lam_at(l / s) / lam_at(l));
    const double g = rep.gamma[static_cast<std::size_t>(s - 2)];
    rep.G_hat += static_cast<double>(s) * g;
    rep.Gq_hat += Ls * std::pow(static_cast<double>(s), 1.0 + q) * g;
  }

  if (!rep.eps_hat.empty() && eps_rows.size() >= 4) {
    const double tail_eps = rep.eps_hat.back();
    const double mid_eps = rep.eps_hat[rep.eps_hat.size() / 2];
    if (tail_eps > mid_eps && tail_eps > 0)
      rep.warnings.push_back("eps(j) not decaying between jmax/2 and jmax");
  }
  return rep;
}

}  // namespace condrel
