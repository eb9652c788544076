#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "condrel/engine.hpp"
#include "condrel/export.hpp"
#include "condrel/model.hpp"
#include "condrel/profiles.hpp"
#include "condrel/sampler.hpp"

namespace {

using namespace condrel;

// documented exit codes
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitDomain = 3;
constexpr int kExitGuard = 4;
constexpr int kExitTilt = 5;
constexpr int kExitBudget = 6;
constexpr int kExitVerifyFailed = 7;

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::parse:
      return kExitParse;
    case Errc::domain:
    case Errc::family:
    case Errc::inconsistent_model:
    case Errc::conditioning_impossible:
    case Errc::tail_unknown:
      return kExitDomain;
    case Errc::horizon:
    case Errc::size_guard:
    case Errc::insufficient_data:
      return kExitGuard;
    case Errc::tilt_divergence:
      return kExitTilt;
    case Errc::budget:
      return kExitBudget;
    case Errc::internal:
      return kExitInternal;
  }
  return kExitInternal;
}

struct ModelOpts {
  std::string file;
  std::string family = "poisson-power";
  double q = 1.5;
  double A = 1.0;
  double lambda_const = 1.0;
  double tau = kDefaultTau;
  int horizon = 400;
  double tilt = 1.0;
};

void add_model_opts(CLI::App* cmd, ModelOpts& mo) {
  cmd->add_option("--model", mo.file, "model spec file (overrides the inline flags)");
  cmd->add_option("--family", mo.family,
                  "poisson-power | forest-unlabelled-unrooted | forest-unlabelled-rooted | "
                  "forest-labelled-unrooted | forest-labelled-rooted");
  cmd->add_option("--q", mo.q, "convergence exponent (poisson-power)");
  cmd->add_option("--A", mo.A, "amplitude (poisson-power)");
  cmd->add_option("--lambda-const", mo.lambda_const, "constant lambda value");
  cmd->add_option("--tau", mo.tau, "pmf truncation tolerance");
  cmd->add_option("--horizon", mo.horizon, "tree-count horizon (forest families)");
  cmd->add_option("--tilt", mo.tilt, "tilt parameter x");
}

ModelSpec resolve_model(const ModelOpts& mo) {
  ModelSpec spec = [&] {
    if (!mo.file.empty()) return ModelSpec::from_file(mo.file);
    auto fam = family_from_name(mo.family);
    if (!fam) fail(Errc::parse, "unknown family '" + mo.family + "'");
    if (*fam == Family::poisson_power)
      return ModelSpec::poisson_power(mo.A, mo.q, LambdaFn::constant(mo.lambda_const), mo.tau);
    if (*fam == Family::custom_table)
      fail(Errc::parse, "custom-table models must come from a --model file");
    return ModelSpec::forest(*fam, mo.horizon, mo.tau);
  }();
  if (mo.tilt != 1.0) spec = spec.tilted(mo.tilt);
  return spec;
}

struct OutputOpts {
  std::string destination = "-";
  std::string format = "csv";
};

void add_output_opts(CLI::App* cmd, OutputOpts& oo) {
  cmd->add_option("--output,-o", oo.destination, "output file, '-' for stdout");
  cmd->add_option("--format", oo.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const OutputOpts& oo, const std::string& text) {
  if (oo.destination == "-") {
    std::cout << text;
    return;
  }
  std::string dest = oo.destination;
  // CONDREL_OUT_DIR supplies a default directory for bare file names
  if (const char* dir = std::getenv("CONDREL_OUT_DIR");
      dir != nullptr && *dir != '\0' && dest.find('/') == std::string::npos)
    dest = std::string(dir) + "/" + dest;
  std::ofstream out(dest);
  if (!out) fail(Errc::domain, "cannot open output file " + dest);
  out << text;
}

std::string render_pmf(const OutputOpts& oo, const Pmf& law, const ExportMeta& meta) {
  if (oo.format == "json") return pmf_json(law, meta);
  std::ostringstream os;
  write_pmf_csv(os, law, meta);
  return os.str();
}

std::string render_spectrum(const OutputOpts& oo, const SpectrumLaw& law,
                            const ExportMeta& meta) {
  if (oo.format == "json") return spectrum_json(law, meta);
  std::ostringstream os;
  write_spectrum_csv(os, law, meta);
  return os.str();
}

std::string render_profile(const OutputOpts& oo, const ConvergenceProfile& p) {
  if (oo.format == "json") return profile_json(p);
  std::ostringstream os;
  write_profile_csv(os, p);
  return os.str();
}

void summary_line(const ModelSpec& spec, std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  std::cerr << "model=" << spec.fingerprint() << " tau=" << format_double(spec.tau())
            << " tilt=" << format_double(spec.tilt_x())
            << " elapsed=" << format_double(elapsed.count()) << "s\n";
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

int run(int argc, char** argv) {
  CLI::App app{"Exact laws and convergence diagnostics for conditioned species counts"};
  app.require_subcommand(1);

  ModelOpts mo;
  OutputOpts oo;

  std::int64_t n = 12, b = 0, j = 1, kmax = 32, cap = -1, smax = 8, jmax = 200;
  std::int64_t nsamples = 1000, max_tries = 1'000'000;
  std::uint64_t seed = 1;
  double delta = 1e-6, threshold = 1e-10;
  int horizon = 10;
  std::string which = "largest", method = "exact";
  std::vector<std::int64_t> grid;
  bool general = false;

  auto* c_dist = app.add_subcommand("dist", "law of the weighted tail sum T_bn");
  c_dist->add_option("--n", n)->required();
  c_dist->add_option("--b", b);
  c_dist->add_option("--cap", cap, "support cap (default n)");

  auto* c_spectrum = app.add_subcommand("spectrum", "exact conditional spectrum law");
  c_spectrum->add_option("--n", n)->required();

  auto* c_marginal = app.add_subcommand("marginal", "conditional law of the count of size j");
  c_marginal->add_option("--n", n)->required();
  c_marginal->add_option("--j", j)->required();

  auto* c_corollary =
      app.add_subcommand("corollary", "largest / smallest / component-count laws");
  c_corollary->add_option("--n", n)->required();
  c_corollary->add_option("--which", which, "largest | smallest | count")
      ->check(CLI::IsMember({"largest", "smallest", "count"}));
  c_corollary->add_option("--kmax", kmax, "count cap for --which count");

  auto* c_limits = app.add_subcommand("limits", "truncated limit laws");
  c_limits->add_option("--delta", delta, "truncation mass tolerance");
  c_limits->add_option("--which", which, "t0inf | count | rho")
      ->check(CLI::IsMember({"t0inf", "count", "rho", "largest"}));

  auto* c_llt = app.add_subcommand("verify-llt", "local-limit deviation profile H_n(l)");
  c_llt->add_option("--l-grid", grid, "grid of l values (n = l, b = 0)");
  c_llt->add_option("--b", b);

  auto* c_tv = app.add_subcommand("verify-tv", "TV distance to the limit construction");
  c_tv->add_option("--n-grid", grid);
  c_tv->add_option("--delta", delta);

  auto* c_rec = app.add_subcommand("verify-recursion", "weighted-sum recursion residual");
  c_rec->add_option("--n", n)->required();
  c_rec->add_option("--b", b);
  c_rec->add_flag("--general", general, "use the perturbed (non-Poisson) identity");
  c_rec->add_option("--threshold", threshold);

  auto* c_sample = app.add_subcommand("sample", "draw conditioned spectra");
  c_sample->add_option("--n", n)->required();
  c_sample->add_option("--count", nsamples);
  c_sample->add_option("--seed", seed);
  c_sample->add_option("--method", method, "exact | rejection")
      ->check(CLI::IsMember({"exact", "rejection"}));
  c_sample->add_option("--max-tries", max_tries);

  auto* c_trees = app.add_subcommand("trees", "unlabelled tree counts and growth constants");
  c_trees->add_option("--horizon", horizon);

  auto* c_diag = app.add_subcommand("diagnostics", "model condition diagnostics");
  c_diag->add_option("--jmax", jmax);
  c_diag->add_option("--smax", smax);

  auto* c_part = app.add_subcommand("partition-fn", "partition function c_n");
  c_part->add_option("--n", n)->required();

  for (CLI::App* cmd : {c_dist, c_spectrum, c_marginal, c_corollary, c_limits, c_llt, c_tv,
                        c_rec, c_sample, c_diag, c_part}) {
    add_model_opts(cmd, mo);
    add_output_opts(cmd, oo);
  }
  // trees reads the counts directly and has its own horizon flag
  add_output_opts(c_trees, oo);

  CLI11_PARSE(app, argc, argv);
  const auto start = std::chrono::steady_clock::now();
  ModelSpec spec = resolve_model(mo);
  ExportMeta meta{"", spec.fingerprint(), spec.tau()};

  if (c_dist->parsed()) {
    meta.quantity = "t-distribution(b=" + std::to_string(b) + ",n=" + std::to_string(n) + ")";
    emit(oo, render_pmf(oo, t_distribution(spec, b, n, cap), meta));
  } else if (c_spectrum->parsed()) {
    meta.quantity = "conditional-spectrum(n=" + std::to_string(n) + ")";
    emit(oo, render_spectrum(oo, spectrum_law_bruteforce(spec, n), meta));
  } else if (c_marginal->parsed()) {
    meta.quantity = "conditional-marginal(n=" + std::to_string(n) + ",j=" + std::to_string(j) + ")";
    emit(oo, render_pmf(oo, conditional_marginal(spec, n, j), meta));
  } else if (c_corollary->parsed()) {
    meta.quantity = which + "-component-law(n=" + std::to_string(n) + ")";
    Pmf law = which == "largest"    ? largest_component_law(spec, n)
              : which == "smallest" ? smallest_component_law(spec, n)
                                    : component_count_law(spec, n, kmax);
    emit(oo, render_pmf(oo, law, meta));
  } else if (c_limits->parsed()) {
    const LimitLaws lim = limit_laws(spec, delta);
    if (which == "rho") {
      std::ostringstream os;
      os << "rho_connect_lo,rho_connect_hi,truncation_j\n"
         << format_double(lim.rho_connect_lo) << ',' << format_double(lim.rho_connect_hi)
         << ',' << lim.truncation_j << "\n";
      emit(oo, os.str());
    } else {
      meta.quantity = "limit-" + which + "(delta=" + format_double(delta) + ")";
      emit(oo, render_pmf(oo, which == "count" ? lim.count_limit : lim.t0_inf, meta));
    }
  } else if (c_llt->parsed()) {
    if (grid.empty()) grid = {50, 100, 200, 400};
    std::vector<LltRequest> pts;
    for (std::int64_t l : grid) pts.push_back({b, l, l});
    const LltProfile prof = llt_profile(spec, pts);
    emit(oo, render_profile(oo, prof.at_b));
    summary_line(spec, start);
    return strictly_decreasing(prof.at_b.values) ? kExitOk : kExitVerifyFailed;
  } else if (c_tv->parsed()) {
    if (grid.empty()) grid = {10, 20, 40};
    const ConvergenceProfile prof = tv_to_qn(spec, grid, delta);
    emit(oo, render_profile(oo, prof));
    summary_line(spec, start);
    return strictly_decreasing(prof.values) ? kExitOk : kExitVerifyFailed;
  } else if (c_rec->parsed()) {
    const double res = general ? general_recursion_residual(spec, b, n)
                               : poisson_recursion_residual(spec, b, n);
    std::ostringstream os;
    os << "residual\n" << format_double(res) << "\n";
    emit(oo, os.str());
    summary_line(spec, start);
    return res < threshold ? kExitOk : kExitVerifyFailed;
  } else if (c_sample->parsed()) {
    std::ostringstream os;
    os << "# schema=" << kCsvSchema << " model=" << spec.fingerprint() << " seed=" << seed
       << " method=" << method << "\n";
    os << "n,spectrum\n";
    if (method == "exact") {
      SuffixTable st(spec, n);
      SamplerState state(st, seed);
      for (std::int64_t i = 0; i < nsamples; ++i)
        os << n << ',' << format_spectrum(sample_spectrum_exact(state)) << "\n";
    } else {
      CounterRng rng(seed);
      for (std::int64_t i = 0; i < nsamples; ++i) {
        const RejectionResult r = sample_spectrum_rejection(spec, n, rng, max_tries);
        if (!r.accepted) fail(Errc::budget, "rejection sampler exhausted max tries");
        os << n << ',' << format_spectrum(r.spectrum) << "\n";
      }
    }
    emit(oo, os.str());
  } else if (c_trees->parsed()) {
    const TreeCounts tc = tree_counts(horizon);
    std::ostringstream os;
    os << "j,rooted,free\n";
    for (int i = 1; i <= horizon; ++i)
      os << i << ',' << tc.r[static_cast<std::size_t>(i)].get_str() << ','
         << tc.m[static_cast<std::size_t>(i)].get_str() << "\n";
    if (horizon >= 60) {
      const OtterConstants oc = otter_constants(tc);
      std::cerr << "rho=" << format_double(oc.rho)
                << " c_rooted=" << format_double(oc.c_rooted)
                << " c_free=" << format_double(oc.c_free)
                << " rho_spread=" << format_double(oc.rho_spread) << "\n";
    }
    emit(oo, os.str());
  } else if (c_diag->parsed()) {
    const ConditionReport rep = condition_diagnostics(spec, jmax, smax);
    std::ostringstream os;
    os << "quantity,value\n";
    os << "L_hat," << format_double(rep.L_hat) << "\n";
    os << "G_hat," << format_double(rep.G_hat) << "\n";
    os << "Gq_hat," << format_double(rep.Gq_hat) << "\n";
    os << "p0_hat," << format_double(rep.p0_hat) << "\n";
    for (std::size_t i = 0; i < rep.lambda_growth.size(); ++i)
      os << "lambda_growth@" << rep.lambda_growth_at[i] << ','
         << format_double(rep.lambda_growth[i]) << "\n";
    for (const std::string& w : rep.warnings) os << "warning," << w << "\n";
    emit(oo, os.str());
  } else if (c_part->parsed()) {
    std::ostringstream os;
    os << "n,c_n\n" << n << ',' << format_double(partition_function(spec, n)) << "\n";
    emit(oo, os.str());
  }
  summary_line(spec, start);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
