#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "condrel/engine.hpp"
#include "doctest.h"

using namespace condrel;

namespace {

struct RunResult {
  int exit_code;
  std::string out;  // stdout only
};

std::string cli_path() { return CONDREL_CLI_PATH; }
std::string data_dir() { return CONDREL_DATA_DIR; }

RunResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return RunResult{WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("spectrum output matches the library law") {
  const RunResult r = run_cli("spectrum --n 8 --family poisson-power --q 1.5 --A 1");
  REQUIRE(r.exit_code == 0);
  const std::vector<std::string> lines = lines_of(r.out);
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0].rfind("# schema=condrel-csv-1", 0) == 0);
  CHECK(lines[1] == "spectrum,probability");

  std::map<Spectrum, double> parsed;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto comma = lines[i].rfind(',');
    REQUIRE(comma != std::string::npos);
    Spectrum key;
    std::istringstream ks(lines[i].substr(0, comma));
    std::string tok;
    while (ks >> tok) {
      const auto colon = tok.find(':');
      key.emplace_back(std::stoll(tok.substr(0, colon)), std::stoll(tok.substr(colon + 1)));
    }
    parsed[key] = std::stod(lines[i].substr(comma + 1));
  }
  const SpectrumLaw law = spectrum_law_bruteforce(ModelSpec::poisson_power(1.0, 1.5), 8);
  REQUIRE(parsed.size() == law.entries.size());
  for (const auto& [key, p] : law.entries) {
    REQUIRE(parsed.count(key));
    CHECK(parsed[key] == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("outputs are byte-identical across runs") {
  const std::string spectrum_args = "spectrum --n 10 --family poisson-power --q 1.5";
  CHECK(run_cli(spectrum_args).out == run_cli(spectrum_args).out);
  const std::string sample_args = "sample --n 10 --count 20 --seed 3 --family poisson-power --q 1.5";
  const RunResult s1 = run_cli(sample_args);
  const RunResult s2 = run_cli(sample_args);
  REQUIRE(s1.exit_code == 0);
  CHECK(s1.out == s2.out);
  CHECK(s1.out.find("seed=3") != std::string::npos);
  CHECK(s1.out.find("method=exact") != std::string::npos);
  // a different seed changes the draws
  CHECK(run_cli("sample --n 10 --count 20 --seed 4 --family poisson-power --q 1.5").out !=
        s1.out);
}

TEST_CASE("tree counts end the first decade correctly") {
  const RunResult r = run_cli("trees --horizon 10");
  REQUIRE(r.exit_code == 0);
  const std::vector<std::string> lines = lines_of(r.out);
  REQUIRE(lines.size() == 11);
  CHECK(lines[0] == "j,rooted,free");
  CHECK(lines[1] == "1,1,1");
  CHECK(lines[10] == "10,719,106");
}

TEST_CASE("model files resolve like inline flags") {
  const RunResult file = run_cli("marginal --n 10 --j 2 --model " + data_dir() + "/power.spec");
  const RunResult flags = run_cli("marginal --n 10 --j 2 --family poisson-power --q 1.5 --A 1");
  REQUIRE(file.exit_code == 0);
  CHECK(file.out == flags.out);
}

TEST_CASE("recursion verification gates on its threshold") {
  const std::string base = "verify-recursion --n 60 --family poisson-power --q 1.5";
  CHECK(run_cli(base).exit_code == 0);
  CHECK(run_cli(base + " --threshold 1e-30").exit_code == 7);
}

TEST_CASE("failure modes map to distinct exit codes") {
  // model file syntax error
  CHECK(run_cli("spectrum --n 8 --model " + data_dir() + "/bad.spec").exit_code == 2);
  // enumeration size guard
  CHECK(run_cli("spectrum --n 41 --family poisson-power --q 1.5").exit_code == 4);
  // non-summable tilt
  CHECK(run_cli("marginal --n 5 --j 1 --family forest-unlabelled-rooted --horizon 100 "
                "--tilt 3.1")
            .exit_code == 5);
  // unknown subcommand is a usage error
  CHECK(run_cli("no-such-command").exit_code != 0);
}

TEST_CASE("bare output names resolve against the output directory variable") {
  const std::string dir = "/tmp/condrel-cli-test";
  REQUIRE(std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) == 0);
  const std::string cmd = "CONDREL_OUT_DIR=" + dir + " " + cli_path() +
                          " trees --horizon 5 -o counts.csv 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::ifstream in(dir + "/counts.csv");
  std::string header;
  REQUIRE(static_cast<bool>(std::getline(in, header)));
  CHECK(header == "j,rooted,free");
}

TEST_CASE("json output carries the schema and model fingerprint") {
  const RunResult r = run_cli("marginal --n 6 --j 1 --family poisson-power --q 1.5 --format json");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.front() == '{');
  CHECK(r.out.find("condrel-json-1") != std::string::npos);
  CHECK(r.out.find("\"model\"") != std::string::npos);
}
