#pragma once

#include <iosfwd>
#include <string>

#include "condrel/engine.hpp"
#include "condrel/profiles.hpp"

namespace condrel {

inline constexpr const char* kCsvSchema = "condrel-csv-1";
inline constexpr const char* kJsonSchema = "condrel-json-1";

// Shortest round-trip decimal representation; deterministic across runs.
std::string format_double(double v);

std::string format_spectrum(const Spectrum& s);  // "j:y j:y ..." or "-"

struct ExportMeta {
  std::string quantity;
  std::string fingerprint;
  double tolerance = 0;
};

void write_pmf_csv(std::ostream& os, const Pmf& law, const ExportMeta& meta);
void write_spectrum_csv(std::ostream& os, const SpectrumLaw& law, const ExportMeta& meta);
void write_profile_csv(std::ostream& os, const ConvergenceProfile& profile);

std::string pmf_json(const Pmf& law, const ExportMeta& meta);
std::string spectrum_json(const SpectrumLaw& law, const ExportMeta& meta);
std::string profile_json(const ConvergenceProfile& profile);

}  // namespace condrel
