#include "condrel/export.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace condrel {

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(Errc::internal, "double formatting failed");
  return std::string(buf, p);
}

std::string format_spectrum(const Spectrum& s) {
  if (s.empty()) return "-";
  std::ostringstream os;
  bool first = true;
  for (auto& [j, y] : s) {
    if (!first) os << ' ';
    os << j << ':' << y;
    first = false;
  }
  return os.str();
}

namespace {

void csv_header(std::ostream& os, const ExportMeta& meta, double uncovered) {
  os << "# schema=" << kCsvSchema << " quantity=" << meta.quantity
     << " model=" << meta.fingerprint << " tolerance=" << format_double(meta.tolerance)
     << " uncovered=" << format_double(uncovered) << "\n";
}

}  // namespace

void write_pmf_csv(std::ostream& os, const Pmf& law, const ExportMeta& meta) {
  csv_header(os, meta, law.tail());
  os << "s,probability\n";
  for (std::int64_t s = law.offset(); s <= law.max_support(); ++s)
    os << s << ',' << format_double(law.at(s)) << "\n";
}

void write_spectrum_csv(std::ostream& os, const SpectrumLaw& law, const ExportMeta& meta) {
  csv_header(os, meta, law.uncovered);
  os << "spectrum,probability\n";
  for (const auto& [key, p] : law.entries)
    os << format_spectrum(key) << ',' << format_double(p) << "\n";
}

void write_profile_csv(std::ostream& os, const ConvergenceProfile& profile) {
  ExportMeta meta{profile.quantity, profile.fingerprint, 0};
  csv_header(os, meta, 0.0);
  os << "abscissa,value,error_bar\n";
  for (std::size_t i = 0; i < profile.abscissae.size(); ++i)
    os << format_double(profile.abscissae[i]) << ',' << format_double(profile.values[i])
       << ',' << format_double(profile.error_bars[i]) << "\n";
}

namespace {

nlohmann::ordered_json json_base(const ExportMeta& meta) {
  nlohmann::ordered_json j;
  j["schema"] = kJsonSchema;
  j["quantity"] = meta.quantity;
  j["model"] = meta.fingerprint;
  j["tolerance"] = meta.tolerance;
  return j;
}

}  // namespace

std::string pmf_json(const Pmf& law, const ExportMeta& meta) {
  auto j = json_base(meta);
  j["offset"] = law.offset();
  j["uncovered"] = law.tail();
  auto& probs = j["probabilities"] = nlohmann::ordered_json::array();
  for (double p : law.probs()) probs.push_back(p);
  return j.dump(2);
}

std::string spectrum_json(const SpectrumLaw& law, const ExportMeta& meta) {
  auto j = json_base(meta);
  j["n"] = law.n;
  j["uncovered"] = law.uncovered;
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& [key, p] : law.entries) {
    nlohmann::ordered_json e;
    e["spectrum"] = format_spectrum(key);
    e["probability"] = p;
    entries.push_back(std::move(e));
  }
  return j.dump(2);
}

std::string profile_json(const ConvergenceProfile& profile) {
  auto j = json_base(ExportMeta{profile.quantity, profile.fingerprint, 0});
  j["abscissae"] = profile.abscissae;
  j["values"] = profile.values;
  j["error_bars"] = profile.error_bars;
  j["notes"] = profile.notes;
  return j.dump(2);
}

}  // namespace condrel
