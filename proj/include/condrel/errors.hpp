#pragma once

#include <stdexcept>
#include <string>

namespace condrel {

enum class Errc {
  domain,                   // argument outside documented range
  tilt_divergence,          // non-summable tilt
  inconsistent_model,       // internal identity violated by the inputs
  horizon,                  // j beyond the tree-count horizon
  size_guard,               // n too large for enumeration
  conditioning_impossible,  // P[T_{0n} = n] == 0
  family,                   // operation undefined for this model family
  tail_unknown,             // no declared tail bound for the family
  budget,                   // enumeration node budget exhausted
  parse,                    // model file syntax error
  insufficient_data,        // horizon too small for requested precision
  internal,                 // broken invariant; indicates a bug
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

const char* errc_name(Errc code);

}  // namespace condrel
