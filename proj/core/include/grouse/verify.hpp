#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace grouse {

enum class VerifySuite { Metrics, Step, Data, Bounds, All };
enum class Intensity { Quick, Full };

VerifySuite parse_verify_suite(std::string_view name);
Intensity parse_intensity(std::string_view name);

struct VerifyOptions {
  VerifySuite suite = VerifySuite::All;
  std::uint64_t seed = 1;
  Intensity intensity = Intensity::Quick;
  /// Forwarded to StepConfig::theta_scale; anything but 1 must make the
  /// greedy-optimality property fail.
  double theta_scale = 1.0;
  int threads = 1;
};

/// One checked property: `deviation` is compared against `tolerance`
/// (an absolute error, a relative error or a count of standard errors,
/// depending on the property).
struct PropertyResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

std::vector<PropertyResult> verify(const VerifyOptions& options);

/// "PASS <suite>/<name> deviation=... tolerance=... <detail>"
void print_property(std::ostream& out, const PropertyResult& result);

}  // namespace grouse
