#pragma once

// Built-in oracle suites run by `vrc validate`.

#include <cstdint>
#include <string>
#include <vector>

namespace vrc {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

// transmittance, formfactor, subdivision, radius, index
const std::vector<std::string>& validation_suites();

// `suite` is one of validation_suites() or "all". Throws vrc::Error for an
// unknown suite.
std::vector<CheckResult> run_validation(const std::string& suite, std::uint64_t seed);

}  // namespace vrc
