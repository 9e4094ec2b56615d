#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace advscene {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Randomized invariant checks for the twin-depth and attention kernels, seeded so a
// failure can be replayed.
std::vector<SelfTestResult> run_kernel_selftests(std::uint64_t seed);

}  // namespace advscene
