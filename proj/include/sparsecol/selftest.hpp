#pragma once

#include <string>
#include <vector>

namespace sparsecol {

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast subset of the property suite (a few seconds).
std::vector<SelfTestCheck> run_selftest();

} // namespace sparsecol
