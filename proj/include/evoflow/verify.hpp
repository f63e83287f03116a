#pragma once

#include <string>
#include <vector>

// Self-verification: every analytic identity the library relies on,
// checked numerically at deterministic seeds. Exposed to the CLI's
// `verify` subcommand.

namespace evoflow {

struct VerificationCheck {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<VerificationCheck> run_verification();

}  // namespace evoflow
