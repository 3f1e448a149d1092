#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "toral/codec.hpp"

namespace toral {

struct GenOptions {
  std::string kind = "commuting_pair";
  std::size_t n = 4;
  std::size_t count = 2;
  double delta = 1e-3;
  std::uint64_t seed = 0;
  LinkMode mode = LinkMode::Normal;
  std::string perturbation = "within";
};

Bundle gen(const GenOptions& o);

enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitPrecondition = 2 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toral
