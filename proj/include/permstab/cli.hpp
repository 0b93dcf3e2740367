#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "permstab/dpo.hpp"
#include "permstab/metrics.hpp"

namespace permstab {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct RunConfig {
  std::optional<double> sigma;
  std::uint64_t seed = kDefaultSeed;
  double beta = kDefaultBeta;
  std::string abstention{kAbstention};
  bool exhaustive = false;
};

/// Seed default honouring the PERMSTAB_SEED environment variable.
std::uint64_t default_seed();

/// Runs one command line (args excludes the program name). Returns 0 on
/// success, 1 on validation errors, 2 on I/O errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permstab
