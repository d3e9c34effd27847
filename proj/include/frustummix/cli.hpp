#pragma once

// Batch driver behind the `fmx` executable. run_cli never calls exit() and
// writes only to the given streams, so it can be driven from tests.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "frustummix/error.hpp"

namespace fmx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Exit code used when an fmx::Error escapes a subcommand.
int exit_code_for(Errc code);

// "large" | "medium" | "small" or a number in (0, 1]. Errc::OutOfRange
// otherwise.
double resolve_proportion(std::string_view text);

// Worker count: FMX_THREADS if set to a positive integer, else the hardware
// concurrency (at least 1).
unsigned worker_count();

struct ManifestRow {
  std::string id;
  std::filesystem::path image, points, labels, camera, maskpack;
};

// TSV with header `id image points labels camera maskpack`. Relative paths are
// resolved against the manifest's directory.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

struct PairPlan {
  std::size_t source_row = 0;
  std::size_t target_row = 0;
};

// Row-aligned pairing after a seeded Fisher-Yates shuffle of the longer
// manifest (the target manifest when lengths are equal); min(n_src, n_trg)
// pairs.
std::vector<PairPlan> plan_pairs(std::size_t n_source, std::size_t n_target, std::uint64_t seed);

}  // namespace fmx::cli
