#pragma once

// On-disk fixtures and an in-process driver for the command-line tool.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "generators.hpp"

namespace fmx::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_fmx(const std::vector<std::string>& args);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Writes `count` random scenes (same frame, 3 channels) as .fmx files plus a
// manifest `<prefix>.tsv` in `dir`; returns the manifest path.
std::filesystem::path write_domain(const std::filesystem::path& dir, const std::string& prefix, std::size_t count,
                                   FrameSize frame, std::uint64_t seed);

// FNV-1a over (relative name, contents) of every regular file, in name order.
std::uint64_t digest_dir(const std::filesystem::path& dir);

// Scoped FMX_THREADS override.
class ThreadsEnv {
 public:
  explicit ThreadsEnv(unsigned n);
  ~ThreadsEnv();
  ThreadsEnv(const ThreadsEnv&) = delete;
  ThreadsEnv& operator=(const ThreadsEnv&) = delete;

 private:
  std::string old_;
  bool had_ = false;
};

}  // namespace fmx::testing
