#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "frustummix/cli.hpp"
#include "frustummix/formats.hpp"

namespace fs = std::filesystem;

namespace fmx::testing {

CliResult run_fmx(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"fmx"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fmx_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_domain(const fs::path& dir, const std::string& prefix, std::size_t count, FrameSize frame,
                      std::uint64_t seed) {
  Gen g(seed);
  const fs::path manifest = dir / (prefix + ".tsv");
  std::ofstream m(manifest);
  m << "id\timage\tpoints\tlabels\tcamera\tmaskpack\n";
  for (std::size_t i = 0; i < count; ++i) {
    const Scene s = random_scene(g, frame, 300, 8, 10, 3);
    const std::string id = prefix + std::to_string(i);
    save(dir / (id + ".img.fmx"), Image::create(s.image));
    save(dir / (id + ".pts.fmx"), PointCloud::create(s.points));
    save(dir / (id + ".lbl.fmx"), LabelMap::create(s.labels));
    save(dir / (id + ".cam.fmx"), CameraModel::create(s.camera));
    save(dir / (id + ".mkp.fmx"), MaskPack::create(s.pack));
    m << id << '\t' << id << ".img.fmx\t" << id << ".pts.fmx\t" << id << ".lbl.fmx\t" << id << ".cam.fmx\t" << id
      << ".mkp.fmx\n";
  }
  return manifest;
}

std::uint64_t digest_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (const auto& f : files) {
    for (char c : fs::relative(f, dir).generic_string()) feed(static_cast<std::uint8_t>(c));
    feed(0);
    for (std::uint8_t b : read_file(f)) feed(b);
  }
  return h;
}

ThreadsEnv::ThreadsEnv(unsigned n) {
  if (const char* v = std::getenv("FMX_THREADS")) {
    had_ = true;
    old_ = v;
  }
  setenv("FMX_THREADS", std::to_string(n).c_str(), 1);
}

ThreadsEnv::~ThreadsEnv() {
  if (had_) setenv("FMX_THREADS", old_.c_str(), 1);
  else unsetenv("FMX_THREADS");
}

}  // namespace fmx::testing
