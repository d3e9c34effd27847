#include "frustummix/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "frustummix/formats.hpp"
#include "frustummix/frustum_mixing.hpp"
#include "frustummix/label_fusion.hpp"
#include "frustummix/metrics.hpp"
#include "frustummix/rng.hpp"

namespace fmx::cli {

namespace fs = std::filesystem;

namespace {

// Stream index reserved for the manifest shuffle; pair k uses stream k.
constexpr std::uint64_t kPairingStream = ~std::uint64_t{0};

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Non-comment, non-blank lines of a TSV file.
std::vector<std::string> tsv_lines(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(std::move(line));
    if (line.empty() || line.front() == '#') continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

ProbabilityMap load_probabilities(const fs::path& path) {
  AnyClassMap any = decode_class_map(read_file(path));
  if (any.is_logit) return softmax(LogitMap::create(std::move(any.fields)));
  return ProbabilityMap::create(std::move(any.fields));
}

DomainSample load_sample(const ManifestRow& row) {
  return make_domain_sample(load<Image>(row.image), load<PointCloud>(row.points), load<LabelMap>(row.labels),
                            load<CameraModel>(row.camera));
}

std::string pair_stem(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", k);
  return buf;
}

Provenance provenance_of(const MixedSample& s) {
  return Provenance{s.image().frame(), {s.pixel_provenance().begin(), s.pixel_provenance().end()},
                    {s.point_provenance().begin(), s.point_provenance().end()}};
}

// Runs fn(i) for i in [0, n) on `workers` threads. Each index is claimed once.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

// --- pack -------------------------------------------------------------------

struct PackArgs {
  std::string masks_dir, classes, out;
};

int cmd_pack(const PackArgs& a, std::ostream& out) {
  const fs::path dir(a.masks_dir);
  if (!fs::is_directory(dir)) fail(Errc::Io, "not a directory: " + a.masks_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".fmx") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Errc::EmptyInput, "no .fmx mask files in " + a.masks_dir);

  std::vector<BinaryMask> masks;
  masks.reserve(files.size());
  for (const auto& f : files) {
    masks.push_back(load<BinaryMask>(f));
    if (masks.back().frame != masks.front().frame)
      fail(Errc::DimensionMismatch, f.filename().string() + " differs in size from " + files.front().filename().string());
  }

  std::optional<std::vector<std::uint16_t>> classes;
  if (!a.classes.empty()) {
    // header `mask<TAB>class`; one row per mask file name
    auto lines = tsv_lines(a.classes);
    if (lines.empty() || lines.front() != "mask\tclass") fail(Errc::Parse, a.classes + ": expected header 'mask\\tclass'");
    std::map<std::string, std::uint16_t> by_name;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      auto cols = split(lines[i], '\t');
      unsigned v = 0;
      if (cols.size() != 2 || std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), v).ec != std::errc{} ||
          v >= kIgnoreId)
        fail(Errc::Parse, a.classes + ": bad row '" + lines[i] + "'");
      if (!by_name.emplace(cols[0], static_cast<std::uint16_t>(v)).second)
        fail(Errc::DuplicateId, a.classes + ": mask listed twice: " + cols[0]);
    }
    classes.emplace();
    for (const auto& f : files) {
      auto it = by_name.find(f.filename().string());
      if (it == by_name.end()) fail(Errc::UnknownId, a.classes + ": no class for " + f.filename().string());
      classes->push_back(it->second);
    }
  }

  const MaskPack pack =
      classes ? pack_masks(masks, std::span<const std::uint16_t>(*classes)) : pack_masks(masks);
  save(a.out, pack);

  const auto ids = pack.id_matrix();
  const auto covered = static_cast<std::size_t>(std::count_if(ids.begin(), ids.end(), [](auto id) { return id != 0; }));
  out << "num_masks\t" << pack.num_masks() << '\n'
      << "covered_pixels\t" << covered << '\n'
      << "coverage\t" << fmt_double(static_cast<double>(covered) / static_cast<double>(ids.size())) << '\n';
  return kExitOk;
}

// --- mix --------------------------------------------------------------------

struct MixArgs {
  std::string source_manifest, target_manifest, proportion = "medium", out_dir;
  std::uint64_t seed = 0;
};

int cmd_mix(const MixArgs& a, std::ostream& out, std::ostream& err) {
  const double proportion = resolve_proportion(a.proportion);
  const auto src = read_manifest(a.source_manifest);
  const auto trg = read_manifest(a.target_manifest);
  const auto plan = plan_pairs(src.size(), trg.size(), derive_seed(a.seed, kPairingStream));
  const fs::path out_dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(Errc::Io, "cannot create " + a.out_dir + ": " + ec.message());

  std::vector<std::string> failures(plan.size());
  parallel_for(plan.size(), worker_count(), [&](std::size_t k) {
    const ManifestRow& s = src[plan[k].source_row];
    const ManifestRow& t = trg[plan[k].target_row];
    try {
      const DomainSample source = load_sample(s);
      const DomainSample target = load_sample(t);
      const MixedPair mixed = frustum_mix(source, target, load<MaskPack>(s.maskpack), load<MaskPack>(t.maskpack),
                                          proportion, derive_seed(a.seed, k));
      const std::string stem = pair_stem(k);
      save(out_dir / (stem + "_src2trg.fmx"), mixed.source_to_target);
      save(out_dir / (stem + "_src2trg.prov.fmx"), provenance_of(mixed.source_to_target));
      save(out_dir / (stem + "_trg2src.fmx"), mixed.target_to_source);
      save(out_dir / (stem + "_trg2src.prov.fmx"), provenance_of(mixed.target_to_source));
    } catch (const Error& e) {
      failures[k] = "pair " + pair_stem(k) + " (" + s.id + ", " + t.id + "): " + e.what();
    } catch (const std::exception& e) {
      failures[k] = "pair " + pair_stem(k) + " (" + s.id + ", " + t.id + "): " + e.what();
    }
  });

  std::ostringstream index;
  index << "pair\tsource_id\ttarget_id\tseed\tstatus\n";
  std::size_t failed = 0;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    index << pair_stem(k) << '\t' << src[plan[k].source_row].id << '\t' << trg[plan[k].target_row].id << '\t'
          << derive_seed(a.seed, k) << '\t' << (failures[k].empty() ? "ok" : "failed") << '\n';
    if (!failures[k].empty()) {
      ++failed;
      err << "error: " << failures[k] << '\n';
    }
  }
  const std::string text = index.str();
  write_file(out_dir / "pairs.tsv", ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));

  out << "pairs\t" << plan.size() << '\n'
      << "written\t" << 2 * (plan.size() - failed) << '\n'
      << "failed\t" << failed << '\n'
      << "proportion\t" << fmt_double(proportion) << '\n';
  return failed == 0 ? kExitOk : kExitRuntime;
}

// --- fuse -------------------------------------------------------------------

struct FuseArgs {
  std::string net_probs, vfm_probs, mapping, out;
  double tau = kDefaultTau;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  if (!(a.tau >= 0.0 && a.tau <= 1.0)) fail(Errc::OutOfRange, "--tau must lie in [0, 1]");
  const ClassMapping mapping = ClassMapping::load(a.mapping);
  const ProbabilityMap net = load_probabilities(a.net_probs);
  const ProbabilityMap vfm = load_probabilities(a.vfm_probs);
  if (net.num_classes() != mapping.num_semantic())
    fail(Errc::DimensionMismatch, "--net-probs has " + std::to_string(net.num_classes()) + " classes, mapping has " +
                                      std::to_string(mapping.num_semantic()));
  const LabelMap labels = fuse_pl(net, remap_vfm_probs(vfm, mapping), a.tau);
  save(a.out, labels);

  std::vector<std::size_t> hist(mapping.num_semantic(), 0);
  std::size_t ignored = 0;
  for (auto l : labels.data()) {
    if (l == kIgnoreId) ++ignored;
    else ++hist[l];
  }
  const auto n = labels.data().size();
  out << "positions\t" << n << '\n'
      << "ignored\t" << ignored << '\n'
      << "ignore_fraction\t" << fmt_double(n ? static_cast<double>(ignored) / static_cast<double>(n) : 0.0) << '\n';
  for (std::size_t c = 0; c < hist.size(); ++c)
    out << "hist." << c << '.' << mapping.semantic_names()[c] << '\t' << hist[c] << '\n';
  return kExitOk;
}

// --- eval / losses ----------------------------------------------------------

struct EvalArgs {
  std::string pred, gt;
  unsigned num_classes = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.num_classes == 0 || a.num_classes >= kIgnoreId) fail(Errc::OutOfRange, "--num-classes must be in 1..65534");
  out << format_iou_tsv(
      miou(load<LabelMap>(a.pred), load<LabelMap>(a.gt), static_cast<std::uint16_t>(a.num_classes)));
  return kExitOk;
}

struct LossesArgs {
  std::string inputs;
  std::string lambdas = "1,1,1";
};

LossWeights parse_lambdas(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 3) fail(Errc::Parse, "--lambdas expects three comma-separated values src,trg,m");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    std::size_t used = 0;
    try {
      v[i] = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) fail(Errc::Parse, "--lambdas: not a number: '" + parts[i] + "'");
    if (!std::isfinite(v[i]) || v[i] < 0.0) fail(Errc::OutOfRange, "--lambdas values must be finite and >= 0");
  }
  return {v[0], v[1], v[2]};
}

// Manifest: header `key<TAB>path`, keys <domain>.<item> with domain in
// {source, target, mix_src_trg, mix_trg_src} and item in {main_2d, mimic_2d,
// main_3d, mimic_3d, labels_2d, labels_3d}.
LedgerInputs read_ledger_inputs(const fs::path& manifest) {
  auto lines = tsv_lines(manifest);
  if (lines.empty() || lines.front() != "key\tpath") fail(Errc::Parse, manifest.string() + ": expected header 'key\\tpath'");
  std::map<std::string, fs::path> paths;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cols = split(lines[i], '\t');
    if (cols.size() != 2) fail(Errc::Parse, manifest.string() + ": bad row '" + lines[i] + "'");
    if (!paths.emplace(cols[0], resolve(manifest.parent_path(), cols[1])).second)
      fail(Errc::DuplicateId, manifest.string() + ": key listed twice: " + cols[0]);
  }
  auto take = [&](const std::string& key) {
    auto it = paths.find(key);
    if (it == paths.end()) fail(Errc::UnknownId, manifest.string() + ": missing key " + key);
    fs::path p = it->second;
    paths.erase(it);
    return p;
  };
  auto domain = [&](const std::string& d) {
    ProbabilityMap main_2d = load_probabilities(take(d + ".main_2d"));
    ProbabilityMap mimic_2d = load_probabilities(take(d + ".mimic_2d"));
    ProbabilityMap main_3d = load_probabilities(take(d + ".main_3d"));
    ProbabilityMap mimic_3d = load_probabilities(take(d + ".mimic_3d"));
    LabelMap labels_2d = load<LabelMap>(take(d + ".labels_2d"));
    LabelMap labels_3d = load<LabelMap>(take(d + ".labels_3d"));
    return DomainPredictions{std::move(main_2d), std::move(mimic_2d), std::move(main_3d),
                             std::move(mimic_3d), std::move(labels_2d), std::move(labels_3d)};
  };
  LedgerInputs in{domain("source"), domain("target"), domain("mix_src_trg"), domain("mix_trg_src")};
  if (!paths.empty()) fail(Errc::UnknownId, manifest.string() + ": unknown key " + paths.begin()->first);
  return in;
}

int cmd_losses(const LossesArgs& a, std::ostream& out) {
  const LossWeights w = parse_lambdas(a.lambdas);
  out << assemble_ledger(read_ledger_inputs(a.inputs), w).to_tsv();
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Io:
    case Errc::BadMagic:
    case Errc::VersionMismatch:
    case Errc::CrcMismatch:
    case Errc::Truncated:
    case Errc::MalformedStream:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

double resolve_proportion(std::string_view text) {
  if (text == "large") return kProportionLarge;
  if (text == "medium") return kProportionMedium;
  if (text == "small") return kProportionSmall;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    fail(Errc::OutOfRange, "proportion must be large, medium, small or a number in (0, 1]: '" + std::string(text) + "'");
  if (!(v > 0.0 && v <= 1.0)) fail(Errc::OutOfRange, "proportion must lie in (0, 1], got " + std::string(text));
  return v;
}

unsigned worker_count() {
  if (const char* env = std::getenv("FMX_THREADS")) {
    unsigned v = 0;
    const std::string_view s(env);
    if (std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc{} && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  auto lines = tsv_lines(path);
  if (lines.empty() || lines.front() != "id\timage\tpoints\tlabels\tcamera\tmaskpack")
    fail(Errc::Parse, path.string() + ": expected header 'id image points labels camera maskpack' (tab-separated)");
  const fs::path base = path.parent_path();
  std::vector<ManifestRow> rows;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto c = split(lines[i], '\t');
    if (c.size() != 6) fail(Errc::Parse, path.string() + ": line " + std::to_string(i + 1) + " has " +
                                          std::to_string(c.size()) + " columns, expected 6");
    if (!seen.emplace(c[0], i).second) fail(Errc::DuplicateId, path.string() + ": duplicate id " + c[0]);
    rows.push_back({c[0], resolve(base, c[1]), resolve(base, c[2]), resolve(base, c[3]), resolve(base, c[4]),
                    resolve(base, c[5])});
  }
  if (rows.empty()) fail(Errc::EmptyInput, path.string() + ": no samples");
  return rows;
}

std::vector<PairPlan> plan_pairs(std::size_t n_source, std::size_t n_target, std::uint64_t seed) {
  const bool shuffle_source = n_source > n_target;
  std::vector<std::size_t> order(shuffle_source ? n_source : n_target);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Xoshiro256ss rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t n = std::min(n_source, n_target);
  std::vector<PairPlan> plan(n);
  for (std::size_t k = 0; k < n; ++k)
    plan[k] = shuffle_source ? PairPlan{order[k], k} : PairPlan{k, order[k]};
  return plan;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frustum mixing and pseudo-label tools for cross-modal segmentation data", "fmx"};
  app.require_subcommand(1);

  PackArgs pack;
  auto* sc_pack = app.add_subcommand("pack", "Merge a directory of boolean masks into one mask pack");
  sc_pack->add_option("--masks-dir", pack.masks_dir, "Directory of FBMK .fmx mask files")->required();
  sc_pack->add_option("--classes", pack.classes, "TSV 'mask<TAB>class' assigning a VFM class to each mask file");
  sc_pack->add_option("--out", pack.out, "Output FMKP file")->required();

  MixArgs mix;
  auto* sc_mix = app.add_subcommand("mix", "Frustum-mix paired source/target samples in both directions");
  sc_mix->add_option("--source-manifest", mix.source_manifest, "Source-domain manifest TSV")->required();
  sc_mix->add_option("--target-manifest", mix.target_manifest, "Target-domain manifest TSV")->required();
  sc_mix->add_option("--proportion", mix.proportion,
                     "Fraction of masks sampled: large=4/5, medium=3/5, small=1/3, or a number in (0,1]")
      ->default_str("medium");
  sc_mix->add_option("--seed", mix.seed, "Global seed")->required();
  sc_mix->add_option("--out-dir", mix.out_dir, "Output directory")->required();

  FuseArgs fuse;
  auto* sc_fuse = app.add_subcommand("fuse", "Fuse network and VFM predictions into refined pseudo-labels");
  sc_fuse->add_option("--net-probs", fuse.net_probs, "FPRB over semantic classes (probabilities or logits)")->required();
  sc_fuse->add_option("--vfm-probs", fuse.vfm_probs, "FPRB over VFM classes (probabilities or logits)")->required();
  sc_fuse->add_option("--mapping", fuse.mapping, "Class mapping TSV")->required();
  sc_fuse->add_option("--tau", fuse.tau, "Ignore positions whose unmapped VFM mass exceeds tau")->default_val(kDefaultTau);
  sc_fuse->add_option("--out", fuse.out, "Output FLBL file")->required();

  EvalArgs eval;
  auto* sc_eval = app.add_subcommand("eval", "Per-class IoU and mIoU");
  sc_eval->add_option("--pred", eval.pred, "Predicted FLBL")->required();
  sc_eval->add_option("--gt", eval.gt, "Ground-truth FLBL")->required();
  sc_eval->add_option("--num-classes", eval.num_classes, "Number of classes")->required();

  LossesArgs losses;
  auto* sc_losses = app.add_subcommand("losses", "Evaluate the loss ledger");
  sc_losses->add_option("--inputs", losses.inputs, "Manifest TSV 'key<TAB>path'")->required();
  sc_losses->add_option("--lambdas", losses.lambdas, "Cross-modal weights src,trg,m")->default_str("1,1,1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sc_pack) return cmd_pack(pack, out);
    if (*sc_mix) return cmd_mix(mix, out, err);
    if (*sc_fuse) return cmd_fuse(fuse, out);
    if (*sc_eval) return cmd_eval(eval, out);
    if (*sc_losses) return cmd_losses(losses, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fmx::cli
