#include "frustummix/label_fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "frustummix/error.hpp"

namespace fmx {

namespace {

constexpr std::string_view kHeader = "vfm_class\tvfm_id\tsemantic_id";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::uint16_t parse_u16(std::string_view s, std::size_t line_no) {
  s = trim(s);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || value > 0xFFFE)
    fail(Errc::Parse, "line " + std::to_string(line_no) + ": expected an integer id, got '" + std::string(s) + "'");
  return static_cast<std::uint16_t>(value);
}

void check_input(const ClassMapFields& f, const char* what) {
  std::size_t expected = f.positions() * f.num_classes;
  if (f.num_classes == 0 || f.data.size() != expected)
    fail(Errc::DimensionMismatch, std::string(what) + ": data length does not match shape");
  for (float x : f.data)
    if (!std::isfinite(x) || x < 0.0f) fail(Errc::InvalidValue, std::string(what) + ": scores must be finite and >= 0");
}

}  // namespace

// --- ClassMapping -----------------------------------------------------------

Report validate(const ClassMappingFields& f) {
  Report r;
  const std::size_t n = f.semantic_names.size();
  if (n == 0 || n > 0xFFFE) r.push_back({"semantic classes", "need between 1 and 65534 semantic classes"});
  std::vector<std::uint16_t> ids;
  std::vector<int> coverage(n, 0);
  for (const auto& e : f.entries) {
    ids.push_back(e.vfm_class_id);
    if (e.semantic_id >= n) {
      r.push_back({"semantic bound", "entry '" + e.vfm_class_name + "' targets semantic id " +
                                         std::to_string(e.semantic_id) + " >= " + std::to_string(n)});
    } else {
      ++coverage[e.semantic_id];
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    r.push_back({"unique vfm id", "a vfm_class_id appears in more than one entry"});
  for (std::uint16_t na : f.not_available) {
    if (na >= n) {
      r.push_back({"semantic bound", "N/A class id out of range"});
    } else if (coverage[na] != 0) {
      r.push_back({"N/A coverage", "class '" + f.semantic_names[na] + "' is declared N/A but has entries"});
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    const bool na = std::find(f.not_available.begin(), f.not_available.end(), s) != f.not_available.end();
    if (!na && coverage[s] == 0)
      r.push_back({"semantic coverage", "class '" + f.semantic_names[s] + "' has no entry and is not declared N/A"});
  }
  return r;
}

ClassMapping ClassMapping::create(ClassMappingFields fields) {
  Report r = validate(fields);
  if (!r.empty()) fail(Errc::InvalidValue, "ClassMapping: " + format_report(r));
  return ClassMapping(std::move(fields));
}

ClassMapping ClassMapping::parse(std::string_view tsv) {
  ClassMappingFields f;
  std::vector<std::string> na_names;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(tsv, '\n')) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      std::string_view body = trim(t.substr(1));
      auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      std::string_view key = trim(body.substr(0, colon));
      std::string_view value = trim(body.substr(colon + 1));
      if (key == "scenario") f.scenario_name = std::string(value);
      else if (key == "semantic") f.semantic_names = words(value);
      else if (key == "na") na_names = words(value);
      continue;
    }
    if (!header_seen) {
      if (t != kHeader) fail(Errc::Parse, "line " + std::to_string(line_no) + ": expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    auto cols = split(t, '\t');
    if (cols.size() != 3) fail(Errc::Parse, "line " + std::to_string(line_no) + ": expected 3 tab-separated columns");
    MappingEntry e{std::string(trim(cols[0])), parse_u16(cols[1], line_no), parse_u16(cols[2], line_no)};
    if (e.vfm_class_name.empty()) fail(Errc::Parse, "line " + std::to_string(line_no) + ": empty class name");
    for (const auto& prev : f.entries)
      if (prev.vfm_class_id == e.vfm_class_id)
        fail(Errc::DuplicateId, "line " + std::to_string(line_no) + ": vfm_id " + std::to_string(e.vfm_class_id) +
                                    " already mapped");
    f.entries.push_back(std::move(e));
  }
  if (!header_seen) fail(Errc::Parse, "missing header line");
  if (f.semantic_names.empty()) {
    // Without a '# semantic:' line, classes are anonymous and sized by the
    // largest id in use.
    std::uint16_t max_id = 0;
    for (const auto& e : f.entries) max_id = std::max(max_id, e.semantic_id);
    for (std::uint16_t s = 0; s <= max_id && !f.entries.empty(); ++s) f.semantic_names.push_back("class" + std::to_string(s));
  }
  for (const auto& name : na_names) {
    auto it = std::find(f.semantic_names.begin(), f.semantic_names.end(), name);
    if (it == f.semantic_names.end()) fail(Errc::Parse, "N/A class '" + name + "' is not a semantic class");
    f.not_available.push_back(static_cast<std::uint16_t>(it - f.semantic_names.begin()));
  }
  return create(std::move(f));
}

ClassMapping ClassMapping::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open mapping " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::uint16_t ClassMapping::min_vfm_classes() const {
  std::uint16_t n = 0;
  for (const auto& e : f_.entries) n = std::max<std::uint16_t>(n, e.vfm_class_id + 1);
  return n;
}

std::string ClassMapping::to_tsv() const {
  std::ostringstream os;
  os << "# scenario: " << f_.scenario_name << '\n';
  os << "# semantic:";
  for (const auto& n : f_.semantic_names) os << ' ' << n;
  os << '\n';
  if (!f_.not_available.empty()) {
    os << "# na:";
    for (auto id : f_.not_available) os << ' ' << f_.semantic_names[id];
    os << '\n';
  }
  os << kHeader << '\n';
  for (const auto& e : f_.entries) os << e.vfm_class_name << '\t' << e.vfm_class_id << '\t' << e.semantic_id << '\n';
  return os.str();
}

// --- probabilities ----------------------------------------------------------

ProbabilityMap softmax(const LogitMap& logits) {
  ClassMapFields out;
  out.height = logits.height();
  out.width = logits.width();
  out.num_classes = logits.num_classes();
  out.data.resize(logits.data().size());
  const std::size_t c = out.num_classes;
  std::vector<double> e(c);
  for (std::size_t p = 0; p < logits.positions(); ++p) {
    auto row = logits.row(p);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      e[k] = std::exp(double{row[k]} - mx);
      sum += e[k];
    }
    for (std::size_t k = 0; k < c; ++k) out.data[p * c + k] = static_cast<float>(e[k] / sum);
  }
  return ProbabilityMap::create(std::move(out));
}

RemappedProbs remap_vfm_probs(const ProbabilityMap& vfm_probs, const ClassMapping& mapping) {
  const std::size_t vc = vfm_probs.num_classes();
  for (const auto& e : mapping.entries())
    if (e.vfm_class_id >= vc)
      fail(Errc::UnknownClass, "mapping references vfm class " + std::to_string(e.vfm_class_id) +
                                   " but probabilities cover only " + std::to_string(vc));

  std::vector<int> target(vc, -1);
  for (const auto& e : mapping.entries()) target[e.vfm_class_id] = e.semantic_id;

  const std::size_t sc = mapping.num_semantic();
  RemappedProbs out;
  out.semantic.height = vfm_probs.height();
  out.semantic.width = vfm_probs.width();
  out.semantic.num_classes = mapping.num_semantic();
  out.semantic.data.assign(vfm_probs.positions() * sc, 0.0f);
  out.unmapped_mass.resize(vfm_probs.positions());

  std::vector<double> acc(sc);
  for (std::size_t p = 0; p < vfm_probs.positions(); ++p) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double unmapped = 0.0;
    auto row = vfm_probs.row(p);
    for (std::size_t k = 0; k < vc; ++k) {
      if (target[k] < 0) unmapped += row[k];
      else acc[static_cast<std::size_t>(target[k])] += row[k];
    }
    for (std::size_t s = 0; s < sc; ++s) out.semantic.data[p * sc + s] = static_cast<float>(acc[s]);
    out.unmapped_mass[p] = static_cast<float>(unmapped);
  }
  return out;
}

LabelMap fuse_pl(const ClassMapFields& a, const ClassMapFields& b, std::span<const float> unmapped_mass, double tau) {
  check_input(a, "fuse_pl net_probs");
  check_input(b, "fuse_pl vfm_probs");
  if (a.height != b.height || a.width != b.width || a.num_classes != b.num_classes)
    fail(Errc::DimensionMismatch, "fuse_pl: operand shapes differ");
  if (!unmapped_mass.empty() && unmapped_mass.size() != a.positions())
    fail(Errc::DimensionMismatch, "fuse_pl: unmapped mass must have one entry per position");
  if (!(tau >= 0.0 && tau <= 1.0)) fail(Errc::OutOfRange, "fuse_pl: tau must lie in [0,1]");

  LabelMapFields out;
  out.height = a.height;
  out.width = a.width;
  out.num_classes = a.num_classes;
  out.data.resize(a.positions());
  const std::size_t c = a.num_classes;
  for (std::size_t p = 0; p < a.positions(); ++p) {
    if (!unmapped_mass.empty() && double{unmapped_mass[p]} > tau) {
      out.data[p] = kIgnoreId;
      continue;
    }
    std::size_t best = 0;
    double best_score = double{a.data[p * c]} + b.data[p * c];
    for (std::size_t k = 1; k < c; ++k) {
      const double s = double{a.data[p * c + k]} + b.data[p * c + k];
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    out.data[p] = static_cast<std::uint16_t>(best);
  }
  return LabelMap::create(std::move(out));
}

LabelMap fuse_pl(const ProbabilityMap& net_probs, const RemappedProbs& vfm, double tau) {
  return fuse_pl(net_probs.fields(), vfm.semantic, vfm.unmapped_mass, tau);
}

LabelMap hard_pl(const ProbabilityMap& probs) {
  LabelMapFields out;
  out.height = probs.height();
  out.width = probs.width();
  out.num_classes = probs.num_classes();
  out.data.resize(probs.positions());
  for (std::size_t p = 0; p < probs.positions(); ++p) {
    auto row = probs.row(p);
    out.data[p] = static_cast<std::uint16_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return LabelMap::create(std::move(out));
}

}  // namespace fmx
