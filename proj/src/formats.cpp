#include "frustummix/formats.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "byte_io.hpp"
#include "frustummix/error.hpp"

namespace fmx {

using detail::ByteReader;
using detail::ByteWriter;

namespace {

// Smallest possible container: magic, version, flags, crc.
constexpr std::size_t kMinContainer = 4 + 1 + 1 + 4;
constexpr std::size_t kChecksumStart = 5;

struct KindInfo {
  ContainerKind kind;
  char magic[5];
};

constexpr KindInfo kKinds[] = {
    {ContainerKind::Image, "FMIM"},      {ContainerKind::PointCloud, "FPTS"},
    {ContainerKind::LabelMap, "FLBL"},   {ContainerKind::ClassMap, "FPRB"},
    {ContainerKind::Camera, "FCAM"},     {ContainerKind::MaskPack, "FMKP"},
    {ContainerKind::BinaryMask, "FBMK"}, {ContainerKind::PointImage, "FPIM"},
    {ContainerKind::Provenance, "FPRV"}, {ContainerKind::MixedSample, "FMXS"},
};

const KindInfo& info(ContainerKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k;
  fail(Errc::InvalidValue, "unknown container kind");
}

template <typename Body>
Bytes write_container(ContainerKind kind, std::uint8_t flags, Body&& body) {
  Bytes out;
  ByteWriter w(out);
  w.tag(info(kind).magic);
  w.u8(kFormatVersion);
  w.u8(flags);
  body(w);
  w.u32(crc32(ByteView(out).subspan(kChecksumStart)));
  return out;
}

struct Container {
  std::uint8_t flags;
  ByteReader body;
};

Container open_container(ByteView bytes, ContainerKind kind) {
  if (bytes.size() < kMinContainer) fail(Errc::Truncated, "stream shorter than the minimal container");
  const auto& k = info(kind);
  if (!std::equal(k.magic, k.magic + 4, bytes.begin()))
    fail(Errc::BadMagic, std::string("expected magic ") + k.magic);
  if (bytes[4] != kFormatVersion)
    fail(Errc::VersionMismatch, "unsupported container version " + std::to_string(bytes[4]));
  const std::size_t crc_at = bytes.size() - 4;
  ByteReader trailer(bytes.subspan(crc_at));
  const std::uint32_t stored = trailer.u32();
  if (crc32(bytes.subspan(kChecksumStart, crc_at - kChecksumStart)) != stored)
    fail(Errc::CrcMismatch, std::string(k.magic) + " payload checksum mismatch");
  return {bytes[5], ByteReader(bytes.subspan(6, crc_at - 6))};
}

void expect_flags(std::uint8_t flags, std::uint8_t allowed) {
  if (flags & ~allowed) fail(Errc::MalformedStream, "unknown flag bits set");
}

void expect_end(const ByteReader& r) {
  if (r.remaining() != 0) fail(Errc::MalformedStream, "trailing bytes after payload");
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) fail(Errc::MalformedStream, "shape product overflows");
  return a * b;
}

std::vector<float> read_f32s(ByteReader& r, std::uint64_t n) {
  r.need_elements(n, 4);
  std::vector<float> v(n);
  for (auto& x : v) x = r.f32();
  return v;
}

std::vector<std::uint16_t> read_u16s(ByteReader& r, std::uint64_t n) {
  r.need_elements(n, 2);
  std::vector<std::uint16_t> v(n);
  for (auto& x : v) x = r.u16();
  return v;
}

std::vector<std::uint32_t> read_u32s(ByteReader& r, std::uint64_t n) {
  r.need_elements(n, 4);
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = r.u32();
  return v;
}

std::vector<std::uint8_t> read_u8s(ByteReader& r, std::uint64_t n) {
  auto s = r.bytes(n);
  return {s.begin(), s.end()};
}

std::vector<Domain> read_domains(ByteReader& r, std::uint64_t n) {
  auto s = r.bytes(n);
  std::vector<Domain> v;
  v.reserve(n);
  for (std::uint8_t b : s) {
    if (b > 1) fail(Errc::MalformedStream, "provenance tag outside {0,1}");
    v.push_back(static_cast<Domain>(b));
  }
  return v;
}

void write_nested(ByteWriter& w, const Bytes& nested) {
  w.u64(nested.size());
  w.bytes(nested);
}

ByteView read_nested(ByteReader& r) {
  const std::uint64_t n = r.u64();
  if (n > r.remaining()) fail(Errc::Truncated, "nested container runs past the payload");
  return r.bytes(static_cast<std::size_t>(n));
}

// --- shared FPRB codec ------------------------------------------------------

constexpr std::uint8_t kLogitFlag = 0x01;

Bytes encode_class_map(const ClassMapFields& f, bool is_logit) {
  return write_container(ContainerKind::ClassMap, is_logit ? kLogitFlag : 0, [&](ByteWriter& w) {
    w.u32(f.height);
    w.u32(f.width);
    w.u16(f.num_classes);
    for (float x : f.data) w.f32(x);
  });
}

// --- Provenance -------------------------------------------------------------

Bytes encode_provenance_parts(FrameSize frame, std::span<const Domain> pixels, std::span<const Domain> points) {
  return write_container(ContainerKind::Provenance, 0, [&](ByteWriter& w) {
    w.u32(frame.height);
    w.u32(frame.width);
    w.u32(static_cast<std::uint32_t>(points.size()));
    for (Domain d : pixels) w.u8(static_cast<std::uint8_t>(d));
    for (Domain d : points) w.u8(static_cast<std::uint8_t>(d));
  });
}

}  // namespace

std::string_view magic_of(ContainerKind kind) { return std::string_view(info(kind).magic, 4); }

ContainerKind peek_kind(ByteView bytes) {
  if (bytes.size() < 4) fail(Errc::Truncated, "stream shorter than its magic");
  for (const auto& k : kKinds)
    if (std::equal(k.magic, k.magic + 4, bytes.begin())) return k.kind;
  fail(Errc::BadMagic, "unrecognised container magic");
}

std::uint32_t crc32(ByteView bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

// --- BinaryMask -------------------------------------------------------------

Report validate(const BinaryMask& m) {
  Report r;
  if (m.data.size() != m.frame.pixels()) {
    r.push_back({"data length", "expected height*width entries"});
    return r;
  }
  if (std::any_of(m.data.begin(), m.data.end(), [](std::uint8_t b) { return b > 1; }))
    r.push_back({"boolean values", "mask entries must be 0 or 1"});
  return r;
}

// --- MaskPack ---------------------------------------------------------------

Report validate(const MaskPackFields& f) {
  Report r;
  if (f.id_matrix.size() != std::size_t{f.height} * f.width) {
    r.push_back({"id matrix length", "expected height*width ids"});
    return r;
  }
  if (f.meta.size() != f.num_masks) {
    r.push_back({"contiguous ids", "mask_meta must hold num_masks entries"});
    return r;
  }
  std::vector<std::uint32_t> seen(std::size_t{f.num_masks} + 1, 0);
  for (const auto& m : f.meta) {
    if (m.id == 0 || m.id > f.num_masks) {
      r.push_back({"contiguous ids", "mask id " + std::to_string(m.id) + " outside 1..num_masks"});
      return r;
    }
    if (seen[m.id]++) {
      r.push_back({"unique meta", "mask id " + std::to_string(m.id) + " listed twice"});
      return r;
    }
  }
  std::vector<std::uint32_t> area(std::size_t{f.num_masks} + 1, 0);
  for (std::uint32_t id : f.id_matrix) {
    if (id > f.num_masks) {
      r.push_back({"meta coverage", "id " + std::to_string(id) + " in matrix has no meta entry"});
      return r;
    }
    ++area[id];
  }
  for (const auto& m : f.meta) {
    if (area[m.id] != m.area) {
      r.push_back({"area", "mask " + std::to_string(m.id) + " records area " + std::to_string(m.area) +
                               " but owns " + std::to_string(area[m.id]) + " pixels"});
      return r;
    }
  }
  if (f.confidence) {
    if (f.confidence->size() != f.num_masks) {
      r.push_back({"confidence length", "one confidence per mask required"});
    } else if (std::any_of(f.confidence->begin(), f.confidence->end(),
                           [](float c) { return !(c >= 0.0f && c <= 1.0f); })) {
      r.push_back({"confidence range", "confidence must lie in [0,1]"});
    }
  }
  return r;
}

MaskPack::MaskPack(MaskPackFields f) : f_(std::move(f)), meta_index_(std::size_t{f_.num_masks} + 1, 0) {
  for (std::size_t i = 0; i < f_.meta.size(); ++i) meta_index_[f_.meta[i].id] = static_cast<std::uint32_t>(i);
}

MaskPack MaskPack::create(MaskPackFields fields) {
  Report r = validate(fields);
  if (!r.empty()) fail(Errc::InvalidValue, "MaskPack: " + format_report(r));
  return MaskPack(std::move(fields));
}

const MaskMeta& MaskPack::meta_for(std::uint32_t id) const {
  if (id == 0 || id > f_.num_masks) fail(Errc::UnknownId, "mask id " + std::to_string(id) + " not in pack");
  return f_.meta[meta_index_[id]];
}

bool MaskPack::is_semantic() const {
  return std::all_of(f_.meta.begin(), f_.meta.end(), [](const MaskMeta& m) { return m.semantic_class != kIgnoreId; });
}

Report validate_semantic(const MaskPackFields& f, std::uint16_t num_vfm_classes) {
  Report r = validate(f);
  if (!r.empty()) return r;
  for (const auto& m : f.meta) {
    if (m.semantic_class == kIgnoreId) {
      r.push_back({"semantic class", "mask " + std::to_string(m.id) + " is label-free"});
      break;
    }
    if (m.semantic_class >= num_vfm_classes) {
      r.push_back({"semantic class", "mask " + std::to_string(m.id) + " class " + std::to_string(m.semantic_class) +
                                         " >= " + std::to_string(num_vfm_classes)});
      break;
    }
  }
  return r;
}

SemanticMaskPack SemanticMaskPack::create(MaskPack pack, std::uint16_t num_vfm_classes) {
  Report r = validate_semantic(pack.fields(), num_vfm_classes);
  if (!r.empty()) fail(Errc::InvalidValue, "SemanticMaskPack: " + format_report(r));
  return SemanticMaskPack(std::move(pack), num_vfm_classes);
}

MaskPack pack_masks(std::span<const BinaryMask> masks, std::optional<std::span<const std::uint16_t>> classes) {
  if (masks.empty()) fail(Errc::EmptyInput, "pack_masks needs at least one mask");
  const FrameSize frame = masks.front().frame;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].frame != frame) fail(Errc::DimensionMismatch, "mask " + std::to_string(i) + " has different dims");
    Report r = validate(masks[i]);
    if (!r.empty()) fail(Errc::InvalidValue, "mask " + std::to_string(i) + ": " + format_report(r));
  }
  if (classes && classes->size() != masks.size())
    fail(Errc::DimensionMismatch, "classes must list one entry per mask");
  if (masks.size() > UINT32_MAX) fail(Errc::OutOfRange, "too many masks");

  std::vector<std::size_t> input_area(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i)
    input_area[i] = static_cast<std::size_t>(std::count(masks[i].data.begin(), masks[i].data.end(), 1));

  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return input_area[a] > input_area[b]; });

  MaskPackFields f;
  f.height = frame.height;
  f.width = frame.width;
  f.num_masks = static_cast<std::uint32_t>(masks.size());
  f.id_matrix.assign(frame.pixels(), 0);
  for (std::size_t i : order) {
    const auto id = static_cast<std::uint32_t>(i + 1);
    const auto& data = masks[i].data;
    for (std::size_t p = 0; p < data.size(); ++p)
      if (data[p]) f.id_matrix[p] = id;
  }
  std::vector<std::uint32_t> area(masks.size() + 1, 0);
  for (std::uint32_t id : f.id_matrix) ++area[id];
  f.meta.reserve(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto id = static_cast<std::uint32_t>(i + 1);
    f.meta.push_back({id, area[id], classes ? (*classes)[i] : kIgnoreId});
  }
  return MaskPack::create(std::move(f));
}

BinaryMask unpack_mask(const MaskPack& pack, std::uint32_t id) {
  if (id == 0 || id > pack.num_masks()) fail(Errc::UnknownId, "mask id " + std::to_string(id) + " not in pack");
  BinaryMask m{pack.frame(), std::vector<std::uint8_t>(pack.frame().pixels(), 0)};
  auto ids = pack.id_matrix();
  for (std::size_t p = 0; p < ids.size(); ++p) m.data[p] = ids[p] == id ? 1 : 0;
  return m;
}

// --- encoders ---------------------------------------------------------------

Bytes encode(const Image& x) {
  return write_container(ContainerKind::Image, 0, [&](ByteWriter& w) {
    w.u32(x.height());
    w.u32(x.width());
    w.u8(x.channels());
    for (float v : x.data()) w.f32(v);
  });
}

constexpr std::uint8_t kHasLabelsFlag = 0x01;

Bytes encode(const PointCloud& x) {
  return write_container(ContainerKind::PointCloud, x.has_labels() ? kHasLabelsFlag : 0, [&](ByteWriter& w) {
    w.u32(x.count());
    for (float v : x.xyz()) w.f32(v);
    for (std::uint16_t l : x.labels()) w.u16(l);
  });
}

Bytes encode(const LabelMap& x) {
  return write_container(ContainerKind::LabelMap, 0, [&](ByteWriter& w) {
    w.u32(x.height());
    w.u32(x.width());
    w.u16(x.num_classes());
    for (std::uint16_t l : x.data()) w.u16(l);
  });
}

Bytes encode(const ProbabilityMap& x) { return encode_class_map(x.fields(), false); }
Bytes encode(const LogitMap& x) { return encode_class_map(x.fields(), true); }

Bytes encode(const CameraModel& x) {
  return write_container(ContainerKind::Camera, 0, [&](ByteWriter& w) {
    w.f32(x.fx());
    w.f32(x.fy());
    w.f32(x.cx());
    w.f32(x.cy());
    for (float v : x.extrinsic()) w.f32(v);
  });
}

constexpr std::uint8_t kHasConfidenceFlag = 0x01;

Bytes encode(const MaskPack& x) {
  const auto& f = x.fields();
  return write_container(ContainerKind::MaskPack, f.confidence ? kHasConfidenceFlag : 0, [&](ByteWriter& w) {
    w.u32(f.height);
    w.u32(f.width);
    w.u32(f.num_masks);
    for (std::uint32_t id : f.id_matrix) w.u32(id);
    for (const auto& m : f.meta) {
      w.u32(m.id);
      w.u32(m.area);
      w.u16(m.semantic_class);
    }
    if (f.confidence)
      for (float c : *f.confidence) w.f32(c);
  });
}

Bytes encode(const BinaryMask& x) {
  Report r = validate(x);
  if (!r.empty()) fail(Errc::InvalidValue, "BinaryMask: " + format_report(r));
  return write_container(ContainerKind::BinaryMask, 0, [&](ByteWriter& w) {
    w.u32(x.frame.height);
    w.u32(x.frame.width);
    w.bytes(x.data);
  });
}

Bytes encode(const PointImage& x) {
  const auto& f = x.fields();
  return write_container(ContainerKind::PointImage, 0, [&](ByteWriter& w) {
    w.u32(f.count);
    w.u32(f.frame.height);
    w.u32(f.frame.width);
    for (std::uint32_t u : f.u) w.u32(u);
    for (std::uint32_t v : f.v) w.u32(v);
    for (float d : f.depth) w.f32(d);
    w.bytes(f.valid);
  });
}

Bytes encode(const Provenance& x) {
  if (x.pixels.size() != x.frame.pixels())
    fail(Errc::InvalidValue, "Provenance: one pixel tag per frame pixel required");
  return encode_provenance_parts(x.frame, x.pixels, x.points);
}

Bytes encode(const MixedSample& x) {
  return write_container(ContainerKind::MixedSample, 0, [&](ByteWriter& w) {
    write_nested(w, encode(x.image()));
    write_nested(w, encode(x.points()));
    write_nested(w, encode(x.labels_2d()));
    write_nested(w, encode(x.indices()));
    write_nested(w, encode_provenance_parts(x.image().frame(), x.pixel_provenance(), x.point_provenance()));
  });
}

// --- decoders ---------------------------------------------------------------

Image decode_image(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::Image);
  expect_flags(flags, 0);
  ImageFields f;
  f.height = r.u32();
  f.width = r.u32();
  f.channels = r.u8();
  f.data = read_f32s(r, checked_mul(checked_mul(f.height, f.width), f.channels));
  expect_end(r);
  return Image::create(std::move(f));
}

PointCloud decode_point_cloud(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::PointCloud);
  expect_flags(flags, kHasLabelsFlag);
  PointCloudFields f;
  f.count = r.u32();
  f.xyz = read_f32s(r, checked_mul(f.count, 3));
  if (flags & kHasLabelsFlag) f.labels = read_u16s(r, f.count);
  expect_end(r);
  return PointCloud::create(std::move(f));
}

LabelMap decode_label_map(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::LabelMap);
  expect_flags(flags, 0);
  LabelMapFields f;
  f.height = r.u32();
  f.width = r.u32();
  f.num_classes = r.u16();
  f.data = read_u16s(r, checked_mul(f.height, f.width));
  expect_end(r);
  return LabelMap::create(std::move(f));
}

AnyClassMap decode_class_map(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::ClassMap);
  expect_flags(flags, kLogitFlag);
  AnyClassMap out;
  out.is_logit = (flags & kLogitFlag) != 0;
  out.fields.height = r.u32();
  out.fields.width = r.u32();
  out.fields.num_classes = r.u16();
  out.fields.data = read_f32s(r, checked_mul(checked_mul(out.fields.height, out.fields.width), out.fields.num_classes));
  expect_end(r);
  return out;
}

ProbabilityMap decode_probability_map(ByteView bytes) {
  auto any = decode_class_map(bytes);
  if (any.is_logit) fail(Errc::MalformedStream, "FPRB stream holds logits, expected probabilities");
  return ProbabilityMap::create(std::move(any.fields));
}

LogitMap decode_logit_map(ByteView bytes) {
  auto any = decode_class_map(bytes);
  if (!any.is_logit) fail(Errc::MalformedStream, "FPRB stream holds probabilities, expected logits");
  return LogitMap::create(std::move(any.fields));
}

CameraModel decode_camera(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::Camera);
  expect_flags(flags, 0);
  CameraFields f;
  f.fx = r.f32();
  f.fy = r.f32();
  f.cx = r.f32();
  f.cy = r.f32();
  for (auto& v : f.extrinsic) v = r.f32();
  expect_end(r);
  return CameraModel::create(f);
}

MaskPack decode_mask_pack(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::MaskPack);
  expect_flags(flags, kHasConfidenceFlag);
  MaskPackFields f;
  f.height = r.u32();
  f.width = r.u32();
  f.num_masks = r.u32();
  f.id_matrix = read_u32s(r, checked_mul(f.height, f.width));
  r.need_elements(f.num_masks, 10);
  f.meta.resize(f.num_masks);
  for (auto& m : f.meta) {
    m.id = r.u32();
    m.area = r.u32();
    m.semantic_class = r.u16();
  }
  if (flags & kHasConfidenceFlag) f.confidence = read_f32s(r, f.num_masks);
  expect_end(r);
  return MaskPack::create(std::move(f));
}

BinaryMask decode_binary_mask(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::BinaryMask);
  expect_flags(flags, 0);
  BinaryMask m;
  m.frame.height = r.u32();
  m.frame.width = r.u32();
  m.data = read_u8s(r, checked_mul(m.frame.height, m.frame.width));
  expect_end(r);
  Report rep = validate(m);
  if (!rep.empty()) fail(Errc::InvalidValue, "BinaryMask: " + format_report(rep));
  return m;
}

PointImage decode_point_image(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::PointImage);
  expect_flags(flags, 0);
  PointImageFields f;
  f.count = r.u32();
  f.frame.height = r.u32();
  f.frame.width = r.u32();
  r.need_elements(f.count, 13);
  f.u = read_u32s(r, f.count);
  f.v = read_u32s(r, f.count);
  f.depth = read_f32s(r, f.count);
  f.valid = read_u8s(r, f.count);
  expect_end(r);
  return PointImage::create(std::move(f));
}

Provenance decode_provenance(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::Provenance);
  expect_flags(flags, 0);
  Provenance p;
  p.frame.height = r.u32();
  p.frame.width = r.u32();
  const std::uint32_t count = r.u32();
  p.pixels = read_domains(r, checked_mul(p.frame.height, p.frame.width));
  p.points = read_domains(r, count);
  expect_end(r);
  return p;
}

MixedSample decode_mixed_sample(ByteView bytes) {
  auto [flags, r] = open_container(bytes, ContainerKind::MixedSample);
  expect_flags(flags, 0);
  Image image = decode_image(read_nested(r));
  PointCloud points = decode_point_cloud(read_nested(r));
  LabelMap labels = decode_label_map(read_nested(r));
  PointImage indices = decode_point_image(read_nested(r));
  Provenance prov = decode_provenance(read_nested(r));
  expect_end(r);
  if (prov.frame != image.frame()) fail(Errc::MalformedStream, "provenance frame differs from image frame");
  return MixedSample::create(MixedSampleFields{std::move(image), std::move(points), std::move(labels),
                                               std::move(indices), std::move(prov.pixels), std::move(prov.points)});
}

// --- files ------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::Io, "read failed for " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::Io, "write failed for " + path.string());
}

}  // namespace fmx
