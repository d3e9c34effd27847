#pragma once

// Mask packing and the `.fmx` binary containers.
//
// Every container is laid out as
//
//   magic[4] | version u8 | flags u8 | shape header | payload | crc32 u32
//
// with all integers little-endian and floats IEEE-754 binary32. The CRC32
// (reflected polynomial 0xEDB88320) covers every byte after the version byte
// up to the checksum itself. docs/formats.md lists each layout field by field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "frustummix/core.hpp"

namespace fmx {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::uint8_t kFormatVersion = 0x01;

enum class ContainerKind {
  Image,           // FMIM
  PointCloud,      // FPTS
  LabelMap,        // FLBL
  ClassMap,        // FPRB (flag selects probability or logit)
  Camera,          // FCAM
  MaskPack,        // FMKP
  BinaryMask,      // FBMK
  PointImage,      // FPIM
  Provenance,      // FPRV
  MixedSample,     // FMXS
};

std::string_view magic_of(ContainerKind kind);

// Reads the magic of a stream without validating the rest.
ContainerKind peek_kind(ByteView bytes);

std::uint32_t crc32(ByteView bytes);

// ---------------------------------------------------------------------------
// Boolean per-pixel mask (one byte per pixel, 0 or 1).

struct BinaryMask {
  FrameSize frame;
  std::vector<std::uint8_t> data;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

Report validate(const BinaryMask& m);

// ---------------------------------------------------------------------------
// MaskPack: many (possibly overlapping) masks merged into one ID matrix.

struct MaskMeta {
  std::uint32_t id = 0;
  std::uint32_t area = 0;
  std::uint16_t semantic_class = kIgnoreId;  // kIgnoreId = label-free

  friend bool operator==(const MaskMeta&, const MaskMeta&) = default;
};

struct MaskPackFields {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t num_masks = 0;
  std::vector<std::uint32_t> id_matrix;  // 0 = background
  std::vector<MaskMeta> meta;
  std::optional<std::vector<float>> confidence;  // per meta entry, in [0,1]

  friend bool operator==(const MaskPackFields&, const MaskPackFields&) = default;
};

Report validate(const MaskPackFields& f);

class MaskPack {
 public:
  static MaskPack create(MaskPackFields fields);

  std::uint32_t height() const { return f_.height; }
  std::uint32_t width() const { return f_.width; }
  FrameSize frame() const { return {f_.height, f_.width}; }
  std::uint32_t num_masks() const { return f_.num_masks; }
  std::span<const std::uint32_t> id_matrix() const { return f_.id_matrix; }
  std::span<const MaskMeta> meta() const { return f_.meta; }
  const MaskMeta& meta_for(std::uint32_t id) const;
  // True when every mask carries a semantic class.
  bool is_semantic() const;
  const MaskPackFields& fields() const { return f_; }

  friend bool operator==(const MaskPack&, const MaskPack&) = default;

 private:
  explicit MaskPack(MaskPackFields f);
  MaskPackFields f_;
  std::vector<std::uint32_t> meta_index_;  // id -> position in f_.meta
};

Report validate_semantic(const MaskPackFields& f, std::uint16_t num_vfm_classes);

// A MaskPack whose masks all carry a VFM class below num_vfm_classes.
class SemanticMaskPack {
 public:
  static SemanticMaskPack create(MaskPack pack, std::uint16_t num_vfm_classes);

  const MaskPack& pack() const { return pack_; }
  std::uint16_t num_vfm_classes() const { return num_vfm_classes_; }

 private:
  SemanticMaskPack(MaskPack pack, std::uint16_t n) : pack_(std::move(pack)), num_vfm_classes_(n) {}
  MaskPack pack_;
  std::uint16_t num_vfm_classes_;
};

// Paints masks in decreasing-area order (ties: input order) so smaller masks
// overwrite larger ones. Mask i receives id i + 1; recorded areas are counted
// from the final matrix and may be zero for fully covered masks.
MaskPack pack_masks(std::span<const BinaryMask> masks,
                    std::optional<std::span<const std::uint16_t>> classes = std::nullopt);

BinaryMask unpack_mask(const MaskPack& pack, std::uint32_t id);

// ---------------------------------------------------------------------------
// Provenance sidecar: per-pixel and per-point domain tags.

struct Provenance {
  FrameSize frame;
  std::vector<Domain> pixels;
  std::vector<Domain> points;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// ---------------------------------------------------------------------------
// Codecs. decode(encode(x)) == x bit-exactly for every valid value.

Bytes encode(const Image& x);
Bytes encode(const PointCloud& x);
Bytes encode(const LabelMap& x);
Bytes encode(const ProbabilityMap& x);
Bytes encode(const LogitMap& x);
Bytes encode(const CameraModel& x);
Bytes encode(const MaskPack& x);
Bytes encode(const BinaryMask& x);
Bytes encode(const PointImage& x);
Bytes encode(const Provenance& x);
Bytes encode(const MixedSample& x);

Image decode_image(ByteView bytes);
PointCloud decode_point_cloud(ByteView bytes);
LabelMap decode_label_map(ByteView bytes);
ProbabilityMap decode_probability_map(ByteView bytes);
LogitMap decode_logit_map(ByteView bytes);
// Reads either flavour of FPRB, reporting which one was stored.
struct AnyClassMap {
  ClassMapFields fields;
  bool is_logit = false;
};
AnyClassMap decode_class_map(ByteView bytes);
CameraModel decode_camera(ByteView bytes);
MaskPack decode_mask_pack(ByteView bytes);
BinaryMask decode_binary_mask(ByteView bytes);
PointImage decode_point_image(ByteView bytes);
Provenance decode_provenance(ByteView bytes);
MixedSample decode_mixed_sample(ByteView bytes);

template <typename T>
T decode(ByteView bytes);

template <> inline Image decode<Image>(ByteView b) { return decode_image(b); }
template <> inline PointCloud decode<PointCloud>(ByteView b) { return decode_point_cloud(b); }
template <> inline LabelMap decode<LabelMap>(ByteView b) { return decode_label_map(b); }
template <> inline ProbabilityMap decode<ProbabilityMap>(ByteView b) { return decode_probability_map(b); }
template <> inline LogitMap decode<LogitMap>(ByteView b) { return decode_logit_map(b); }
template <> inline CameraModel decode<CameraModel>(ByteView b) { return decode_camera(b); }
template <> inline MaskPack decode<MaskPack>(ByteView b) { return decode_mask_pack(b); }
template <> inline BinaryMask decode<BinaryMask>(ByteView b) { return decode_binary_mask(b); }
template <> inline PointImage decode<PointImage>(ByteView b) { return decode_point_image(b); }
template <> inline Provenance decode<Provenance>(ByteView b) { return decode_provenance(b); }
template <> inline MixedSample decode<MixedSample>(ByteView b) { return decode_mixed_sample(b); }

// ---------------------------------------------------------------------------
// File helpers (Errc::Io on failure).

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView bytes);

template <typename T>
T load(const std::filesystem::path& path) {
  return decode<T>(read_file(path));
}

template <typename T>
void save(const std::filesystem::path& path, const T& value) {
  write_file(path, encode(value));
}

}  // namespace fmx
