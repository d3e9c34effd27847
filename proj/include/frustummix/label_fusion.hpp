#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frustummix/core.hpp"

namespace fmx {

inline constexpr double kDefaultTau = 0.5;

// ---------------------------------------------------------------------------
// ClassMapping: VFM class ids -> scenario semantic ids. VFM classes without an
// entry are unmapped; their probability mass feeds the ignore decision.
//
// File format (UTF-8 TSV):
//
//   # scenario: A2D2/SemanticKITTI
//   # semantic: car truck bike ...      (space-separated class names, in id order)
//   # na: parking                       (optional; classes with no VFM source)
//   vfm_class<TAB>vfm_id<TAB>semantic_id
//   car<TAB>2<TAB>0
//
// Other lines starting with '#' and blank lines are ignored.

struct MappingEntry {
  std::string vfm_class_name;
  std::uint16_t vfm_class_id = 0;
  std::uint16_t semantic_id = 0;

  friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

struct ClassMappingFields {
  std::string scenario_name;
  std::vector<std::string> semantic_names;  // size == num_semantic
  std::vector<std::uint16_t> not_available;  // semantic ids declared N/A
  std::vector<MappingEntry> entries;

  friend bool operator==(const ClassMappingFields&, const ClassMappingFields&) = default;
};

Report validate(const ClassMappingFields& f);

class ClassMapping {
 public:
  static ClassMapping create(ClassMappingFields fields);
  // Errc::Parse for malformed text, Errc::DuplicateId for a repeated vfm_id,
  // Errc::InvalidValue for any other invariant violation.
  static ClassMapping parse(std::string_view tsv);
  static ClassMapping load(const std::filesystem::path& path);

  const std::string& scenario_name() const { return f_.scenario_name; }
  std::uint16_t num_semantic() const { return static_cast<std::uint16_t>(f_.semantic_names.size()); }
  const std::vector<std::string>& semantic_names() const { return f_.semantic_names; }
  std::span<const MappingEntry> entries() const { return f_.entries; }
  // Largest vfm_class_id + 1.
  std::uint16_t min_vfm_classes() const;
  const ClassMappingFields& fields() const { return f_; }

  std::string to_tsv() const;

 private:
  explicit ClassMapping(ClassMappingFields f) : f_(std::move(f)) {}
  ClassMappingFields f_;
};

// ---------------------------------------------------------------------------

// Per-position softmax with max subtraction, accumulated in double.
ProbabilityMap softmax(const LogitMap& logits);

// Semantic-class scores after remapping. Rows are not renormalised: the
// semantic row sum plus unmapped_mass equals the input row sum.
struct RemappedProbs {
  ClassMapFields semantic;
  std::vector<float> unmapped_mass;  // one per position
};

RemappedProbs remap_vfm_probs(const ProbabilityMap& vfm_probs, const ClassMapping& mapping);

// Refined pseudo-labels: argmax_c (a[p,c] + b[p,c]) with ties resolved to the
// lowest class, or kIgnoreId where unmapped_mass[p] > tau. Both operands must
// share shape; entries must be finite and nonnegative (rows need not sum to 1).
// An empty unmapped span means no ignore decision.
LabelMap fuse_pl(const ClassMapFields& net_probs, const ClassMapFields& vfm_semantic_probs,
                 std::span<const float> unmapped_mass, double tau = kDefaultTau);

LabelMap fuse_pl(const ProbabilityMap& net_probs, const RemappedProbs& vfm, double tau = kDefaultTau);

// Per-position argmax, lowest index on ties.
LabelMap hard_pl(const ProbabilityMap& probs);

}  // namespace fmx
