#pragma once

// Forward evaluation of the training losses and the evaluation metric.
// All reductions accumulate in double in row-major position order.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frustummix/core.hpp"
#include "frustummix/exact_sum.hpp"

namespace fmx {

inline constexpr double kLogClamp = 1e-12;

// Mean of -ln(max(p[label], 1e-12)) over positions whose label is not
// kIgnoreId. Errc::EmptySupervision if every position is ignored.
double cross_entropy(const ProbabilityMap& probs, const LabelMap& labels);

// Mean over positions of sum_c p ln(p / q), both operands clamped to >= 1e-12.
double kl_divergence(const ProbabilityMap& p, const ProbabilityMap& q);

// Elementwise mean of two distributions, renormalised per position.
ProbabilityMap ensemble(const ProbabilityMap& a, const ProbabilityMap& b);

struct IouReport {
  // nullopt for classes with TP + FP + FN == 0; those are left out of the mean.
  std::vector<std::optional<double>> per_class;
  double mean = 0.0;
};

// PASCAL-VOC IoU from the confusion matrix. Positions whose ground truth is
// kIgnoreId are skipped; a kIgnoreId prediction on a labelled position counts
// as a miss for the true class.
IouReport miou(const LabelMap& pred, const LabelMap& gt, std::uint16_t num_classes);

std::string format_iou_tsv(const IouReport& report);

// ---------------------------------------------------------------------------
// Loss ledger

enum class LossTerm : std::size_t {
  CeSource2d,
  CeSource3d,
  CeTarget2d,
  CeTarget3d,
  CeMixSrcTrg2d,
  CeMixSrcTrg3d,
  CeMixTrgSrc2d,
  CeMixTrgSrc3d,
  KlSource2dTo3d,
  KlSource3dTo2d,
  KlTarget2dTo3d,
  KlTarget3dTo2d,
  KlMixSrcTrg2dTo3d,
  KlMixSrcTrg3dTo2d,
  KlMixTrgSrc2dTo3d,
  KlMixTrgSrc3dTo2d,
};
inline constexpr std::size_t kNumLossTerms = 16;

std::string_view loss_term_name(LossTerm term);

struct LossWeights {
  double xm_src = 1.0;
  double xm_trg = 1.0;
  double xm_mix = 1.0;
};

// Predictions of both networks for one domain, sampled at the domain's point
// indices (height 1, width = number of points). main_* are the prediction
// heads, mimic_* the cross-modal heads.
struct DomainPredictions {
  ProbabilityMap main_2d;
  ProbabilityMap mimic_2d;
  ProbabilityMap main_3d;
  ProbabilityMap mimic_3d;
  LabelMap labels_2d;  // supervision for the 2D head
  LabelMap labels_3d;  // supervision for the 3D head
};

struct LedgerInputs {
  DomainPredictions source;
  DomainPredictions target;
  DomainPredictions mix_src_trg;
  DomainPredictions mix_trg_src;
};

class LossLedger {
 public:
  // Builds the weighted total from the sixteen entries:
  //   total = sum(CE) + xm_src * sum(KL source) + xm_trg * sum(KL target)
  //         + xm_mix * sum(KL mix)
  // accumulated exactly and rounded once.
  static LossLedger from_terms(const std::array<double, kNumLossTerms>& terms, LossWeights weights);

  double term(LossTerm t) const { return terms_[static_cast<std::size_t>(t)]; }
  const std::array<double, kNumLossTerms>& terms() const { return terms_; }
  const LossWeights& weights() const { return weights_; }
  double total() const { return total_; }
  const ExactSum& exact_total() const { return exact_total_; }
  // xm_mix times the four mixed-domain KL entries, exactly.
  const ExactSum& exact_mixed_kl() const { return exact_mixed_kl_; }
  double mixed_kl_subtotal() const { return exact_mixed_kl_.value(); }

  Report validate() const;
  std::string to_tsv() const;

 private:
  std::array<double, kNumLossTerms> terms_{};
  LossWeights weights_;
  double total_ = 0.0;
  ExactSum exact_total_;
  ExactSum exact_mixed_kl_;
};

// Cross-modal pairing: X->Y loss = KL(main head of Y || mimic head of X),
// i.e. 2D->3D = KL(main_3d || mimic_2d) and 3D->2D = KL(main_2d || mimic_3d).
// Tiny negative KL values from float rounding are stored as 0.
LossLedger assemble_ledger(const LedgerInputs& inputs, LossWeights weights);

}  // namespace fmx
