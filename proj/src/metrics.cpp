#include "frustummix/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "frustummix/error.hpp"

namespace fmx {

namespace {

void check_same_shape(const ProbabilityMap& a, const ProbabilityMap& b, const char* what) {
  if (a.frame() != b.frame() || a.num_classes() != b.num_classes())
    fail(Errc::DimensionMismatch, std::string(what) + ": operand shapes differ");
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double cross_entropy(const ProbabilityMap& probs, const LabelMap& labels) {
  if (probs.frame() != labels.frame()) fail(Errc::DimensionMismatch, "cross_entropy: label shape differs from probabilities");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < probs.positions(); ++p) {
    const std::uint16_t label = labels.at(p);
    if (label == kIgnoreId) continue;
    if (label >= probs.num_classes())
      fail(Errc::OutOfRange, "cross_entropy: label " + std::to_string(label) + " has no probability column");
    sum += -std::log(std::max(double{probs.row(p)[label]}, kLogClamp));
    ++n;
  }
  if (n == 0) fail(Errc::EmptySupervision, "cross_entropy: every position is ignored");
  return sum / static_cast<double>(n);
}

double kl_divergence(const ProbabilityMap& p, const ProbabilityMap& q) {
  check_same_shape(p, q, "kl_divergence");
  if (p.positions() == 0) fail(Errc::EmptyInput, "kl_divergence: no positions");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.positions(); ++i) {
    auto pr = p.row(i);
    auto qr = q.row(i);
    for (std::size_t c = 0; c < pr.size(); ++c) {
      const double pc = std::max(double{pr[c]}, kLogClamp);
      const double qc = std::max(double{qr[c]}, kLogClamp);
      sum += pc * std::log(pc / qc);
    }
  }
  return sum / static_cast<double>(p.positions());
}

ProbabilityMap ensemble(const ProbabilityMap& a, const ProbabilityMap& b) {
  check_same_shape(a, b, "ensemble");
  ClassMapFields out;
  out.height = a.height();
  out.width = a.width();
  out.num_classes = a.num_classes();
  out.data.resize(a.data().size());
  const std::size_t c = a.num_classes();
  std::vector<double> mean(c);
  for (std::size_t p = 0; p < a.positions(); ++p) {
    auto ar = a.row(p);
    auto br = b.row(p);
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      mean[k] = 0.5 * (double{ar[k]} + br[k]);
      total += mean[k];
    }
    for (std::size_t k = 0; k < c; ++k) out.data[p * c + k] = static_cast<float>(mean[k] / total);
  }
  return ProbabilityMap::create(std::move(out));
}

IouReport miou(const LabelMap& pred, const LabelMap& gt, std::uint16_t num_classes) {
  if (pred.frame() != gt.frame()) fail(Errc::DimensionMismatch, "miou: prediction and ground-truth shapes differ");
  if (num_classes == 0 || num_classes == kIgnoreId) fail(Errc::OutOfRange, "miou: num_classes must be in 1..65534");
  std::vector<std::uint64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < gt.data().size(); ++i) {
    const std::uint16_t g = gt.at(i);
    if (g == kIgnoreId) continue;
    const std::uint16_t y = pred.at(i);
    if (g >= num_classes) fail(Errc::OutOfRange, "miou: ground-truth label " + std::to_string(g) + " >= num_classes");
    if (y != kIgnoreId && y >= num_classes)
      fail(Errc::OutOfRange, "miou: predicted label " + std::to_string(y) + " >= num_classes");
    if (y == g) {
      ++tp[g];
    } else {
      ++fn[g];
      if (y != kIgnoreId) ++fp[y];
    }
  }
  IouReport report;
  report.per_class.resize(num_classes);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::uint64_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp[c]) / static_cast<double>(denom);
    report.per_class[c] = iou;
    sum += iou;
    ++counted;
  }
  if (counted == 0) fail(Errc::NoValidClass, "miou: no class occurs in prediction or ground truth");
  report.mean = sum / static_cast<double>(counted);
  return report;
}

std::string format_iou_tsv(const IouReport& report) {
  std::ostringstream os;
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    os << "iou." << c << '\t';
    if (report.per_class[c]) os << fmt_double(*report.per_class[c]);
    else os << "NA";
    os << '\n';
  }
  os << "miou\t" << fmt_double(report.mean) << '\n';
  return os.str();
}

// --- ledger -----------------------------------------------------------------

std::string_view loss_term_name(LossTerm term) {
  static constexpr std::string_view kNames[kNumLossTerms] = {
      "ce.source.2d",           "ce.source.3d",           "ce.target.2d",           "ce.target.3d",
      "ce.mix_src_trg.2d",      "ce.mix_src_trg.3d",      "ce.mix_trg_src.2d",      "ce.mix_trg_src.3d",
      "kl.source.2d_to_3d",     "kl.source.3d_to_2d",     "kl.target.2d_to_3d",     "kl.target.3d_to_2d",
      "kl.mix_src_trg.2d_to_3d", "kl.mix_src_trg.3d_to_2d", "kl.mix_trg_src.2d_to_3d", "kl.mix_trg_src.3d_to_2d",
  };
  return kNames[static_cast<std::size_t>(term)];
}

LossLedger LossLedger::from_terms(const std::array<double, kNumLossTerms>& terms, LossWeights weights) {
  for (double w : {weights.xm_src, weights.xm_trg, weights.xm_mix})
    if (!std::isfinite(w) || w < 0.0) fail(Errc::OutOfRange, "loss weights must be finite and >= 0");
  LossLedger l;
  l.terms_ = terms;
  l.weights_ = weights;
  auto at = [&](LossTerm t) { return terms[static_cast<std::size_t>(t)]; };
  for (std::size_t i = 0; i < 8; ++i) l.exact_total_.add(terms[i]);
  for (LossTerm t : {LossTerm::KlSource2dTo3d, LossTerm::KlSource3dTo2d}) l.exact_total_.add_product(weights.xm_src, at(t));
  for (LossTerm t : {LossTerm::KlTarget2dTo3d, LossTerm::KlTarget3dTo2d}) l.exact_total_.add_product(weights.xm_trg, at(t));
  for (LossTerm t : {LossTerm::KlMixSrcTrg2dTo3d, LossTerm::KlMixSrcTrg3dTo2d, LossTerm::KlMixTrgSrc2dTo3d,
                     LossTerm::KlMixTrgSrc3dTo2d})
    l.exact_mixed_kl_.add_product(weights.xm_mix, at(t));
  l.exact_total_.add(l.exact_mixed_kl_);
  l.total_ = l.exact_total_.value();
  return l;
}

Report LossLedger::validate() const {
  Report r;
  for (std::size_t i = 0; i < kNumLossTerms; ++i) {
    if (!std::isfinite(terms_[i]) || terms_[i] < 0.0)
      r.push_back({"entry range", std::string(loss_term_name(static_cast<LossTerm>(i))) + " not finite and >= 0"});
  }
  if (!std::isfinite(total_)) r.push_back({"total", "total not finite"});
  const LossLedger again = from_terms(terms_, weights_);
  if (!(again.exact_total_ == exact_total_)) r.push_back({"total", "total differs from recomputation"});
  return r;
}

std::string LossLedger::to_tsv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < kNumLossTerms; ++i)
    os << loss_term_name(static_cast<LossTerm>(i)) << '\t' << fmt_double(terms_[i]) << '\n';
  os << "lambda.xm_src\t" << fmt_double(weights_.xm_src) << '\n';
  os << "lambda.xm_trg\t" << fmt_double(weights_.xm_trg) << '\n';
  os << "lambda.xm_m\t" << fmt_double(weights_.xm_mix) << '\n';
  os << "mixed_kl_weighted\t" << fmt_double(mixed_kl_subtotal()) << '\n';
  os << "total\t" << fmt_double(total_) << '\n';
  return os.str();
}

LossLedger assemble_ledger(const LedgerInputs& in, LossWeights weights) {
  std::array<double, kNumLossTerms> t{};
  auto set = [&](LossTerm term, double v) { t[static_cast<std::size_t>(term)] = v; };
  auto kl = [](const ProbabilityMap& p, const ProbabilityMap& q) { return std::max(0.0, kl_divergence(p, q)); };

  struct Row {
    const DomainPredictions& d;
    LossTerm ce2d, ce3d, kl23, kl32;
  };
  const Row rows[] = {
      {in.source, LossTerm::CeSource2d, LossTerm::CeSource3d, LossTerm::KlSource2dTo3d, LossTerm::KlSource3dTo2d},
      {in.target, LossTerm::CeTarget2d, LossTerm::CeTarget3d, LossTerm::KlTarget2dTo3d, LossTerm::KlTarget3dTo2d},
      {in.mix_src_trg, LossTerm::CeMixSrcTrg2d, LossTerm::CeMixSrcTrg3d, LossTerm::KlMixSrcTrg2dTo3d,
       LossTerm::KlMixSrcTrg3dTo2d},
      {in.mix_trg_src, LossTerm::CeMixTrgSrc2d, LossTerm::CeMixTrgSrc3d, LossTerm::KlMixTrgSrc2dTo3d,
       LossTerm::KlMixTrgSrc3dTo2d},
  };
  for (const Row& r : rows) {
    set(r.ce2d, cross_entropy(r.d.main_2d, r.d.labels_2d));
    set(r.ce3d, cross_entropy(r.d.main_3d, r.d.labels_3d));
    set(r.kl23, kl(r.d.main_3d, r.d.mimic_2d));
    set(r.kl32, kl(r.d.main_2d, r.d.mimic_3d));
  }
  return LossLedger::from_terms(t, weights);
}

}  // namespace fmx
