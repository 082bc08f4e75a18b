#ifndef EPC_EVAL_HPP_
#define EPC_EVAL_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epc/classifier.hpp"
#include "epc/corpus.hpp"
#include "epc/encoder.hpp"
#include "epc/features.hpp"
#include "json.hpp"

namespace epc {

// One annotated mention.
struct Sample {
  std::string surface;
  EntityClass label = EntityClass::kFood;
  std::string source_id;

  bool operator==(const Sample&) const = default;
};

// Every annotation with a non-blank surface, in corpus order.
std::vector<Sample> collect_samples(const Corpus& corpus);

struct FoldSpec {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  bool grouped = true;
  std::vector<std::size_t> assignments;  // sample index -> fold id

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;

  bool operator==(const FoldSpec&) const = default;
};

// Stratified k-fold assignment. With `group_by_surface`, samples sharing a
// normalized surface form one group that lands in a single fold; a group is
// stratified under its majority label (ties to the lowest class index).
// Within each class the groups are shuffled, ordered largest first, and each
// is dealt to the fold currently holding the fewest samples of that class,
// so per-class fold counts differ by at most one when groups are singletons.
// Throws ClassTooSmall when a present class has fewer than k samples.
FoldSpec stratified_kfold(std::span<const Sample> samples, std::size_t k,
                          std::uint64_t seed, bool group_by_surface = true);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;

  bool operator==(const ClassMetrics&) const = default;
};

// rows = gold, columns = predicted, canonical class order.
using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct Misclassification {
  std::string surface;
  EntityClass gold;
  EntityClass predicted;
  std::string source_id;

  bool operator==(const Misclassification&) const = default;
};

struct EvalReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double weighted_f1 = 0.0;
  ConfusionMatrix confusion{};
  std::vector<Misclassification> errors;

  const ClassMetrics& of(EntityClass c) const { return per_class[class_index(c)]; }
  bool operator==(const EvalReport&) const = default;
};

// One-vs-rest precision/recall/F1 per class; empty denominators give 0.
// weighted_f1 is support-weighted over the six classes. Throws
// LengthMismatch, or InvalidArgument on empty input.
EvalReport metrics(std::span<const EntityClass> gold,
                   std::span<const EntityClass> predicted);
// Same, additionally recording the misclassified samples.
EvalReport metrics(std::span<const Sample> samples,
                   std::span<const EntityClass> predicted);

// Fold-averaged metrics. Per-class precision/recall/F1 average over the folds
// in which the class has support; support is summed over folds.
struct MeanReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double weighted_f1 = 0.0;
  std::size_t folds = 0;

  const ClassMetrics& of(EntityClass c) const { return per_class[class_index(c)]; }
  bool operator==(const MeanReport&) const = default;
};

MeanReport mean_report(std::span<const EvalReport> folds);

struct CvOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  FeatureMode mode = FeatureMode::kEntityPattern;
  std::optional<std::size_t> max_contexts;
  bool group_by_surface = true;
};

struct CvResult {
  FoldSpec folds;
  std::vector<EvalReport> per_fold;
  MeanReport mean;
  // Metrics over the concatenated held-out predictions; carries every
  // misclassification and the summed confusion matrix.
  EvalReport pooled;
};

// Features are computed once against the full corpus text; each fold trains
// a fresh model on the other k-1 folds.
CvResult cross_validate(const Corpus& corpus, const Encoder& encoder,
                        const TrainConfig& train_config, const CvOptions& options);

// Column order of the published results table.
inline constexpr std::array<EntityClass, kNumClasses> kReportColumnOrder = {
    EntityClass::kDis,  EntityClass::kMed,  EntityClass::kFood,
    EntityClass::kExer, EntityClass::kPhys, EntityClass::kOth};

nlohmann::ordered_json report_to_json(const EvalReport& report);
nlohmann::ordered_json mean_report_to_json(const MeanReport& report);
nlohmann::ordered_json cv_result_to_json(const CvResult& result);

std::string confusion_csv(const ConfusionMatrix& confusion);

// Writes misclassifications as JSON Lines to `errors_path` and the confusion
// matrix as CSV to `confusion_path`. Returns the number of error lines.
std::size_t export_errors(const EvalReport& report,
                          const std::filesystem::path& errors_path,
                          const std::filesystem::path& confusion_path);

}  // namespace epc

#endif  // EPC_EVAL_HPP_
