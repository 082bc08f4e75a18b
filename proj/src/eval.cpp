#include "epc/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "epc/error.hpp"
#include "epc/text.hpp"

namespace epc {

using nlohmann::ordered_json;

std::vector<Sample> collect_samples(const Corpus& corpus) {
  std::vector<Sample> samples;
  for (const auto& st : corpus.statements()) {
    for (const auto& e : st.entities) {
      if (trim(e.surface).empty()) continue;
      samples.push_back({e.surface, e.label, st.id});
    }
  }
  return samples;
}

std::vector<std::size_t> FoldSpec::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSpec::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldSpec stratified_kfold(std::span<const Sample> samples, std::size_t k,
                          std::uint64_t seed, bool group_by_surface) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  std::array<std::size_t, kNumClasses> class_counts{};
  for (const auto& s : samples) ++class_counts[class_index(s.label)];
  for (auto c : kAllClasses) {
    const auto n = class_counts[class_index(c)];
    if (n > 0 && n < k) {
      throw Error(ErrorCode::kClassTooSmall,
                  std::string(class_name(c)) + " has " + std::to_string(n) +
                      " samples, fewer than k=" + std::to_string(k));
    }
  }

  // Groups in first-appearance order.
  std::vector<std::vector<std::size_t>> groups;
  if (group_by_surface) {
    std::map<std::string, std::size_t> by_key;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto [it, fresh] = by_key.emplace(normalize_surface(samples[i].surface), groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < samples.size(); ++i) groups.push_back({i});
  }

  std::array<std::vector<std::size_t>, kNumClasses> groups_of_class;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::array<std::size_t, kNumClasses> votes{};
    for (auto i : groups[g]) ++votes[class_index(samples[i].label)];
    const auto majority = static_cast<std::size_t>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
    groups_of_class[majority].push_back(g);
  }

  FoldSpec spec;
  spec.k = k;
  spec.seed = seed;
  spec.grouped = group_by_surface;
  spec.assignments.assign(samples.size(), 0);

  std::mt19937_64 rng(seed);
  std::size_t cursor = 0;
  for (auto& members : groups_of_class) {
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng() % i]);
    }
    std::stable_sort(members.begin(), members.end(), [&](auto a, auto b) {
      return groups[a].size() > groups[b].size();
    });
    std::vector<std::size_t> load(k, 0);
    for (auto g : members) {
      std::size_t best = cursor;
      for (std::size_t step = 1; step < k; ++step) {
        const std::size_t f = (cursor + step) % k;
        if (load[f] < load[best]) best = f;
      }
      load[best] += groups[g].size();
      for (auto i : groups[g]) spec.assignments[i] = best;
      cursor = (best + 1) % k;
    }
  }
  return spec;
}

namespace {

EvalReport compute_metrics(std::span<const EntityClass> gold,
                           std::span<const EntityClass> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(gold.size()) + " gold labels but " +
                    std::to_string(predicted.size()) + " predictions");
  }
  if (gold.empty()) throw Error(ErrorCode::kInvalidArgument, "no labels to evaluate");

  EvalReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++r.confusion[class_index(gold[i])][class_index(predicted[i])];
  }
  double weighted = 0.0;
  std::size_t total = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double tp = static_cast<double>(r.confusion[c][c]);
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t o = 0; o < kNumClasses; ++o) {
      row += r.confusion[c][o];
      col += r.confusion[o][c];
    }
    auto& m = r.per_class[c];
    m.support = row;
    m.precision = col == 0 ? 0.0 : tp / static_cast<double>(col);
    m.recall = row == 0 ? 0.0 : tp / static_cast<double>(row);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    weighted += static_cast<double>(m.support) * m.f1;
    total += m.support;
  }
  r.weighted_f1 = weighted / static_cast<double>(total);
  return r;
}

}  // namespace

EvalReport metrics(std::span<const EntityClass> gold,
                   std::span<const EntityClass> predicted) {
  return compute_metrics(gold, predicted);
}

EvalReport metrics(std::span<const Sample> samples,
                   std::span<const EntityClass> predicted) {
  std::vector<EntityClass> gold;
  gold.reserve(samples.size());
  for (const auto& s : samples) gold.push_back(s.label);
  auto r = compute_metrics(gold, predicted);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label != predicted[i]) {
      r.errors.push_back({samples[i].surface, samples[i].label, predicted[i],
                          samples[i].source_id});
    }
  }
  return r;
}

MeanReport mean_report(std::span<const EvalReport> folds) {
  MeanReport m;
  m.folds = folds.size();
  if (folds.empty()) return m;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::size_t present = 0;
    auto& out = m.per_class[c];
    for (const auto& f : folds) {
      const auto& in = f.per_class[c];
      out.support += in.support;
      if (in.support == 0) continue;
      ++present;
      out.precision += in.precision;
      out.recall += in.recall;
      out.f1 += in.f1;
    }
    if (present > 0) {
      out.precision /= static_cast<double>(present);
      out.recall /= static_cast<double>(present);
      out.f1 /= static_cast<double>(present);
    }
  }
  for (const auto& f : folds) m.weighted_f1 += f.weighted_f1;
  m.weighted_f1 /= static_cast<double>(folds.size());
  return m;
}

CvResult cross_validate(const Corpus& corpus, const Encoder& encoder,
                        const TrainConfig& train_config, const CvOptions& options) {
  train_config.validate();
  const auto samples = collect_samples(corpus);
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "corpus has no annotated entities");
  }

  CvResult result;
  result.folds = stratified_kfold(samples, options.k, options.seed,
                                  options.group_by_surface);

  FeatureCache cache(corpus, encoder, options.mode, options.max_contexts);
  std::vector<FeatureVector> features;
  features.reserve(samples.size());
  for (const auto& s : samples) features.push_back(cache.get(s.surface));
  const Eigen::MatrixXd x = stack_features(features);

  std::vector<Sample> pooled_samples;
  std::vector<EntityClass> pooled_predictions;
  for (std::size_t fold = 0; fold < options.k; ++fold) {
    const auto train_idx = result.folds.train_indices(fold);
    const auto test_idx = result.folds.test_indices(fold);
    if (test_idx.empty() || train_idx.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fold " + std::to_string(fold) + " is empty; too few surface groups for k=" +
                      std::to_string(options.k));
    }
    std::vector<Eigen::Index> rows(train_idx.begin(), train_idx.end());
    std::vector<EntityClass> train_labels;
    for (auto i : train_idx) train_labels.push_back(samples[i].label);
    const Eigen::MatrixXd x_train = x(rows, Eigen::all);
    const auto trained = train(x_train, train_labels, train_config);

    std::vector<Sample> test_samples;
    std::vector<EntityClass> predictions;
    for (auto i : test_idx) {
      test_samples.push_back(samples[i]);
      predictions.push_back(predict(trained.model, features[i]).label);
    }
    result.per_fold.push_back(metrics(test_samples, predictions));
    pooled_samples.insert(pooled_samples.end(), test_samples.begin(), test_samples.end());
    pooled_predictions.insert(pooled_predictions.end(), predictions.begin(),
                              predictions.end());
  }
  result.mean = mean_report(result.per_fold);
  result.pooled = metrics(pooled_samples, pooled_predictions);
  return result;
}

namespace {

ordered_json per_class_json(const std::array<ClassMetrics, kNumClasses>& per_class) {
  ordered_json out = ordered_json::object();
  for (auto c : kReportColumnOrder) {
    const auto& m = per_class[class_index(c)];
    out[std::string(class_name(c))] = ordered_json{{"precision", m.precision},
                                                   {"recall", m.recall},
                                                   {"f1", m.f1},
                                                   {"support", m.support}};
  }
  return out;
}

ordered_json f1_table(const std::array<ClassMetrics, kNumClasses>& per_class,
                      double weighted_f1) {
  ordered_json out = ordered_json::object();
  for (auto c : kReportColumnOrder) {
    out[std::string(class_name(c))] = per_class[class_index(c)].f1;
  }
  out["W/AVG"] = weighted_f1;
  return out;
}

}  // namespace

ordered_json report_to_json(const EvalReport& report) {
  ordered_json confusion = ordered_json::array();
  for (const auto& row : report.confusion) confusion.push_back(row);
  return ordered_json{{"table", f1_table(report.per_class, report.weighted_f1)},
                      {"per_class", per_class_json(report.per_class)},
                      {"weighted_f1", report.weighted_f1},
                      {"confusion", std::move(confusion)},
                      {"error_count", report.errors.size()}};
}

ordered_json mean_report_to_json(const MeanReport& report) {
  return ordered_json{{"table", f1_table(report.per_class, report.weighted_f1)},
                      {"per_class", per_class_json(report.per_class)},
                      {"weighted_f1", report.weighted_f1},
                      {"folds", report.folds}};
}

ordered_json cv_result_to_json(const CvResult& result) {
  ordered_json classes = ordered_json::array();
  for (auto c : kAllClasses) classes.push_back(std::string(class_name(c)));
  ordered_json folds = ordered_json::array();
  for (std::size_t f = 0; f < result.per_fold.size(); ++f) {
    auto j = report_to_json(result.per_fold[f]);
    j["fold"] = f;
    j["size"] = result.folds.test_indices(f).size();
    folds.push_back(std::move(j));
  }
  return ordered_json{{"confusion_class_order", std::move(classes)},
                      {"k", result.folds.k},
                      {"seed", result.folds.seed},
                      {"grouped", result.folds.grouped},
                      {"mean", mean_report_to_json(result.mean)},
                      {"pooled", report_to_json(result.pooled)},
                      {"folds", std::move(folds)}};
}

std::string confusion_csv(const ConfusionMatrix& confusion) {
  std::ostringstream out;
  out << "gold\\predicted";
  for (auto c : kAllClasses) out << ',' << class_name(c);
  out << '\n';
  for (auto g : kAllClasses) {
    out << class_name(g);
    for (auto p : kAllClasses) out << ',' << confusion[class_index(g)][class_index(p)];
    out << '\n';
  }
  return out.str();
}

std::size_t export_errors(const EvalReport& report,
                          const std::filesystem::path& errors_path,
                          const std::filesystem::path& confusion_path) {
  {
    std::ofstream out(errors_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + errors_path.string());
    for (const auto& e : report.errors) {
      out << ordered_json{{"surface", e.surface},
                          {"gold", std::string(class_name(e.gold))},
                          {"predicted", std::string(class_name(e.predicted))},
                          {"source_id", e.source_id}}
                 .dump()
          << '\n';
    }
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + errors_path.string());
  }
  std::ofstream csv(confusion_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIoFailure, "cannot write " + confusion_path.string());
  csv << confusion_csv(report.confusion);
  if (!csv) throw Error(ErrorCode::kIoFailure, "write failed: " + confusion_path.string());
  return report.errors.size();
}

}  // namespace epc
