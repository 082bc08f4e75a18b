#ifndef EPC_TESTS_SYNTHETIC_HPP_
#define EPC_TESTS_SYNTHETIC_HPP_

// Synthetic datasets and independent oracles shared by the unit and
// acceptance suites.

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "epc/corpus.hpp"
#include "epc/eval.hpp"

namespace epc::testing {

struct Blobs {
  Eigen::MatrixXd x;  // one point per row
  std::vector<EntityClass> labels;
};

// `per_class` points around each of three centres 4 * e_c (c = 0, 1, 2) with
// uniform jitter in [-0.5, 0.5] per coordinate.
inline Blobs make_blobs(std::size_t per_class, std::size_t dim, std::uint64_t seed) {
  static constexpr EntityClass kBlobClasses[] = {EntityClass::kFood, EntityClass::kMed,
                                                 EntityClass::kDis};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  Blobs b;
  b.x.resize(static_cast<Eigen::Index>(3 * per_class), static_cast<Eigen::Index>(dim));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per_class; ++i, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        b.x(row, static_cast<Eigen::Index>(j)) = (j == c ? 4.0 : 0.0) + jitter(rng);
      }
      b.labels.push_back(kBlobClasses[c]);
    }
  }
  return b;
}

// Nearest-centroid classification is a linear rule, so 100% accuracy under it
// certifies that the data is linearly separable.
inline bool nearest_centroid_separates(const Blobs& b) {
  std::vector<Eigen::RowVectorXd> centroid(kNumClasses, Eigen::RowVectorXd::Zero(b.x.cols()));
  std::vector<double> count(kNumClasses, 0.0);
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
    const auto c = class_index(b.labels[static_cast<std::size_t>(i)]);
    centroid[c] += b.x.row(i);
    count[c] += 1.0;
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (count[c] > 0) centroid[c] /= count[c];
  }
  for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
    std::size_t best = kNumClasses;
    double best_d = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (count[c] == 0) continue;
      const double d = (b.x.row(i) - centroid[c]).squaredNorm();
      if (best == kNumClasses || d < best_d) {
        best = c;
        best_d = d;
      }
    }
    if (best != class_index(b.labels[static_cast<std::size_t>(i)])) return false;
  }
  return true;
}

// Context-disambiguation corpus: every surface is "liver NN", so the surface
// head word is shared by both classes and carries no label information. The
// class is fixed entirely by the sentence frames a surface appears in: FOOD
// surfaces occur only in food frames, DIS surfaces only in disease frames.
// Each surface is annotated once; its second occurrence is unannotated
// context.
inline Corpus make_disambiguation_corpus(std::size_t per_class) {
  static const char* kFoodFrames[] = {"Try beef {} or chicken for dinner.",
                                      "Kidneys, {}, dairy are good options."};
  static const char* kDisFrames[] = {"Doctors say {} can cause fatigue.",
                                     "Early treatment of {} prevents complications."};
  auto fill = [](const char* frame, const std::string& s) {
    std::string f(frame);
    return f.replace(f.find("{}"), 2, s);
  };
  std::vector<AdviceStatement> statements;
  std::size_t serial = 0;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool food = i % 2 == 0;
    const std::string surface = "liver " + std::to_string(100 + i);
    const auto* frames = food ? kFoodFrames : kDisFrames;
    const auto label = food ? EntityClass::kFood : EntityClass::kDis;
    statements.push_back({"d-" + std::to_string(serial++), fill(frames[0], surface),
                          {{surface, label}}});
    statements.push_back({"d-" + std::to_string(serial++), fill(frames[1], surface), {}});
  }
  return Corpus(std::move(statements));
}

// Exact upper bound on the weighted F1 of any predictor that is a function of
// a per-sample key (e.g. the entity feature): samples sharing a key must get
// the same prediction. Enumerates every assignment of classes to keys, which
// is exhaustive and only feasible for a handful of keys; groups with a single
// distinct label are fixed to it first (always optimal for them).
inline double key_constrained_f1_ceiling(const std::vector<std::string>& keys,
                                         const std::vector<EntityClass>& gold) {
  std::vector<std::string> ambiguous;
  std::map<std::string, std::set<EntityClass>> labels_of;
  for (std::size_t i = 0; i < keys.size(); ++i) labels_of[keys[i]].insert(gold[i]);
  for (const auto& [k, ls] : labels_of) {
    if (ls.size() > 1) ambiguous.push_back(k);
  }
  std::map<std::string, EntityClass> choice;
  for (const auto& [k, ls] : labels_of) choice[k] = *ls.begin();

  double best = 0.0;
  const std::size_t n = ambiguous.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= kNumClasses;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (const auto& k : ambiguous) {
      choice[k] = kAllClasses[c % kNumClasses];
      c /= kNumClasses;
    }
    std::vector<EntityClass> pred;
    for (const auto& k : keys) pred.push_back(choice[k]);
    best = std::max(best, metrics(gold, pred).weighted_f1);
  }
  return best;
}

}  // namespace epc::testing

#endif  // EPC_TESTS_SYNTHETIC_HPP_
