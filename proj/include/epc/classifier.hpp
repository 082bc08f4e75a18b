#ifndef EPC_CLASSIFIER_HPP_
#define EPC_CLASSIFIER_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epc/corpus.hpp"
#include "epc/features.hpp"

namespace epc {

using Probabilities = std::array<double, kNumClasses>;

// Multinomial logistic regression: logits = W x + b, one row per class in
// canonical class order.
struct LinearModel {
  Eigen::MatrixXd weights;  // kNumClasses x feature_len
  Eigen::VectorXd bias;     // kNumClasses

  static LinearModel zeros(std::size_t feature_len);
  std::size_t feature_len() const { return static_cast<std::size_t>(weights.cols()); }

  bool operator==(const LinearModel& other) const {
    return weights.rows() == other.weights.rows() &&
           weights.cols() == other.weights.cols() && weights == other.weights &&
           bias == other.bias;
  }
};

enum class ClassWeighting { kNone, kInverseFrequency };

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  ClassWeighting class_weighting = ClassWeighting::kNone;

  // Throws InvalidArgument on out-of-range fields.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

std::string_view class_weighting_name(ClassWeighting w);
std::optional<ClassWeighting> parse_class_weighting(std::string_view name);

// Max-shifted softmax. Throws NonFiniteInput.
Probabilities softmax(std::span<const double, kNumClasses> logits);

struct Prediction {
  EntityClass label;
  Probabilities probabilities;
};

// Argmax of softmax(W x + b); ties go to the lowest class index.
Prediction predict(const LinearModel& model, std::span<const double> feature);
inline Prediction predict(const LinearModel& model, const FeatureVector& f) {
  return predict(model, std::span<const double>(f.values));
}

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

// Per-class sample weights for the loss. Unit weights when kNone; otherwise
// total / (kNumClasses * count_c), zero for classes absent from `labels`.
std::array<double, kNumClasses> class_weights(std::span<const EntityClass> labels,
                                              ClassWeighting weighting);

// Regularized mean cross-entropy over a batch and its exact gradient:
//   L = (1/n) sum_i w_{y_i} * -log p(y_i | x_i) + (l2 / 2) ||W||^2
// `features` holds one sample per row. The bias is not regularized.
LossGradient loss_and_gradient(
    const LinearModel& model, const Eigen::MatrixXd& features,
    std::span<const EntityClass> labels, double l2,
    const std::array<double, kNumClasses>& weights = {1, 1, 1, 1, 1, 1});

struct TrainResult {
  LinearModel model;
  // Full-training-set objective after each epoch.
  std::vector<double> loss_trace;
};

// Mini-batch SGD from zero-initialized weights. The sample order is reshuffled
// each epoch from a generator seeded with config.seed.
TrainResult train(std::span<const FeatureVector> features,
                  std::span<const EntityClass> labels, const TrainConfig& config);
TrainResult train(const Eigen::MatrixXd& features,
                  std::span<const EntityClass> labels, const TrainConfig& config);

Eigen::MatrixXd stack_features(std::span<const FeatureVector> features);

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace epc

#endif  // EPC_CLASSIFIER_HPP_
