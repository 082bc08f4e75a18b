#include "epc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "epc/error.hpp"
#include "json.hpp"

namespace epc {

using nlohmann::json;

LinearModel LinearModel::zeros(std::size_t feature_len) {
  LinearModel m;
  m.weights = Eigen::MatrixXd::Zero(kNumClasses, static_cast<Eigen::Index>(feature_len));
  m.bias = Eigen::VectorXd::Zero(kNumClasses);
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  }
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) {
    throw Error(ErrorCode::kInvalidArgument, "l2 must be non-negative");
  }
}

std::string_view class_weighting_name(ClassWeighting w) {
  return w == ClassWeighting::kNone ? "none" : "inverse-frequency";
}

std::optional<ClassWeighting> parse_class_weighting(std::string_view name) {
  if (name == "none") return ClassWeighting::kNone;
  if (name == "inverse-frequency") return ClassWeighting::kInverseFrequency;
  return std::nullopt;
}

Probabilities softmax(std::span<const double, kNumClasses> logits) {
  for (double z : logits) {
    if (!std::isfinite(z)) throw Error(ErrorCode::kNonFiniteInput, "softmax logit");
  }
  const double shift = *std::max_element(logits.begin(), logits.end());
  Probabilities p{};
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(logits[c] - shift);
    sum += p[c];
  }
  for (double& x : p) x /= sum;
  return p;
}

Prediction predict(const LinearModel& model, std::span<const double> feature) {
  if (feature.size() != model.feature_len()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature length " + std::to_string(feature.size()) +
                    " does not match model feature_len " +
                    std::to_string(model.feature_len()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(feature.data(),
                                            static_cast<Eigen::Index>(feature.size()));
  const Eigen::VectorXd z = model.weights * x + model.bias;
  std::array<double, kNumClasses> logits{};
  for (std::size_t c = 0; c < kNumClasses; ++c) logits[c] = z(static_cast<Eigen::Index>(c));

  Prediction out{EntityClass::kFood, softmax(logits)};
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  out.label = kAllClasses[best];
  return out;
}

std::array<double, kNumClasses> class_weights(std::span<const EntityClass> labels,
                                              ClassWeighting weighting) {
  std::array<double, kNumClasses> w{};
  w.fill(1.0);
  if (weighting == ClassWeighting::kNone) return w;
  std::array<std::size_t, kNumClasses> counts{};
  for (auto y : labels) ++counts[class_index(y)];
  const double total = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    w[c] = counts[c] == 0 ? 0.0
                          : total / (static_cast<double>(kNumClasses) *
                                     static_cast<double>(counts[c]));
  }
  return w;
}

LossGradient loss_and_gradient(const LinearModel& model,
                               const Eigen::MatrixXd& features,
                               std::span<const EntityClass> labels, double l2,
                               const std::array<double, kNumClasses>& weights) {
  const auto n = features.rows();
  if (n == 0) throw Error(ErrorCode::kEmptyTrainingSet, "empty batch");
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error(ErrorCode::kLengthMismatch, "features and labels differ in length");
  }
  if (features.cols() != model.weights.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature length " + std::to_string(features.cols()) +
                    " does not match model feature_len " +
                    std::to_string(model.feature_len()));
  }

  // Rows are samples: logits is n x classes.
  Eigen::MatrixXd logits = features * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();

  Eigen::MatrixXd residual(n, static_cast<Eigen::Index>(kNumClasses));
  double data_loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - shift).exp().matrix();
    const double sum = e.sum();
    const auto y = static_cast<Eigen::Index>(class_index(labels[static_cast<std::size_t>(i)]));
    const double w = weights[static_cast<std::size_t>(y)];
    data_loss += w * (std::log(sum) + shift - logits(i, y));
    residual.row(i) = e / sum;
    residual(i, y) -= 1.0;
    residual.row(i) *= w;
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGradient out;
  out.loss = data_loss * inv_n + 0.5 * l2 * model.weights.squaredNorm();
  out.grad_weights = inv_n * (residual.transpose() * features) + l2 * model.weights;
  out.grad_bias = inv_n * residual.colwise().sum().transpose();
  return out;
}

Eigen::MatrixXd stack_features(std::span<const FeatureVector> features) {
  if (features.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t len = features.front().values.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()),
                    static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != len) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "sample " + std::to_string(i) + " has feature length " +
                      std::to_string(features[i].values.size()) + ", expected " +
                      std::to_string(len));
    }
    for (std::size_t j = 0; j < len; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i].values[j];
    }
  }
  return x;
}

TrainResult train(std::span<const FeatureVector> features,
                  std::span<const EntityClass> labels, const TrainConfig& config) {
  if (features.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training samples");
  return train(stack_features(features), labels, config);
}

TrainResult train(const Eigen::MatrixXd& features,
                  std::span<const EntityClass> labels, const TrainConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(ErrorCode::kEmptyTrainingSet, "no training samples");
  if (labels.size() != n) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(n) + " feature rows but " +
                    std::to_string(labels.size()) + " labels");
  }
  if (!features.allFinite()) {
    throw Error(ErrorCode::kNonFiniteInput, "training features contain non-finite values");
  }

  const auto weights = class_weights(labels, config.class_weighting);
  TrainResult result{LinearModel::zeros(static_cast<std::size_t>(features.cols())), {}};
  LinearModel& model = result.model;

  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t batch = std::min(config.batch_size, n);
  std::vector<Eigen::Index> idx;
  std::vector<EntityClass> batch_labels;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with an explicit draw so the order is library-independent.
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                 order.begin() + static_cast<std::ptrdiff_t>(end));
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(labels[static_cast<std::size_t>(i)]);
      const Eigen::MatrixXd xb = features(idx, Eigen::all);
      const auto g = loss_and_gradient(model, xb, batch_labels, config.l2, weights);
      model.weights -= config.learning_rate * g.grad_weights;
      model.bias -= config.learning_rate * g.grad_bias;
    }
    const double loss = loss_and_gradient(model, features, labels, config.l2, weights).loss;
    if (!std::isfinite(loss) || !model.weights.allFinite() || !model.bias.allFinite()) {
      throw Error(ErrorCode::kNonFiniteLoss,
                  "training diverged at epoch " + std::to_string(epoch + 1));
    }
    result.loss_trace.push_back(loss);
  }
  return result;
}

std::string model_to_json(const LinearModel& model) {
  json classes = json::array();
  for (auto c : kAllClasses) classes.push_back(std::string(class_name(c)));
  json rows = json::array();
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) row.push_back(model.weights(r, c));
    rows.push_back(std::move(row));
  }
  json bias = json::array();
  for (Eigen::Index r = 0; r < model.bias.size(); ++r) bias.push_back(model.bias(r));

  json doc = json::object();
  doc["format"] = "epc-linear-model";
  doc["version"] = kModelFormatVersion;
  doc["classes"] = std::move(classes);
  doc["feature_len"] = model.feature_len();
  doc["weights"] = std::move(rows);
  doc["bias"] = std::move(bias);
  return doc.dump() + "\n";
}

LinearModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "epc-linear-model") {
      throw Error(ErrorCode::kParseError, "model file: not an epc-linear-model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "model file version " + std::to_string(version) + ", expected " +
                      std::to_string(kModelFormatVersion));
    }
    const auto classes = doc.at("classes").get<std::vector<std::string>>();
    if (classes.size() != kNumClasses) {
      throw Error(ErrorCode::kParseError, "model file: expected 6 classes");
    }
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (classes[c] != class_name(kAllClasses[c])) {
        throw Error(ErrorCode::kParseError, "model file: unexpected class order");
      }
    }
    const auto feature_len = doc.at("feature_len").get<std::size_t>();
    const auto rows = doc.at("weights").get<std::vector<std::vector<double>>>();
    const auto bias = doc.at("bias").get<std::vector<double>>();
    if (rows.size() != kNumClasses || bias.size() != kNumClasses) {
      throw Error(ErrorCode::kParseError, "model file: expected 6 weight rows and 6 biases");
    }
    LinearModel m = LinearModel::zeros(feature_len);
    for (std::size_t r = 0; r < kNumClasses; ++r) {
      if (rows[r].size() != feature_len) {
        throw Error(ErrorCode::kParseError, "model file: weight row " + std::to_string(r) +
                                                " does not have feature_len entries");
      }
      for (std::size_t c = 0; c < feature_len; ++c) {
        m.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      m.bias(static_cast<Eigen::Index>(r)) = bias[r];
    }
    if (!m.weights.allFinite() || !m.bias.allFinite()) {
      throw Error(ErrorCode::kParseError, "model file: non-finite parameter");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace epc
