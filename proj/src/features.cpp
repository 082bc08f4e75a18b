#include "epc/features.hpp"

#include "epc/error.hpp"
#include "epc/text.hpp"

namespace epc {

std::string_view feature_mode_name(FeatureMode mode) {
  return mode == FeatureMode::kEntityPattern ? "ep" : "entity-only";
}

std::optional<FeatureMode> parse_feature_mode(std::string_view name) {
  if (name == "ep" || name == "entity-pattern") return FeatureMode::kEntityPattern;
  if (name == "entity-only") return FeatureMode::kEntityOnly;
  return std::nullopt;
}

EmbeddingVector entity_embedding(std::string_view surface, const Encoder& encoder) {
  if (trim(surface).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "surface must be non-empty");
  }
  return encoder.encode(surface);
}

EmbeddingVector pattern_embedding(std::span<const MaskedContext> contexts,
                                  const Encoder& encoder) {
  EmbeddingVector mean(encoder.dim(), 0.0);
  if (contexts.empty()) return mean;
  for (const auto& ctx : contexts) {
    const auto v = encoder.encode(ctx.masked_text);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
  }
  const double n = static_cast<double>(contexts.size());
  for (double& x : mean) x /= n;
  return mean;
}

FeatureVector featurize(std::string_view surface, const Corpus& corpus,
                        const Encoder& encoder,
                        std::optional<std::size_t> max_contexts) {
  FeatureVector f;
  f.mode = FeatureMode::kEntityPattern;
  f.dim = encoder.dim();
  f.values = entity_embedding(surface, encoder);
  const auto contexts = collect_contexts(surface, corpus, max_contexts);
  const auto pattern = pattern_embedding(contexts, encoder);
  f.values.insert(f.values.end(), pattern.begin(), pattern.end());
  f.context_count = contexts.size();
  return f;
}

FeatureVector featurize_entity_only(std::string_view surface,
                                    const Encoder& encoder) {
  FeatureVector f;
  f.mode = FeatureMode::kEntityOnly;
  f.dim = encoder.dim();
  f.values = entity_embedding(surface, encoder);
  return f;
}

FeatureCache::FeatureCache(const Corpus& corpus, const Encoder& encoder,
                           FeatureMode mode,
                           std::optional<std::size_t> max_contexts)
    : corpus_(corpus),
      encoder_(encoder),
      mode_(mode),
      max_contexts_(max_contexts) {
  scope_ = corpus.digest() + "|" + encoder_descriptor(encoder.spec()) + "|" +
           std::to_string(encoder.dim()) + "|" +
           std::string(feature_mode_name(mode)) + "|" +
           (max_contexts ? std::to_string(*max_contexts) : "unlimited");
}

const FeatureVector& FeatureCache::get(std::string_view surface) {
  auto it = cache_.find(surface);
  if (it != cache_.end()) return it->second;
  auto f = mode_ == FeatureMode::kEntityPattern
               ? featurize(surface, corpus_, encoder_, max_contexts_)
               : featurize_entity_only(surface, encoder_);
  return cache_.emplace(std::string(surface), std::move(f)).first->second;
}

}  // namespace epc
