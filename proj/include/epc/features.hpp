#ifndef EPC_FEATURES_HPP_
#define EPC_FEATURES_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epc/corpus.hpp"
#include "epc/encoder.hpp"
#include "epc/masking.hpp"

namespace epc {

enum class FeatureMode { kEntityPattern, kEntityOnly };

std::string_view feature_mode_name(FeatureMode mode);  // "ep" / "entity-only"
std::optional<FeatureMode> parse_feature_mode(std::string_view name);

// Layout: [entity embedding (dim) | pattern embedding (dim)] in entity-pattern
// mode, [entity embedding (dim)] in entity-only mode.
struct FeatureVector {
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t context_count = 0;
  FeatureMode mode = FeatureMode::kEntityPattern;

  std::span<const double> entity_part() const {
    return std::span<const double>(values).first(dim);
  }
  // Empty in entity-only mode.
  std::span<const double> pattern_part() const {
    return mode == FeatureMode::kEntityPattern
               ? std::span<const double>(values).subspan(dim, dim)
               : std::span<const double>();
  }

  bool operator==(const FeatureVector&) const = default;
};

inline std::size_t feature_length(FeatureMode mode, std::size_t dim) {
  return mode == FeatureMode::kEntityPattern ? 2 * dim : dim;
}

EmbeddingVector entity_embedding(std::string_view surface, const Encoder& encoder);

// Component-wise mean of the context encodings; the zero vector when there
// are no contexts.
EmbeddingVector pattern_embedding(std::span<const MaskedContext> contexts,
                                  const Encoder& encoder);

FeatureVector featurize(std::string_view surface, const Corpus& corpus,
                        const Encoder& encoder,
                        std::optional<std::size_t> max_contexts = std::nullopt);

FeatureVector featurize_entity_only(std::string_view surface,
                                    const Encoder& encoder);

// Memoizes features per surface for one (corpus, encoder, mode,
// max_contexts) combination, so repeated surfaces and repeated folds are
// featurized once. Not thread-safe.
class FeatureCache {
 public:
  FeatureCache(const Corpus& corpus, const Encoder& encoder, FeatureMode mode,
               std::optional<std::size_t> max_contexts = std::nullopt);

  const FeatureVector& get(std::string_view surface);
  std::size_t size() const { return cache_.size(); }
  // Identifies the (corpus digest, encoder, mode, max_contexts) combination.
  const std::string& scope_key() const { return scope_; }

 private:
  const Corpus& corpus_;
  const Encoder& encoder_;
  FeatureMode mode_;
  std::optional<std::size_t> max_contexts_;
  std::string scope_;
  std::map<std::string, FeatureVector, std::less<>> cache_;
};

}  // namespace epc

#endif  // EPC_FEATURES_HPP_
