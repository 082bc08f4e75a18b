#ifndef EPC_MASKING_HPP_
#define EPC_MASKING_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epc/corpus.hpp"

namespace epc {

inline constexpr std::string_view kMaskToken = "[MASK]";

// Byte span [start, end) of a surface match within a statement's text.
struct Occurrence {
  std::string statement_id;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Occurrence&) const = default;
};

struct MaskedContext {
  std::string statement_id;
  std::string masked_text;
  std::size_t mask_count = 0;

  bool operator==(const MaskedContext&) const = default;
};

// Matching rule: ASCII case-insensitive, whole-word at each edge of the
// surface that is a word character, a space inside the surface matches any
// run of whitespace in the text. Scanning is left-to-right and greedy, with
// no overlaps. Existing "[MASK]" tokens are opaque and never matched.
// Throws InvalidArgument for a blank surface.
std::vector<std::pair<std::size_t, std::size_t>> find_spans(
    std::string_view surface, std::string_view text);

std::vector<Occurrence> find_occurrences(std::string_view surface,
                                         const AdviceStatement& statement);

// Replaces each span with "[MASK]". Spans must be sorted, non-empty,
// non-overlapping, and inside the text.
MaskedContext mask_text(std::string_view statement_text,
                        std::span<const Occurrence> occurrences);

// One masked context per statement containing the surface, corpus order.
// `max_contexts` of nullopt means unlimited.
std::vector<MaskedContext> collect_contexts(
    std::string_view surface, const Corpus& corpus,
    std::optional<std::size_t> max_contexts = std::nullopt);

}  // namespace epc

#endif  // EPC_MASKING_HPP_
