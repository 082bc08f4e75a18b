#include "epc/masking.hpp"

#include "epc/error.hpp"
#include "epc/text.hpp"

namespace epc {

namespace {

// Attempts to match the normalized surface at text[pos]; returns the end
// offset on success.
std::optional<std::size_t> match_at(std::string_view norm,
                                    std::string_view text, std::size_t pos) {
  std::size_t t = pos;
  for (std::size_t s = 0; s < norm.size(); ++s) {
    if (norm[s] == ' ') {
      if (t >= text.size() || !is_space_byte(text[t])) return std::nullopt;
      while (t < text.size() && is_space_byte(text[t])) ++t;
      continue;
    }
    if (t >= text.size() || ascii_lower(text[t]) != norm[s]) return std::nullopt;
    ++t;
  }
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> mask_token_spans(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (auto p = text.find(kMaskToken); p != std::string_view::npos;
       p = text.find(kMaskToken, p + kMaskToken.size())) {
    spans.emplace_back(p, p + kMaskToken.size());
  }
  return spans;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> find_spans(
    std::string_view surface, std::string_view text) {
  const std::string norm = normalize_surface(surface);
  if (norm.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "surface must be non-empty");
  }
  const bool word_start = is_word_byte(norm.front());
  const bool word_end = is_word_byte(norm.back());
  const auto opaque = mask_token_spans(text);
  std::size_t next_opaque = 0;

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (next_opaque < opaque.size() && opaque[next_opaque].second <= pos) {
      ++next_opaque;
    }
    if (next_opaque < opaque.size() && opaque[next_opaque].first <= pos) {
      pos = opaque[next_opaque].second;
      continue;
    }
    if (word_start && pos > 0 && is_word_byte(text[pos - 1])) {
      ++pos;
      continue;
    }
    auto end = match_at(norm, text, pos);
    if (end && (!word_end || *end == text.size() || !is_word_byte(text[*end])) &&
        (next_opaque >= opaque.size() || *end <= opaque[next_opaque].first)) {
      spans.emplace_back(pos, *end);
      pos = *end;
    } else {
      ++pos;
    }
  }
  return spans;
}

std::vector<Occurrence> find_occurrences(std::string_view surface,
                                         const AdviceStatement& statement) {
  std::vector<Occurrence> out;
  for (auto [b, e] : find_spans(surface, statement.text)) {
    out.push_back({statement.id, b, e});
  }
  return out;
}

MaskedContext mask_text(std::string_view statement_text,
                        std::span<const Occurrence> occurrences) {
  MaskedContext ctx;
  if (!occurrences.empty()) ctx.statement_id = occurrences.front().statement_id;
  std::size_t cursor = 0;
  for (const auto& occ : occurrences) {
    if (occ.start >= occ.end || occ.end > statement_text.size()) {
      throw Error(ErrorCode::kSpanOutOfBounds,
                  "span [" + std::to_string(occ.start) + ", " +
                      std::to_string(occ.end) + ") outside text of length " +
                      std::to_string(statement_text.size()));
    }
    if (occ.start < cursor) {
      throw Error(ErrorCode::kOverlappingSpans,
                  "span starting at " + std::to_string(occ.start) +
                      " overlaps or precedes previous span ending at " +
                      std::to_string(cursor));
    }
    ctx.masked_text.append(statement_text.substr(cursor, occ.start - cursor));
    ctx.masked_text.append(kMaskToken);
    cursor = occ.end;
    ++ctx.mask_count;
  }
  ctx.masked_text.append(statement_text.substr(cursor));
  return ctx;
}

std::vector<MaskedContext> collect_contexts(
    std::string_view surface, const Corpus& corpus,
    std::optional<std::size_t> max_contexts) {
  const std::string norm = normalize_surface(surface);
  if (norm.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "surface must be non-empty");
  }
  // Any match starts with the surface's first whitespace-free run.
  const std::string probe = norm.substr(0, norm.find(' '));

  std::vector<MaskedContext> out;
  const auto& statements = corpus.statements();
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (max_contexts && out.size() >= *max_contexts) break;
    if (corpus.folded_text(i).find(probe) == std::string::npos) continue;
    auto occ = find_occurrences(surface, statements[i]);
    if (occ.empty()) continue;
    auto ctx = mask_text(statements[i].text, occ);
    ctx.statement_id = statements[i].id;
    out.push_back(std::move(ctx));
  }
  return out;
}

}  // namespace epc
