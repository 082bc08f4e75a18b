#ifndef EPC_CORPUS_HPP_
#define EPC_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epc {

// The six entity classes. The numeric order is the canonical class order
// used for model rows, tie-breaking, and report columns.
enum class EntityClass : int { kFood = 0, kMed, kDis, kExer, kPhys, kOth };

inline constexpr std::size_t kNumClasses = 6;
inline constexpr std::array<EntityClass, kNumClasses> kAllClasses = {
    EntityClass::kFood, EntityClass::kMed,  EntityClass::kDis,
    EntityClass::kExer, EntityClass::kPhys, EntityClass::kOth};

std::string_view class_name(EntityClass c);
// Accepts the six canonical names plus "VIT" (alias of PHYS).
std::optional<EntityClass> parse_class(std::string_view name);
inline std::size_t class_index(EntityClass c) {
  return static_cast<std::size_t>(c);
}

struct EntityAnnotation {
  std::string surface;
  EntityClass label = EntityClass::kFood;

  bool operator==(const EntityAnnotation&) const = default;
};

struct AdviceStatement {
  std::string id;
  std::string text;
  std::vector<EntityAnnotation> entities;

  bool operator==(const AdviceStatement&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  // Builds the entity index. Throws DuplicateId when two statements share an
  // id.
  explicit Corpus(std::vector<AdviceStatement> statements);

  const std::vector<AdviceStatement>& statements() const { return statements_; }
  // normalized surface -> ids of statements annotating it, corpus order.
  const std::map<std::string, std::vector<std::string>>& entity_index() const {
    return entity_index_;
  }
  std::size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }

  // Case-folded copy of statement i's text, used for fast prefiltering.
  const std::string& folded_text(std::size_t i) const { return folded_[i]; }

  // SHA-256 over the canonical JSON Lines serialization.
  const std::string& digest() const { return digest_; }

  bool operator==(const Corpus& other) const {
    return statements_ == other.statements_ &&
           entity_index_ == other.entity_index_;
  }

 private:
  std::vector<AdviceStatement> statements_;
  std::map<std::string, std::vector<std::string>> entity_index_;
  std::vector<std::string> folded_;
  std::string digest_;
};

std::map<std::string, std::vector<std::string>> build_entity_index(
    const std::vector<AdviceStatement>& statements);

// Parses JSON Lines. Blank lines are skipped. Unknown top-level keys are
// reported through `warnings` (when given) and otherwise ignored.
Corpus parse_corpus(std::istream& in,
                    std::vector<std::string>* warnings = nullptr);
Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<std::string>* warnings = nullptr);

// Canonical serialization: one compact object per line, labels by canonical
// name, keys in the order id, text, entities.
void write_corpus(const Corpus& corpus, std::ostream& out);
std::string serialize_corpus(const Corpus& corpus);

enum class IssueKind { kSurfaceNotFound, kEmptySurface, kDuplicateAnnotation };

std::string_view issue_kind_name(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  std::string statement_id;
  std::size_t entity_position = 0;  // index into the statement's entities
  std::string surface;

  bool operator==(const ValidationIssue&) const = default;
};

std::vector<ValidationIssue> validate_corpus(const Corpus& corpus);

struct ClassDistribution {
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t total = 0;

  std::size_t count(EntityClass c) const { return counts[class_index(c)]; }
};

// Mention-level counts: every annotation is one sample.
ClassDistribution class_distribution(const Corpus& corpus);

}  // namespace epc

#endif  // EPC_CORPUS_HPP_
