#include "epc/corpus.hpp"

#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "epc/error.hpp"
#include "epc/masking.hpp"
#include "epc/text.hpp"
#include "json.hpp"

namespace epc {

using nlohmann::json;

std::string_view class_name(EntityClass c) {
  switch (c) {
    case EntityClass::kFood: return "FOOD";
    case EntityClass::kMed: return "MED";
    case EntityClass::kDis: return "DIS";
    case EntityClass::kExer: return "EXER";
    case EntityClass::kPhys: return "PHYS";
    case EntityClass::kOth: return "OTH";
  }
  return "?";
}

std::optional<EntityClass> parse_class(std::string_view name) {
  for (EntityClass c : kAllClasses) {
    if (name == class_name(c)) return c;
  }
  if (name == "VIT") return EntityClass::kPhys;
  return std::nullopt;
}

std::map<std::string, std::vector<std::string>> build_entity_index(
    const std::vector<AdviceStatement>& statements) {
  std::map<std::string, std::vector<std::string>> index;
  for (const auto& st : statements) {
    for (const auto& e : st.entities) {
      auto key = normalize_surface(e.surface);
      if (key.empty()) continue;
      auto& ids = index[key];
      if (ids.empty() || ids.back() != st.id) ids.push_back(st.id);
    }
  }
  return index;
}

Corpus::Corpus(std::vector<AdviceStatement> statements)
    : statements_(std::move(statements)) {
  std::unordered_set<std::string> seen;
  for (const auto& st : statements_) {
    if (!seen.insert(st.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate statement id '" + st.id + "'");
    }
  }
  entity_index_ = build_entity_index(statements_);
  folded_.reserve(statements_.size());
  for (const auto& st : statements_) {
    std::string f(st.text);
    for (char& c : f) c = ascii_lower(c);
    folded_.push_back(std::move(f));
  }
  digest_ = sha256_hex(serialize_corpus(*this));
}

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& reason) {
  throw Error(ErrorCode::kMalformedLine,
              "line " + std::to_string(line) + ": " + reason);
}

const json& require_string(const json& obj, const char* key, std::size_t line,
                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line, where + "missing field '" + key + "'");
  if (!it->is_string()) {
    malformed(line, where + "field '" + key + "' must be a string");
  }
  return *it;
}

EntityAnnotation parse_entity(const json& obj, std::size_t line,
                              std::size_t pos,
                              std::vector<std::string>* warnings) {
  const std::string where = "entities[" + std::to_string(pos) + "]: ";
  if (!obj.is_object()) malformed(line, where + "entity must be an object");
  if (obj.contains("labels")) {
    malformed(line, where + "multi-label annotation ('labels') is not supported");
  }
  auto label_it = obj.find("label");
  if (label_it != obj.end() && label_it->is_array()) {
    malformed(line, where + "multi-label annotation (label array) is not supported");
  }
  EntityAnnotation ann;
  ann.surface = require_string(obj, "text", line, where).get<std::string>();
  const auto label = require_string(obj, "label", line, where).get<std::string>();
  auto parsed = parse_class(label);
  if (!parsed) {
    throw Error(ErrorCode::kUnknownLabel,
                "line " + std::to_string(line) + ": unknown label '" + label + "'");
  }
  ann.label = *parsed;
  if (warnings) {
    for (const auto& [key, _] : obj.items()) {
      if (key != "text" && key != "label") {
        warnings->push_back("line " + std::to_string(line) + ": " + where +
                            "ignoring unknown key '" + key + "'");
      }
    }
  }
  return ann;
}

AdviceStatement parse_statement(const std::string& raw, std::size_t line,
                                std::vector<std::string>* warnings) {
  json obj;
  try {
    obj = json::parse(raw);
  } catch (const json::parse_error& e) {
    malformed(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) malformed(line, "record must be a JSON object");

  AdviceStatement st;
  st.id = require_string(obj, "id", line, "").get<std::string>();
  st.text = require_string(obj, "text", line, "").get<std::string>();
  auto ents = obj.find("entities");
  if (ents == obj.end()) malformed(line, "missing field 'entities'");
  if (!ents->is_array()) malformed(line, "field 'entities' must be an array");
  for (std::size_t i = 0; i < ents->size(); ++i) {
    st.entities.push_back(parse_entity((*ents)[i], line, i, warnings));
  }
  if (warnings) {
    for (const auto& [key, _] : obj.items()) {
      if (key != "id" && key != "text" && key != "entities") {
        warnings->push_back("line " + std::to_string(line) +
                            ": ignoring unknown key '" + key + "'");
      }
    }
  }
  return st;
}

}  // namespace

Corpus parse_corpus(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<AdviceStatement> statements;
  std::unordered_set<std::string> ids;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    auto st = parse_statement(raw, line, warnings);
    if (!ids.insert(st.id).second) {
      throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(line) +
                                               ": duplicate statement id '" +
                                               st.id + "'");
    }
    statements.push_back(std::move(st));
  }
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed");
  return Corpus(std::move(statements));
}

Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<std::string>* warnings) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return parse_corpus(in, warnings);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& st : corpus.statements()) {
    // Insertion order is not preserved by nlohmann::json, so emit by hand.
    out << "{\"id\":" << json(st.id).dump() << ",\"text\":" << json(st.text).dump()
        << ",\"entities\":[";
    for (std::size_t i = 0; i < st.entities.size(); ++i) {
      if (i) out << ',';
      out << "{\"text\":" << json(st.entities[i].surface).dump()
          << ",\"label\":\"" << class_name(st.entities[i].label) << "\"}";
    }
    out << "]}\n";
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return out.str();
}

std::string_view issue_kind_name(IssueKind kind) {
  switch (kind) {
    case IssueKind::kSurfaceNotFound: return "SurfaceNotFound";
    case IssueKind::kEmptySurface: return "EmptySurface";
    case IssueKind::kDuplicateAnnotation: return "DuplicateAnnotation";
  }
  return "?";
}

std::vector<ValidationIssue> validate_corpus(const Corpus& corpus) {
  std::vector<ValidationIssue> issues;
  for (const auto& st : corpus.statements()) {
    std::set<std::pair<std::string, EntityClass>> seen;
    for (std::size_t i = 0; i < st.entities.size(); ++i) {
      const auto& e = st.entities[i];
      if (trim(e.surface).empty()) {
        issues.push_back({IssueKind::kEmptySurface, st.id, i, e.surface});
        continue;
      }
      if (!seen.insert({normalize_surface(e.surface), e.label}).second) {
        issues.push_back({IssueKind::kDuplicateAnnotation, st.id, i, e.surface});
      }
      if (find_occurrences(e.surface, st).empty()) {
        issues.push_back({IssueKind::kSurfaceNotFound, st.id, i, e.surface});
      }
    }
  }
  return issues;
}

ClassDistribution class_distribution(const Corpus& corpus) {
  ClassDistribution dist;
  for (const auto& st : corpus.statements()) {
    for (const auto& e : st.entities) {
      ++dist.counts[class_index(e.label)];
      ++dist.total;
    }
  }
  return dist;
}

}  // namespace epc
