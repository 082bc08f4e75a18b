#include "epc/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "epc/corpus.hpp"
#include "epc/error.hpp"
#include "epc/masking.hpp"

namespace epc::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  if (corpus_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  (void)encoder_spec();
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "--dim must be >= 1");
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "--k must be >= 2");
  if (max_contexts && *max_contexts == 0) {
    throw Error(ErrorCode::kInvalidArgument, "--max-contexts must be positive or 'unlimited'");
  }
  train_config().validate();
}

ordered_json run_config_to_json(const RunConfig& c) {
  return ordered_json{
      {"corpus", c.corpus_path},
      {"encoder", c.encoder},
      {"dim", c.dim},
      {"mode", std::string(feature_mode_name(c.mode))},
      {"k", c.k},
      {"seed", c.seed},
      {"lr", c.train.learning_rate},
      {"epochs", c.train.epochs},
      {"batch", c.train.batch_size},
      {"l2", c.train.l2},
      {"class_weighting", std::string(class_weighting_name(c.train.class_weighting))},
      {"max_contexts", c.max_contexts ? ordered_json(*c.max_contexts) : ordered_json(nullptr)},
      {"group_by_surface", c.group_by_surface},
      {"out", c.out_dir},
  };
}

void apply_run_config_json(const json& doc, RunConfig& c) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
    if (doc.contains("corpus")) c.corpus_path = doc.at("corpus").get<std::string>();
    if (doc.contains("encoder")) c.encoder = doc.at("encoder").get<std::string>();
    if (doc.contains("dim")) c.dim = doc.at("dim").get<std::size_t>();
    if (doc.contains("mode")) {
      const auto name = doc.at("mode").get<std::string>();
      auto m = parse_feature_mode(name);
      if (!m) throw Error(ErrorCode::kParseError, "config: unknown mode '" + name + "'");
      c.mode = *m;
    }
    if (doc.contains("k")) c.k = doc.at("k").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("lr")) c.train.learning_rate = doc.at("lr").get<double>();
    if (doc.contains("epochs")) c.train.epochs = doc.at("epochs").get<std::size_t>();
    if (doc.contains("batch")) c.train.batch_size = doc.at("batch").get<std::size_t>();
    if (doc.contains("l2")) c.train.l2 = doc.at("l2").get<double>();
    if (doc.contains("class_weighting")) {
      const auto name = doc.at("class_weighting").get<std::string>();
      auto w = parse_class_weighting(name);
      if (!w) throw Error(ErrorCode::kParseError, "config: unknown class_weighting '" + name + "'");
      c.train.class_weighting = *w;
    }
    if (doc.contains("max_contexts")) {
      const auto& v = doc.at("max_contexts");
      c.max_contexts = v.is_null() ? std::nullopt
                                   : std::optional<std::size_t>(v.get<std::size_t>());
    }
    if (doc.contains("group_by_surface")) c.group_by_surface = doc.at("group_by_surface").get<bool>();
    if (doc.contains("out")) c.out_dir = doc.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
}

namespace {

// Raw flag values; only flags the user actually passed override the config.
struct Flags {
  std::string config_file;
  std::string corpus;
  std::string encoder;
  std::size_t dim = 0;
  std::string mode;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double lr = 0;
  std::size_t epochs = 0;
  std::size_t batch = 0;
  double l2 = 0;
  std::string class_weighting;
  std::string max_contexts;
  bool no_group = false;
  std::string out;

  std::string surface;
  std::string model;
  bool strict = false;
  bool json_output = false;
};

std::optional<std::size_t> parse_max_contexts(const std::string& v) {
  if (v == "unlimited") return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto n = std::stoull(v, &pos);
    if (pos == v.size() && n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument,
              "--max-contexts must be a positive integer or 'unlimited', got '" + v + "'");
}

RunConfig resolve(const CLI::App& sub, const Flags& f) {
  RunConfig c;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFileNotFound, f.config_file);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError, f.config_file + ": " + e.what());
    }
    apply_run_config_json(doc, c);
  }
  auto given = [&](const char* name) {
    auto* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--corpus")) c.corpus_path = f.corpus;
  if (given("--encoder")) c.encoder = f.encoder;
  if (given("--dim")) c.dim = f.dim;
  if (given("--mode")) {
    auto m = parse_feature_mode(f.mode);
    if (!m) throw Error(ErrorCode::kInvalidArgument, "unknown --mode '" + f.mode + "'");
    c.mode = *m;
  }
  if (given("--k")) c.k = f.k;
  if (given("--seed")) c.seed = f.seed;
  if (given("--lr")) c.train.learning_rate = f.lr;
  if (given("--epochs")) c.train.epochs = f.epochs;
  if (given("--batch")) c.train.batch_size = f.batch;
  if (given("--l2")) c.train.l2 = f.l2;
  if (given("--class-weighting")) {
    auto w = parse_class_weighting(f.class_weighting);
    if (!w) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown --class-weighting '" + f.class_weighting + "'");
    }
    c.train.class_weighting = *w;
  }
  if (given("--max-contexts")) c.max_contexts = parse_max_contexts(f.max_contexts);
  if (given("--no-group")) c.group_by_surface = !f.no_group;
  if (given("--out")) c.out_dir = f.out;
  c.train.seed = c.seed;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed: " + path.string());
}

fs::path prepare_out_dir(const RunConfig& c) {
  if (c.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + c.out_dir + ": " + ec.message());
  write_text(fs::path(c.out_dir) / "config.json", run_config_to_json(c).dump(2) + "\n");
  return c.out_dir;
}

Corpus load_with_warnings(const std::string& path, std::ostream& err) {
  std::vector<std::string> warnings;
  auto corpus = load_corpus(path, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  return corpus;
}

void report_issues(const std::vector<ValidationIssue>& issues, std::ostream& err) {
  for (const auto& i : issues) {
    err << "warning: " << issue_kind_name(i.kind) << " in statement '" << i.statement_id
        << "' entity " << i.entity_position << " ('" << i.surface << "')\n";
  }
}

int cmd_stats(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  const auto corpus = load_with_warnings(f.corpus, err);
  const auto issues = validate_corpus(corpus);
  report_issues(issues, err);
  const auto dist = class_distribution(corpus);
  // Row order of the published distribution table.
  static constexpr std::array<EntityClass, kNumClasses> kRows = {
      EntityClass::kMed,  EntityClass::kDis,  EntityClass::kFood,
      EntityClass::kPhys, EntityClass::kExer, EntityClass::kOth};
  if (f.json_output) {
    ordered_json counts = ordered_json::object();
    for (auto c : kRows) counts[std::string(class_name(c))] = dist.count(c);
    out << ordered_json{{"statements", corpus.size()},
                        {"counts", std::move(counts)},
                        {"total", dist.total}}
               .dump()
        << '\n';
  } else {
    out << std::left << std::setw(8) << "class" << "samples\n";
    for (auto c : kRows) out << std::setw(8) << class_name(c) << dist.count(c) << '\n';
    out << std::setw(8) << "total" << dist.total << '\n';
    out << "statements: " << corpus.size() << '\n';
  }
  if (f.strict && !issues.empty()) {
    err << "error: " << issues.size() << " validation issue(s)\n";
    return kExitUserError;
  }
  return kExitOk;
}

int cmd_validate(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  const auto corpus = load_with_warnings(f.corpus, err);
  const auto issues = validate_corpus(corpus);
  for (const auto& i : issues) {
    out << ordered_json{{"kind", std::string(issue_kind_name(i.kind))},
                        {"statement_id", i.statement_id},
                        {"entity", i.entity_position},
                        {"surface", i.surface}}
               .dump()
        << '\n';
  }
  return issues.empty() ? kExitOk : kExitUserError;
}

int cmd_mask(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.corpus.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  if (f.surface.empty()) throw Error(ErrorCode::kInvalidArgument, "--surface is required");
  std::optional<std::size_t> max;
  if (!f.max_contexts.empty()) max = parse_max_contexts(f.max_contexts);
  const auto corpus = load_with_warnings(f.corpus, err);
  for (const auto& ctx : collect_contexts(f.surface, corpus, max)) {
    out << ordered_json{{"statement_id", ctx.statement_id},
                        {"masked_text", ctx.masked_text},
                        {"mask_count", ctx.mask_count}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

// Every text a featurization run needs: entity surfaces and, in
// entity-pattern mode, their masked contexts.
std::vector<std::string> texts_to_encode(const Corpus& corpus, FeatureMode mode,
                                         std::optional<std::size_t> max_contexts) {
  std::vector<std::string> texts;
  std::set<std::string, std::less<>> seen_surface;
  for (const auto& s : collect_samples(corpus)) {
    if (!seen_surface.insert(s.surface).second) continue;
    texts.push_back(s.surface);
    if (mode != FeatureMode::kEntityPattern) continue;
    for (auto& ctx : collect_contexts(s.surface, corpus, max_contexts)) {
      texts.push_back(std::move(ctx.masked_text));
    }
  }
  return texts;
}

int cmd_build_cache(const CLI::App& sub, const Flags& f, std::ostream& out,
                    std::ostream& err) {
  auto c = resolve(sub, f);
  if (c.corpus_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  if (c.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  const auto corpus = load_with_warnings(c.corpus_path, err);
  const auto encoder = make_encoder(c.encoder_spec());
  const auto texts = texts_to_encode(corpus, c.mode, c.max_contexts);
  const auto n = build_cache(*encoder, texts, c.out_dir);
  out << n << " entries in " << c.out_dir << '\n';
  return kExitOk;
}

int cmd_features(const CLI::App& sub, const Flags& f, std::ostream& out,
                 std::ostream& err) {
  auto c = resolve(sub, f);
  if (c.corpus_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
  const auto corpus = load_with_warnings(c.corpus_path, err);
  const auto encoder = make_encoder(c.encoder_spec());
  FeatureCache cache(corpus, *encoder, c.mode, c.max_contexts);
  for (const auto& s : collect_samples(corpus)) {
    const auto& fv = cache.get(s.surface);
    out << ordered_json{{"surface", s.surface},
                        {"label", std::string(class_name(s.label))},
                        {"source_id", s.source_id},
                        {"vector", fv.values},
                        {"context_count", fv.context_count}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

int cmd_train(const CLI::App& sub, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto c = resolve(sub, f);
  c.validate();
  const auto corpus = load_with_warnings(c.corpus_path, err);
  const auto encoder = make_encoder(c.encoder_spec());
  const auto samples = collect_samples(corpus);
  if (samples.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "corpus has no annotated entities");
  }
  FeatureCache cache(corpus, *encoder, c.mode, c.max_contexts);
  std::vector<FeatureVector> features;
  std::vector<EntityClass> labels;
  for (const auto& s : samples) {
    features.push_back(cache.get(s.surface));
    labels.push_back(s.label);
  }
  const auto result = train(features, labels, c.train_config());

  const auto dir = prepare_out_dir(c);
  save_model(result.model, dir / "model.json");
  write_text(dir / "trace.json", ordered_json{{"loss", result.loss_trace}}.dump() + "\n");
  out << "trained on " << samples.size() << " samples, final loss "
      << std::setprecision(6) << result.loss_trace.back() << '\n'
      << "wrote " << (dir / "model.json").string() << '\n';
  return kExitOk;
}

int cmd_cv(const CLI::App& sub, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto c = resolve(sub, f);
  c.validate();
  const auto corpus = load_with_warnings(c.corpus_path, err);
  const auto encoder = make_encoder(c.encoder_spec());
  const auto result = cross_validate(corpus, *encoder, c.train_config(), c.cv_options());

  const auto dir = prepare_out_dir(c);
  auto report = cv_result_to_json(result);
  report["mode"] = std::string(feature_mode_name(c.mode));
  write_text(dir / "report.json", report.dump(2) + "\n");
  const auto errors = export_errors(result.pooled, dir / "errors.jsonl", dir / "confusion.csv");

  out << std::fixed << std::setprecision(4);
  for (auto cls : kReportColumnOrder) out << class_name(cls) << '\t';
  out << "W/AVG\n";
  for (auto cls : kReportColumnOrder) out << result.mean.of(cls).f1 << '\t';
  out << result.mean.weighted_f1 << '\n';
  out << errors << " misclassified samples; reports in " << dir.string() << '\n';
  return kExitOk;
}

int cmd_predict(const CLI::App& sub, const Flags& f, std::ostream& out, std::ostream& err) {
  auto c = resolve(sub, f);
  if (f.model.empty()) throw Error(ErrorCode::kInvalidArgument, "--model is required");
  if (f.surface.empty()) throw Error(ErrorCode::kInvalidArgument, "--surface is required");
  if (c.corpus_path.empty() && c.mode == FeatureMode::kEntityPattern) {
    throw Error(ErrorCode::kInvalidArgument, "--corpus is required in ep mode");
  }
  const auto model = load_model(f.model);
  const auto encoder = make_encoder(c.encoder_spec());
  FeatureVector fv;
  if (c.mode == FeatureMode::kEntityPattern) {
    const auto corpus = load_with_warnings(c.corpus_path, err);
    fv = featurize(f.surface, corpus, *encoder, c.max_contexts);
  } else {
    fv = featurize_entity_only(f.surface, *encoder);
  }
  const auto p = predict(model, fv);
  ordered_json probs = ordered_json::object();
  for (auto cls : kAllClasses) probs[std::string(class_name(cls))] = p.probabilities[class_index(cls)];
  out << ordered_json{{"surface", f.surface},
                      {"label", std::string(class_name(p.label))},
                      {"probabilities", std::move(probs)},
                      {"context_count", fv.context_count}}
             .dump()
      << '\n';
  return kExitOk;
}

void add_run_flags(CLI::App* sub, Flags& f, bool with_train, bool with_cv) {
  sub->add_option("--config", f.config_file, "Run config JSON (flags override it)");
  sub->add_option("--corpus", f.corpus, "Corpus JSON Lines file");
  sub->add_option("--encoder", f.encoder, "test-hash | cache:<path> | adapter:<cmd>");
  sub->add_option("--dim", f.dim, "Embedding dimension");
  sub->add_option("--mode", f.mode, "ep | entity-only");
  sub->add_option("--max-contexts", f.max_contexts, "Positive integer or 'unlimited'");
  sub->add_option("--seed", f.seed, "Seed for all randomness");
  if (with_train) {
    sub->add_option("--lr", f.lr, "Learning rate");
    sub->add_option("--epochs", f.epochs, "Training epochs");
    sub->add_option("--batch", f.batch, "Mini-batch size");
    sub->add_option("--l2", f.l2, "L2 penalty on weights");
    sub->add_option("--class-weighting", f.class_weighting, "none | inverse-frequency");
  }
  if (with_cv) {
    sub->add_option("--k", f.k, "Number of folds");
    sub->add_flag("--no-group", f.no_group, "Do not force equal surfaces into one fold");
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entity/pattern health entity classification"};
  app.name("epc");
  app.require_subcommand(1);
  Flags f;

  auto* stats = app.add_subcommand("stats", "Print the class distribution of a corpus");
  stats->add_option("--corpus", f.corpus, "Corpus JSON Lines file")->required();
  stats->add_flag("--strict", f.strict, "Exit 1 when validation reports issues");
  stats->add_flag("--json", f.json_output, "Print JSON instead of a table");

  auto* validate = app.add_subcommand("validate", "List validation issues as JSON Lines");
  validate->add_option("--corpus", f.corpus, "Corpus JSON Lines file")->required();

  auto* mask = app.add_subcommand("mask", "Print masked contexts of a surface as JSON Lines");
  mask->add_option("--surface", f.surface, "Entity surface form")->required();
  mask->add_option("--corpus", f.corpus, "Corpus JSON Lines file")->required();
  mask->add_option("--max-contexts", f.max_contexts, "Positive integer or 'unlimited'");

  auto* cache = app.add_subcommand("build-cache", "Encode every text a run needs into a cache file");
  add_run_flags(cache, f, false, false);
  cache->add_option("--out", f.out, "Cache file to write or extend")->required();

  auto* features = app.add_subcommand("features", "Dump per-sample features as JSON Lines");
  add_run_flags(features, f, false, false);

  auto* train_cmd = app.add_subcommand("train", "Train on the full corpus");
  add_run_flags(train_cmd, f, true, false);
  train_cmd->add_option("--out", f.out, "Output directory");

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  add_run_flags(cv, f, true, true);
  cv->add_option("--out", f.out, "Output directory");

  auto* predict_cmd = app.add_subcommand("predict", "Classify one surface");
  add_run_flags(predict_cmd, f, false, false);
  predict_cmd->add_option("--model", f.model, "model.json from train")->required();
  predict_cmd->add_option("--surface", f.surface, "Entity surface form")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (stats->parsed()) return cmd_stats(f, out, err);
    if (validate->parsed()) return cmd_validate(f, out, err);
    if (mask->parsed()) return cmd_mask(f, out, err);
    if (cache->parsed()) return cmd_build_cache(*cache, f, out, err);
    if (features->parsed()) return cmd_features(*features, f, out, err);
    if (train_cmd->parsed()) return cmd_train(*train_cmd, f, out, err);
    if (cv->parsed()) return cmd_cv(*cv, f, out, err);
    if (predict_cmd->parsed()) return cmd_predict(*predict_cmd, f, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
  err << "internal error: no command dispatched\n";
  return kExitInternalError;
}

}  // namespace epc::cli
