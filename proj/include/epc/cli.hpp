#ifndef EPC_CLI_HPP_
#define EPC_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epc/classifier.hpp"
#include "epc/encoder.hpp"
#include "epc/eval.hpp"
#include "epc/features.hpp"
#include "json.hpp"

namespace epc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

// Fully resolved settings of one run. Written verbatim to config.json in the
// run's output directory; feeding that file back via --config reproduces the
// run.
struct RunConfig {
  std::string corpus_path;
  std::string encoder = "test-hash";
  std::size_t dim = kDefaultTestHashDim;
  FeatureMode mode = FeatureMode::kEntityPattern;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  TrainConfig train;
  std::optional<std::size_t> max_contexts;
  bool group_by_surface = true;
  std::string out_dir;

  void validate() const;
  EncoderSpec encoder_spec() const { return parse_encoder_spec(encoder, dim); }
  TrainConfig train_config() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
  }
  CvOptions cv_options() const {
    return CvOptions{k, seed, mode, max_contexts, group_by_surface};
  }

  bool operator==(const RunConfig&) const = default;
};

nlohmann::ordered_json run_config_to_json(const RunConfig& config);
// Missing keys keep their current values in `config`.
void apply_run_config_json(const nlohmann::json& doc, RunConfig& config);

// Entry point behind the `epc` binary. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epc::cli

#endif  // EPC_CLI_HPP_
