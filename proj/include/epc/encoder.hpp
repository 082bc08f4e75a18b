#ifndef EPC_ENCODER_HPP_
#define EPC_ENCODER_HPP_

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epc {

using EmbeddingVector = std::vector<double>;

enum class EncoderKind { kTestHash, kCacheFile, kExternalAdapter };

inline constexpr std::size_t kDefaultTestHashDim = 64;

struct EncoderSpec {
  EncoderKind kind = EncoderKind::kTestHash;
  std::size_t dim = kDefaultTestHashDim;
  // Cache file path for kCacheFile, shell command for kExternalAdapter.
  std::optional<std::string> source;

  bool operator==(const EncoderSpec&) const = default;
};

// Parses the CLI form: "test-hash", "cache:<path>", or "adapter:<command>".
EncoderSpec parse_encoder_spec(std::string_view flag, std::size_t dim);
// Inverse of parse_encoder_spec (without the dim).
std::string encoder_descriptor(const EncoderSpec& spec);

// A deterministic text -> vector provider. Implementations are safe for
// concurrent encode() calls.
class Encoder {
 public:
  explicit Encoder(EncoderSpec spec) : spec_(std::move(spec)) {}
  virtual ~Encoder() = default;
  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;

  const EncoderSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim; }

  virtual EmbeddingVector encode(std::string_view text) const = 0;

 private:
  EncoderSpec spec_;
};

// Validates the EncoderSpec (dim >= 1, source present where required) and opens the
// provider. Cache files are loaded eagerly; adapters are spawned eagerly.
std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec);

// Element-wise encode. The first failure is rethrown with its index.
std::vector<EmbeddingVector> encode_batch(const Encoder& encoder,
                                          std::span<const std::string> texts);

// Content-addressed key of a text: lowercase hex SHA-256 of its UTF-8 bytes.
std::string cache_key(std::string_view text);

// Writes (or merges into) a cache file with one entry per unique text, sorted
// by key. Entries already present in `out` are kept as they are. Returns the
// number of entries in the resulting file.
std::size_t build_cache(const Encoder& encoder,
                        std::span<const std::string> texts,
                        const std::filesystem::path& out);

}  // namespace epc

#endif  // EPC_ENCODER_HPP_
