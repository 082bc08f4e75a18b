#include "epc/encoder.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <unordered_map>

#include "epc/error.hpp"
#include "epc/text.hpp"
#include "json.hpp"

namespace epc {

using nlohmann::json;

EncoderSpec parse_encoder_spec(std::string_view flag, std::size_t dim) {
  EncoderSpec spec;
  spec.dim = dim;
  if (flag == "test-hash") {
    spec.kind = EncoderKind::kTestHash;
  } else if (flag.starts_with("cache:")) {
    spec.kind = EncoderKind::kCacheFile;
    spec.source = std::string(flag.substr(6));
  } else if (flag.starts_with("adapter:")) {
    spec.kind = EncoderKind::kExternalAdapter;
    spec.source = std::string(flag.substr(8));
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown encoder '" + std::string(flag) +
                    "' (expected test-hash, cache:<path>, or adapter:<cmd>)");
  }
  return spec;
}

std::string encoder_descriptor(const EncoderSpec& spec) {
  switch (spec.kind) {
    case EncoderKind::kTestHash: return "test-hash";
    case EncoderKind::kCacheFile: return "cache:" + spec.source.value_or("");
    case EncoderKind::kExternalAdapter:
      return "adapter:" + spec.source.value_or("");
  }
  return "?";
}

std::string cache_key(std::string_view text) { return sha256_hex(text); }

namespace {

void check_vector(const EmbeddingVector& v, std::size_t dim,
                  const std::string& what) {
  if (v.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                what + ": vector has length " + std::to_string(v.size()) +
                    ", expected " + std::to_string(dim));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFiniteInput, what + ": non-finite component");
    }
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeds a splitmix64 stream from the text's SHA-256 and emits dim values
// uniform in [-1, 1).
class TestHashEncoder final : public Encoder {
 public:
  using Encoder::Encoder;

  EmbeddingVector encode(std::string_view text) const override {
    const std::string hex = sha256_hex(text);
    std::uint64_t state = 0x45504353ULL;
    for (std::size_t word = 0; word < 4; ++word) {
      const std::uint64_t part =
          std::stoull(hex.substr(word * 16, 16), nullptr, 16);
      state = splitmix64(state) ^ part;
    }
    EmbeddingVector v(dim());
    for (auto& x : v) {
      const std::uint64_t bits = splitmix64(state) >> 11;
      x = static_cast<double>(bits) * 0x1.0p-52 - 1.0;
    }
    return v;
  }
};

class CacheFileEncoder final : public Encoder {
 public:
  explicit CacheFileEncoder(EncoderSpec spec) : Encoder(std::move(spec)) {
    const std::filesystem::path path = *this->spec().source;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (trim(raw).empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(line);
      try {
        auto obj = json::parse(raw);
        auto key = obj.at("key").get<std::string>();
        auto text = obj.at("text").get<std::string>();
        auto vec = obj.at("vector").get<EmbeddingVector>();
        if (key != cache_key(text)) {
          throw Error(ErrorCode::kParseError, where + ": key does not match text hash");
        }
        check_vector(vec, dim(), where);
        if (!entries_.emplace(std::move(key), std::move(vec)).second) {
          throw Error(ErrorCode::kParseError, where + ": duplicate key");
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParseError, where + ": " + e.what());
      }
    }
  }

  EmbeddingVector encode(std::string_view text) const override {
    const auto key = cache_key(text);
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorCode::kCacheMiss, key);
    return it->second;
  }

 private:
  std::unordered_map<std::string, EmbeddingVector> entries_;
};

// Long-lived child process speaking line-delimited JSON on stdin/stdout.
// Requests are serialized.
class AdapterEncoder final : public Encoder {
 public:
  explicit AdapterEncoder(EncoderSpec spec) : Encoder(std::move(spec)) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw Error(ErrorCode::kAdapterFailure, "pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw Error(ErrorCode::kAdapterFailure, "fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      const std::string& cmd = *this->spec().source;
      execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = fdopen(to_child[1], "w");
    out_ = fdopen(from_child[0], "r");
    if (!in_ || !out_) throw Error(ErrorCode::kAdapterFailure, "fdopen() failed");
  }

  ~AdapterEncoder() override {
    if (in_) std::fclose(in_);
    if (out_) std::fclose(out_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  EmbeddingVector encode(std::string_view text) const override {
    std::lock_guard lock(mu_);
    const std::string request = json{{"text", std::string(text)}}.dump() + "\n";
    if (std::fwrite(request.data(), 1, request.size(), in_) != request.size() ||
        std::fflush(in_) != 0) {
      throw Error(ErrorCode::kAdapterFailure, "write to adapter failed");
    }
    std::string response;
    for (int c = std::fgetc(out_); c != EOF && c != '\n'; c = std::fgetc(out_)) {
      response.push_back(static_cast<char>(c));
    }
    if (response.empty()) {
      throw Error(ErrorCode::kAdapterFailure, "adapter closed its output");
    }
    EmbeddingVector v;
    try {
      v = json::parse(response).at("vector").get<EmbeddingVector>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kAdapterFailure,
                  std::string("bad adapter response: ") + e.what());
    }
    try {
      check_vector(v, dim(), "adapter");
    } catch (const Error& e) {
      throw Error(ErrorCode::kAdapterFailure, e.what());
    }
    return v;
  }

 private:
  pid_t pid_ = -1;
  std::FILE* in_ = nullptr;
  std::FILE* out_ = nullptr;
  mutable std::mutex mu_;
};

}  // namespace

std::unique_ptr<Encoder> make_encoder(const EncoderSpec& spec) {
  if (spec.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "encoder dim must be >= 1");
  }
  switch (spec.kind) {
    case EncoderKind::kTestHash:
      return std::make_unique<TestHashEncoder>(spec);
    case EncoderKind::kCacheFile:
      if (!spec.source || spec.source->empty()) {
        throw Error(ErrorCode::kInvalidArgument, "cache encoder requires a file path");
      }
      return std::make_unique<CacheFileEncoder>(spec);
    case EncoderKind::kExternalAdapter:
      if (!spec.source || spec.source->empty()) {
        throw Error(ErrorCode::kInvalidArgument, "adapter encoder requires a command");
      }
      return std::make_unique<AdapterEncoder>(spec);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown encoder kind");
}

std::vector<EmbeddingVector> encode_batch(const Encoder& encoder,
                                          std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(encoder.encode(texts[i]));
    } catch (const Error& e) {
      throw Error(e.code(), "batch index " + std::to_string(i) + ": " + e.detail());
    }
  }
  return out;
}

std::size_t build_cache(const Encoder& encoder,
                        std::span<const std::string> texts,
                        const std::filesystem::path& out) {
  // key -> (text, vector); std::map keeps the file sorted by key.
  std::map<std::string, std::pair<std::string, EmbeddingVector>> entries;
  std::error_code ec;
  if (std::filesystem::exists(out, ec)) {
    std::ifstream in(out, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + out.string());
    std::string raw;
    while (std::getline(in, raw)) {
      if (trim(raw).empty()) continue;
      try {
        auto obj = json::parse(raw);
        entries.emplace(obj.at("key").get<std::string>(),
                        std::make_pair(obj.at("text").get<std::string>(),
                                       obj.at("vector").get<EmbeddingVector>()));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParseError, out.string() + ": " + e.what());
      }
    }
  }
  for (const auto& text : texts) {
    auto key = cache_key(text);
    if (entries.contains(key)) continue;
    auto vec = encoder.encode(text);
    check_vector(vec, encoder.dim(), "build_cache");
    entries.emplace(std::move(key), std::make_pair(text, std::move(vec)));
  }

  const auto tmp = std::filesystem::path(out.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    for (const auto& [key, entry] : entries) {
      f << json{{"key", key}, {"text", entry.first}, {"vector", entry.second}}.dump()
        << '\n';
    }
    if (!f) throw Error(ErrorCode::kIoFailure, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, out, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "rename failed: " + ec.message());
  return entries.size();
}

}  // namespace epc
