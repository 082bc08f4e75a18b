#ifndef EPC_TESTS_TEST_UTIL_HPP_
#define EPC_TESTS_TEST_UTIL_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "epc/corpus.hpp"

namespace epc::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(EPC_FIXTURE_DIR) / name;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("epc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Corpus corpus_from_string(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return parse_corpus(in);
}

// Random corpus whose entity surfaces are words or word pairs drawn from the
// statement's own text, with random labels and occasional odd casing.
inline Corpus random_corpus(std::mt19937_64& rng, std::size_t statements) {
  static const char* kWords[] = {"kale",  "liver",   "walk",   "aspirin", "red",
                                 "wine",  "fever",   "sleep",  "heart",   "rate",
                                 "beans", "yoga",    "stress", "iron",    "dairy",
                                 "salt",  "insulin", "cough",  "swim",    "tea"};
  std::uniform_int_distribution<std::size_t> word(0, std::size(kWords) - 1);
  std::uniform_int_distribution<std::size_t> len(3, 9);
  std::uniform_int_distribution<int> label(0, static_cast<int>(kNumClasses) - 1);
  std::uniform_int_distribution<int> coin(0, 3);
  std::vector<AdviceStatement> out;
  for (std::size_t s = 0; s < statements; ++s) {
    AdviceStatement st;
    st.id = "r-" + std::to_string(s);
    std::vector<std::string> words;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) words.push_back(kWords[word(rng)]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i) st.text += coin(rng) == 0 ? ", " : " ";
      st.text += coin(rng) == 0 ? std::string(1, static_cast<char>(std::toupper(words[i][0]))) +
                                      words[i].substr(1)
                                : words[i];
    }
    st.text += ".";
    const auto entities = static_cast<std::size_t>(coin(rng));
    for (std::size_t e = 0; e < entities; ++e) {
      st.entities.push_back({words[word(rng) % n], static_cast<EntityClass>(label(rng))});
    }
    out.push_back(std::move(st));
  }
  return Corpus(std::move(out));
}

}  // namespace epc::testing

#endif  // EPC_TESTS_TEST_UTIL_HPP_
