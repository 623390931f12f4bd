#ifndef KBAD_TESTS_TEST_UTIL_HPP
#define KBAD_TESTS_TEST_UTIL_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "kbad/types.hpp"

namespace testutil {

/// Keys pressed every `step` ms, each held for `hold` ms.
inline kbad::KeystrokeSequence typed(const std::vector<std::string>& keys, kbad::Millis step = 100,
                                     kbad::Millis hold = 60) {
  kbad::KeystrokeSequence seq;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const kbad::Millis t = static_cast<kbad::Millis>(i) * step;
    seq.keystrokes.push_back({keys[i], t, t + hold});
  }
  return seq;
}

inline kbad::KeystrokeSequence keystrokes(std::vector<kbad::Keystroke> ks) {
  kbad::KeystrokeSequence seq;
  seq.keystrokes = std::move(ks);
  return seq;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("kbad_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil

#endif  // KBAD_TESTS_TEST_UTIL_HPP
