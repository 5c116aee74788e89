#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mapweld/error.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mapweld_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
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

template <typename F>
mapweld::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const mapweld::Error& e) {
    return e.code();
  }
  throw std::logic_error("expected a mapweld::Error");
}

}  // namespace testutil
