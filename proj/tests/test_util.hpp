/* Copyright 2026 The reltrav Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef RELTRAV_TESTS_TEST_UTIL_HPP_
#define RELTRAV_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "reltrav/core.hpp"
#include "reltrav/synthworld.hpp"
#include "reltrav/trainer.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("reltrav_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline reltrav::ImageProvider SceneProvider(const reltrav::SynthDataset& ds) {
  return [&ds](const reltrav::ImageEntry& e) {
    return reltrav::ToTensor(ds.scenes[ds.manifest.IndexOf(e.image_id)].image);
  };
}

template <typename Fn>
reltrav::ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const reltrav::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a reltrav::Error");
}

}  // namespace testutil

#endif  // RELTRAV_TESTS_TEST_UTIL_HPP_
