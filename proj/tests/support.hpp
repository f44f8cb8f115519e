// Copyright 2026 The flashcue Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <cmath>

#include <unistd.h>

#include "flashcue/image.hpp"
#include "flashcue/raw.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> n{0};
    path_ = std::filesystem::temp_directory_path() /
            ("flashcue_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
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
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline flashcue::ImageF random_image(int w, int h, int c, unsigned seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  flashcue::ImageF img(w, h, c);
  for (auto& v : img.array()) v = d(gen);
  return img;
}

/// Smooth test pattern in roughly [0.1, 0.9].
inline flashcue::ImageF smooth_image(int w, int h, int c) {
  flashcue::ImageF img(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k)
        img(x, y, k) = static_cast<float>(0.5 + 0.2 * std::sin(0.11 * x + 0.7 * k) * std::cos(0.09 * y) +
                                          0.15 * std::sin(0.05 * (x + y) + k));
  return img;
}

inline double max_abs_diff(const flashcue::ImageF& a, const flashcue::ImageF& b) {
  return (a.array() - b.array()).abs().maxCoeff();
}

inline flashcue::CaptureMeta simple_meta(double black = 0, double white = 65535, double exposure_ms = 10) {
  flashcue::CaptureMeta m;
  m.set_black_level(black);
  m.white_level = white;
  m.exposure_ms = exposure_ms;
  return m;
}

}  // namespace testing
