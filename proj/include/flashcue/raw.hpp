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

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string_view>

#include "flashcue/image.hpp"

namespace flashcue {

/// Bayer layout, named by the colours of the 2x2 tile read row by row.
enum class Cfa { RGGB, BGGR, GRBG, GBRG };

enum class Illumination { ambient, flash, flash_only };

std::string_view to_string(Cfa cfa);
std::string_view to_string(Illumination ill);
Cfa parse_cfa(std::string_view s);
Illumination parse_illumination(std::string_view s);

/// Tile position of (x, y) inside the 2x2 CFA tile: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1).
inline int cfa_site(int x, int y) noexcept { return (y & 1) * 2 + (x & 1); }

/// Colour (0=R, 1=G, 2=B) sensed at (x, y).
int cfa_color(Cfa cfa, int x, int y) noexcept;

struct CaptureMeta {
  /// Indexed by cfa_site().
  std::array<double, 4> black_level{0, 0, 0, 0};
  double white_level = 65535;
  double exposure_ms = 1;
  double iso = 100;
  Eigen::Vector3d wb_gains = Eigen::Vector3d::Ones();
  Eigen::Matrix3d ccm = Eigen::Matrix3d::Identity();
  Illumination illumination = Illumination::ambient;

  void set_black_level(double v) { black_level.fill(v); }
  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Single-channel Bayer mosaic with its capture metadata.
struct RawFrame {
  Image<std::uint16_t> samples;
  Cfa cfa = Cfa::RGGB;
  CaptureMeta meta;

  RawFrame() = default;
  RawFrame(int width, int height, Cfa pattern, CaptureMeta m)
      : samples(width, height, 1), cfa(pattern), meta(std::move(m)) {}

  int width() const noexcept { return samples.width(); }
  int height() const noexcept { return samples.height(); }
  std::uint16_t& operator()(int x, int y) noexcept { return samples(x, y); }
  std::uint16_t operator()(int x, int y) const noexcept { return samples(x, y); }

  /// Checks metadata and that no sample exceeds the white level.
  void validate() const;
};

struct LinearizeOptions {
  /// Keep values outside [0,1] instead of clamping.
  bool signed_mode = false;
};

/// Maps samples to (sample - black[site]) / (white - black[site]), clamped
/// to [0,1] unless signed mode is requested. Mosaic layout is preserved.
LinearImage linearize(const RawFrame& frame, const LinearizeOptions& opts = {});

struct DelinearizeResult {
  RawFrame frame;
  /// Inputs that fell outside [0,1] and were clamped.
  Eigen::Index clamped = 0;
};

/// Inverse of linearize with round-to-nearest.
DelinearizeResult delinearize(const LinearImage& img, Cfa cfa, const CaptureMeta& meta);

/// Set where either frame is at or above (1 - margin) * white_level.
Mask saturation_mask(const RawFrame& a, const RawFrame& b, double margin = 0.02);

}  // namespace flashcue
