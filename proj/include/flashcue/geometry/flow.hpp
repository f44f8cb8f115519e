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

#include <filesystem>

#include "flashcue/geometry/homography.hpp"
#include "flashcue/image.hpp"

namespace flashcue {

/// Dense per-pixel displacement (u, v) in pixels. Pixel p of the target
/// corresponds to position p + flow(p) in the source.
class FlowField {
 public:
  FlowField() : uv_(0, 0, 2) {}
  FlowField(int width, int height) : uv_(width, height, 2) {}
  /// Wraps a 2-channel image; throws DataError on wrong channels or non-finite values.
  explicit FlowField(ImageF uv);

  int width() const noexcept { return uv_.width(); }
  int height() const noexcept { return uv_.height(); }

  float& u(int x, int y) noexcept { return uv_(x, y, 0); }
  float& v(int x, int y) noexcept { return uv_(x, y, 1); }
  float u(int x, int y) const noexcept { return uv_(x, y, 0); }
  float v(int x, int y) const noexcept { return uv_(x, y, 1); }
  Eigen::Vector2d at(int x, int y) const noexcept { return {uv_(x, y, 0), uv_(x, y, 1)}; }

  /// Bilinear sample with clamped coordinates.
  Eigen::Vector2d sample(double x, double y) const noexcept;

  const ImageF& image() const noexcept { return uv_; }
  ImageF& image() noexcept { return uv_; }

  bool is_zero() const { return (uv_.array() == 0.0f).all(); }

  friend bool operator==(const FlowField& a, const FlowField& b) { return a.uv_ == b.uv_; }

 private:
  ImageF uv_;
};

void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

/// flow(p) = H p - p at every pixel centre (computed in double).
FlowField homography_to_flow(const Homography& h, int width, int height);

enum class Boundary { zero, clamp };

struct WarpResult {
  ImageF image;
  /// Unset where the sample position lies outside the source (zero policy).
  Mask valid;
};

/// Bilinear sample of channel c at real position (x, y); coordinates are
/// clamped to the image.
float bilinear_sample(const ImageF& img, double x, double y, int c) noexcept;

/// Backward warp: out(p) = src(p + flow(p)).
WarpResult warp_by_flow(const ImageF& src, const FlowField& flow, Boundary boundary = Boundary::zero);

/// Flow of applying `first` and then `second`:
/// p + f(p) = (p + first(p)) + second(p + first(p)), second sampled bilinearly.
FlowField compose_flows(const FlowField& first, const FlowField& second);

/// Fixed-point inverse: g(q) = -f(q + g(q)). Exact for uniform flows.
FlowField invert_flow(const FlowField& flow, int iterations = 30);

struct EndpointError {
  double mean = 0;
  double max = 0;
  Eigen::Index count = 0;
};

/// Endpoint error statistics, optionally restricted to a mask.
EndpointError endpoint_error(const FlowField& a, const FlowField& b, const Mask* valid = nullptr);

}  // namespace flashcue
