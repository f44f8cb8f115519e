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

#include <cassert>
#include <cstdint>
#include <string>

#include "flashcue/error.hpp"

namespace flashcue {

/// Dense row-major, channel-interleaved image. Pixel data lives in an Eigen
/// column array so whole-image arithmetic can be written as array
/// expressions on `array()`.
template <typename Scalar>
class Image {
 public:
  using ArrayType = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Image() = default;
  Image(int width, int height, int channels)
      : width_(width), height_(height), channels_(channels),
        data_(ArrayType::Zero(static_cast<Eigen::Index>(width) * height * channels)) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw ConfigError("invalid image shape " + std::to_string(width) + "x" +
                        std::to_string(height) + "x" + std::to_string(channels));
    }
  }
  Image(int width, int height, int channels, Scalar fill) : Image(width, height, channels) {
    data_.setConstant(fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  Eigen::Index size() const noexcept { return data_.size(); }
  Eigen::Index pixel_count() const noexcept {
    return static_cast<Eigen::Index>(width_) * height_;
  }
  bool empty() const noexcept { return data_.size() == 0; }

  Eigen::Index index(int x, int y, int c = 0) const noexcept {
    return (static_cast<Eigen::Index>(y) * width_ + x) * channels_ + c;
  }

  Scalar& operator()(int x, int y, int c = 0) noexcept {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[index(x, y, c)];
  }
  const Scalar& operator()(int x, int y, int c = 0) const noexcept {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[index(x, y, c)];
  }

  ArrayType& array() noexcept { return data_; }
  const ArrayType& array() const noexcept { return data_; }
  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  template <typename Other>
  bool same_extent(const Image<Other>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_shape(b) && (a.data_ == b.data_).all();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  ArrayType data_;
};

using ImageF = Image<float>;
/// Floating-point image in linear radiometric space, nominal range [0,1].
using LinearImage = Image<float>;
/// Per-pixel boolean mask stored as 0/1 bytes (1 channel).
using Mask = Image<std::uint8_t>;

inline Mask full_mask(int width, int height, bool value = true) {
  return Mask(width, height, 1, value ? 1 : 0);
}

/// Logical AND of two masks of equal extent.
Mask mask_and(const Mask& a, const Mask& b);
/// Display-referred (gamma-encoded) image with integer samples in [0, maxval].
struct RgbImage {
  Image<std::uint16_t> pixels;
  std::uint16_t maxval = 255;

  int width() const noexcept { return pixels.width(); }
  int height() const noexcept { return pixels.height(); }
  int channels() const noexcept { return pixels.channels(); }
  friend bool operator==(const RgbImage& a, const RgbImage& b) {
    return a.maxval == b.maxval && a.pixels == b.pixels;
  }
};

/// Number of set pixels.
Eigen::Index mask_count(const Mask& m);

/// Throws DataError when the two images do not share width and height.
template <typename A, typename B>
void require_same_extent(const Image<A>& a, const Image<B>& b, const std::string& what) {
  if (!a.same_extent(b)) {
    throw DataError(what + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

template <typename A, typename B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const std::string& what) {
  require_same_extent(a, b, what);
  if (a.channels() != b.channels()) {
    throw DataError(what + ": channel mismatch (" + std::to_string(a.channels()) + " vs " +
                    std::to_string(b.channels()) + ")");
  }
}

/// True when every sample is finite.
bool all_finite(const ImageF& img);

/// Copy of the rectangle [x0, x0+w) x [y0, y0+h).
template <typename Scalar>
Image<Scalar> crop(const Image<Scalar>& src, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > src.width() || y0 + h > src.height()) {
    throw DataError("crop window outside image");
  }
  Image<Scalar> out(w, h, src.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < src.channels(); ++c) out(x, y, c) = src(x0 + x, y0 + y, c);
    }
  }
  return out;
}

/// Extracts one channel as a single-channel image.
template <typename Scalar>
Image<Scalar> channel(const Image<Scalar>& src, int c) {
  Image<Scalar> out(src.width(), src.height(), 1);
  for (Eigen::Index i = 0; i < src.pixel_count(); ++i) {
    out.array()[i] = src.array()[i * src.channels() + c];
  }
  return out;
}

}  // namespace flashcue
