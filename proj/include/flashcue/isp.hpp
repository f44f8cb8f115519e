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
#include <json.hpp>

#include "flashcue/image.hpp"
#include "flashcue/raw.hpp"

namespace flashcue {

enum class Gamma { srgb, none };
enum class StageSet { full, linear_only };

struct IspConfig {
  Eigen::Vector3d wb_gains = Eigen::Vector3d::Ones();
  Eigen::Matrix3d ccm = Eigen::Matrix3d::Identity();
  Gamma gamma = Gamma::srgb;
  StageSet stage_set = StageSet::full;
  /// Rescale CCM rows to sum to one before use.
  bool normalize_ccm = false;

  /// Gains and CCM taken from capture metadata.
  static IspConfig from_meta(const CaptureMeta& meta, StageSet stages = StageSet::full);
  /// CCM actually applied (normalized when requested).
  Eigen::Matrix3d effective_ccm() const;
  void validate() const;
};

nlohmann::json to_json(const IspConfig& cfg);
IspConfig isp_config_from_json(const nlohmann::json& j, IspConfig base = {});
StageSet parse_stage_set(std::string_view s);

/// Bilinear demosaic. Each missing colour is the mean of the same-colour
/// sites in the 3x3 neighbourhood; borders mirror (which keeps CFA parity).
LinearImage demosaic_bilinear(const LinearImage& mosaic, Cfa cfa);

/// Per-channel gain, no clamp.
LinearImage white_balance(const LinearImage& img, const Eigen::Vector3d& gains);

/// Per-pixel 3x3 matrix multiply.
LinearImage color_correct(const LinearImage& img, const Eigen::Matrix3d& ccm);

/// sRGB transfer function on a single value, input clamped to [0,1].
float srgb_encode(float linear) noexcept;
float srgb_decode(float encoded) noexcept;

/// Float sRGB encode / decode of every sample.
ImageF gamma_encode_float(const LinearImage& img);
LinearImage gamma_decode_float(const ImageF& img);

/// Quantizes a [0,1] float image (clamped) to `bits` per sample.
RgbImage quantize(const ImageF& img, int bits = 8);
ImageF dequantize(const RgbImage& img);

inline RgbImage gamma_encode(const LinearImage& img, int bits = 8) {
  return quantize(gamma_encode_float(img), bits);
}
inline LinearImage gamma_decode(const RgbImage& img) { return gamma_decode_float(dequantize(img)); }

/// full: linearize, demosaic, white balance, CCM, gamma (float in [0,1]).
/// linear_only: linearize, demosaic, white balance (unclamped linear RGB).
ImageF run_isp(const RawFrame& frame, const IspConfig& cfg, const LinearizeOptions& lin = {});
/// Same stages starting from an already linearized mosaic.
ImageF run_isp_linear_mosaic(const LinearImage& mosaic, Cfa cfa, const IspConfig& cfg);

/// Rec.709 luma weights.
inline constexpr float kLumaR = 0.2126f;
inline constexpr float kLumaG = 0.7152f;
inline constexpr float kLumaB = 0.0722f;

/// Rec.709 luma of a 3-channel image; single-channel input is returned as is.
ImageF to_grayscale(const ImageF& img);

}  // namespace flashcue
