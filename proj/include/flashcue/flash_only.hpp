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

#include "flashcue/image.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/raw.hpp"

namespace flashcue {

struct FlashOnlyOptions {
  /// Keep negative residuals instead of clamping them at zero.
  bool signed_mode = false;
  double saturation_margin = 0.02;
};

struct FlashOnlyResult {
  LinearImage image;
  /// Pixels saturated in either input; the residual there is unreliable.
  Mask saturated;
  /// Samples clamped at zero (always 0 in signed mode).
  Eigen::Index clamped = 0;
  double exposure_ratio = 1;
};

/// e_f / e_a with validation.
double exposure_ratio(double ambient_ms, double flash_ms);

/// I_fo = I_f - (e_f / e_a) I_a on two raw mosaics, in linear [0,1] space.
/// The output keeps the mosaic layout.
FlashOnlyResult compute_flash_only(const RawFrame& ambient, const RawFrame& flash,
                                   const FlashOnlyOptions& opts = {});

/// Same subtraction on linear images (mosaic or RGB). Saturation is judged
/// against 1 - margin in any channel.
FlashOnlyResult compute_flash_only(const LinearImage& ambient, const LinearImage& flash,
                                   double ambient_ms, double flash_ms,
                                   const FlashOnlyOptions& opts = {});

/// Encodes a flash-only mosaic back to raw with the ambient (donor)
/// metadata and runs the ISP configured from that metadata.
ImageF flash_only_to_rgb(const LinearImage& flash_only, Cfa cfa, const CaptureMeta& donor_meta,
                         StageSet stages = StageSet::full);

struct ReconstructResult {
  LinearImage image;
  Eigen::Index overflow = 0;
};

/// I_f = ratio * I_a + I_fo, clamped to [0,1]; clamped samples are counted.
ReconstructResult reconstruct_flash(const LinearImage& ambient, const LinearImage& flash_only,
                                    double exposure_ratio);

}  // namespace flashcue
