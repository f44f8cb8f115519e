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

#include "flashcue/flash_only.hpp"

#include <cmath>

namespace flashcue {

namespace {

Eigen::Index subtract(const LinearImage& ambient, const LinearImage& flash, float ratio,
                      bool signed_mode, LinearImage& out) {
  out = LinearImage(flash.width(), flash.height(), flash.channels());
  out.array() = flash.array() - ratio * ambient.array();
  if (signed_mode) return 0;
  const Eigen::Index negative = (out.array() < 0.0f).count();
  out.array() = out.array().max(0.0f);
  return negative;
}

}  // namespace

double exposure_ratio(double ambient_ms, double flash_ms) {
  if (!(ambient_ms > 0) || !(flash_ms > 0) || !std::isfinite(ambient_ms) || !std::isfinite(flash_ms)) {
    throw ConfigError("exposure times must be positive (ambient " + std::to_string(ambient_ms) +
                      " ms, flash " + std::to_string(flash_ms) + " ms)");
  }
  return flash_ms / ambient_ms;
}

FlashOnlyResult compute_flash_only(const RawFrame& ambient, const RawFrame& flash,
                                   const FlashOnlyOptions& opts) {
  require_same_extent(ambient.samples, flash.samples, "compute_flash_only");
  if (ambient.cfa != flash.cfa) throw DataError("compute_flash_only: CFA pattern mismatch");
  FlashOnlyResult r;
  r.exposure_ratio = exposure_ratio(ambient.meta.exposure_ms, flash.meta.exposure_ms);
  const LinearImage a = linearize(ambient);
  const LinearImage f = linearize(flash);
  r.clamped = subtract(a, f, static_cast<float>(r.exposure_ratio), opts.signed_mode, r.image);
  r.saturated = saturation_mask(ambient, flash, opts.saturation_margin);
  return r;
}

FlashOnlyResult compute_flash_only(const LinearImage& ambient, const LinearImage& flash,
                                   double ambient_ms, double flash_ms,
                                   const FlashOnlyOptions& opts) {
  require_same_shape(ambient, flash, "compute_flash_only");
  FlashOnlyResult r;
  r.exposure_ratio = exposure_ratio(ambient_ms, flash_ms);
  r.clamped = subtract(ambient, flash, static_cast<float>(r.exposure_ratio), opts.signed_mode, r.image);
  const float limit = static_cast<float>(1.0 - opts.saturation_margin);
  r.saturated = Mask(ambient.width(), ambient.height(), 1);
  const int ch = ambient.channels();
  for (Eigen::Index i = 0; i < ambient.pixel_count(); ++i) {
    bool sat = false;
    for (int c = 0; c < ch; ++c) {
      sat = sat || ambient.array()[i * ch + c] >= limit || flash.array()[i * ch + c] >= limit;
    }
    r.saturated.array()[i] = sat ? 1 : 0;
  }
  return r;
}

ImageF flash_only_to_rgb(const LinearImage& flash_only, Cfa cfa, const CaptureMeta& donor_meta,
                         StageSet stages) {
  const RawFrame raw = delinearize(flash_only, cfa, donor_meta).frame;
  return run_isp(raw, IspConfig::from_meta(donor_meta, stages));
}

ReconstructResult reconstruct_flash(const LinearImage& ambient, const LinearImage& flash_only,
                                    double ratio) {
  require_same_shape(ambient, flash_only, "reconstruct_flash");
  if (!(ratio > 0) || !std::isfinite(ratio)) throw ConfigError("exposure ratio must be positive");
  ReconstructResult r;
  r.image = LinearImage(ambient.width(), ambient.height(), ambient.channels());
  r.image.array() = static_cast<float>(ratio) * ambient.array() + flash_only.array();
  r.overflow = (r.image.array() > 1.0f || r.image.array() < 0.0f).count();
  r.image.array() = r.image.array().max(0.0f).min(1.0f);
  return r;
}

}  // namespace flashcue
