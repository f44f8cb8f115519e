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

#include "flashcue/raw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace flashcue {

std::string_view to_string(Cfa cfa) {
  switch (cfa) {
    case Cfa::RGGB: return "RGGB";
    case Cfa::BGGR: return "BGGR";
    case Cfa::GRBG: return "GRBG";
    case Cfa::GBRG: return "GBRG";
  }
  return "?";
}

std::string_view to_string(Illumination ill) {
  switch (ill) {
    case Illumination::ambient: return "ambient";
    case Illumination::flash: return "flash";
    case Illumination::flash_only: return "flash_only";
  }
  return "?";
}

Cfa parse_cfa(std::string_view s) {
  if (s == "RGGB") return Cfa::RGGB;
  if (s == "BGGR") return Cfa::BGGR;
  if (s == "GRBG") return Cfa::GRBG;
  if (s == "GBRG") return Cfa::GBRG;
  throw ConfigError("unknown CFA pattern '" + std::string(s) + "'");
}

Illumination parse_illumination(std::string_view s) {
  if (s == "ambient") return Illumination::ambient;
  if (s == "flash") return Illumination::flash;
  if (s == "flash_only") return Illumination::flash_only;
  throw ConfigError("unknown illumination '" + std::string(s) + "'");
}

int cfa_color(Cfa cfa, int x, int y) noexcept {
  // Colours of tile sites 0..3 for each pattern.
  static constexpr int kLayout[4][4] = {
      {0, 1, 1, 2},  // RGGB
      {2, 1, 1, 0},  // BGGR
      {1, 0, 2, 1},  // GRBG
      {1, 2, 0, 1},  // GBRG
  };
  return kLayout[static_cast<int>(cfa)][cfa_site(x, y)];
}

void CaptureMeta::validate() const {
  const double max_black = *std::max_element(black_level.begin(), black_level.end());
  if (!(white_level > max_black)) {
    throw ConfigError("white level " + std::to_string(white_level) +
                      " must exceed black level " + std::to_string(max_black));
  }
  if (!(exposure_ms > 0) || !std::isfinite(exposure_ms)) {
    throw ConfigError("exposure_ms must be positive");
  }
  if (!(wb_gains.array() > 0).all() || !wb_gains.allFinite()) {
    throw ConfigError("white-balance gains must be positive");
  }
  if (!ccm.allFinite()) throw ConfigError("colour-correction matrix is not finite");
}

void RawFrame::validate() const {
  meta.validate();
  if (samples.channels() != 1) throw DataError("raw frame must be single-channel");
  if (samples.size() > 0 && samples.array().maxCoeff() > meta.white_level) {
    throw DataError("raw sample exceeds white level " + std::to_string(meta.white_level));
  }
}

LinearImage linearize(const RawFrame& frame, const LinearizeOptions& opts) {
  frame.meta.validate();
  const auto& m = frame.meta;
  std::array<float, 4> black{};
  std::array<float, 4> inv_range{};
  for (int s = 0; s < 4; ++s) {
    black[s] = static_cast<float>(m.black_level[s]);
    inv_range[s] = static_cast<float>(1.0 / (m.white_level - m.black_level[s]));
  }
  LinearImage out(frame.width(), frame.height(), 1);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      const int s = cfa_site(x, y);
      float v = (static_cast<float>(frame(x, y)) - black[s]) * inv_range[s];
      if (!opts.signed_mode) v = std::clamp(v, 0.0f, 1.0f);
      out(x, y) = v;
    }
  }
  return out;
}

DelinearizeResult delinearize(const LinearImage& img, Cfa cfa, const CaptureMeta& meta) {
  meta.validate();
  if (img.channels() != 1) throw DataError("delinearize expects a single-channel mosaic");
  DelinearizeResult result{RawFrame(img.width(), img.height(), cfa, meta), 0};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      float v = img(x, y);
      if (!(v >= 0.0f && v <= 1.0f)) {
        ++result.clamped;
        v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
      }
      const double black = meta.black_level[cfa_site(x, y)];
      const double s = std::round(black + static_cast<double>(v) * (meta.white_level - black));
      result.frame(x, y) = static_cast<std::uint16_t>(std::clamp(s, 0.0, 65535.0));
    }
  }
  return result;
}

Mask saturation_mask(const RawFrame& a, const RawFrame& b, double margin) {
  require_same_extent(a.samples, b.samples, "saturation_mask");
  if (!(margin >= 0 && margin < 1)) throw ConfigError("saturation margin must be in [0,1)");
  const double ta = (1.0 - margin) * a.meta.white_level;
  const double tb = (1.0 - margin) * b.meta.white_level;
  Mask out(a.width(), a.height(), 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.array()[i] = (a.samples.array()[i] >= ta || b.samples.array()[i] >= tb) ? 1 : 0;
  }
  return out;
}

}  // namespace flashcue
