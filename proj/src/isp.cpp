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

#include "flashcue/isp.hpp"

#include <algorithm>
#include <cmath>

namespace flashcue {

namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

}  // namespace

IspConfig IspConfig::from_meta(const CaptureMeta& meta, StageSet stages) {
  IspConfig cfg;
  cfg.wb_gains = meta.wb_gains;
  cfg.ccm = meta.ccm;
  cfg.stage_set = stages;
  return cfg;
}

Eigen::Matrix3d IspConfig::effective_ccm() const {
  if (!normalize_ccm) return ccm;
  Eigen::Matrix3d m = ccm;
  for (int r = 0; r < 3; ++r) {
    const double s = m.row(r).sum();
    if (std::abs(s) < 1e-12) throw ConfigError("CCM row sums to zero; cannot normalize");
    m.row(r) /= s;
  }
  return m;
}

void IspConfig::validate() const {
  if (!(wb_gains.array() > 0).all() || !wb_gains.allFinite()) {
    throw ConfigError("white-balance gains must be positive");
  }
  if (!ccm.allFinite()) throw ConfigError("CCM must be finite");
  if (normalize_ccm) {
    const Eigen::Vector3d sums = effective_ccm().rowwise().sum();
    if (((sums.array() - 1.0).abs() > 1e-3).any()) throw ConfigError("normalized CCM rows do not sum to 1");
  }
}

StageSet parse_stage_set(std::string_view s) {
  if (s == "full") return StageSet::full;
  if (s == "linear" || s == "linear_only") return StageSet::linear_only;
  throw ConfigError("unknown stage set '" + std::string(s) + "'");
}

nlohmann::json to_json(const IspConfig& cfg) {
  std::vector<double> ccm;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) ccm.push_back(cfg.ccm(r, c));
  return {{"wb_gains", {cfg.wb_gains[0], cfg.wb_gains[1], cfg.wb_gains[2]}},
          {"ccm", ccm},
          {"gamma", cfg.gamma == Gamma::srgb ? "srgb" : "none"},
          {"stage_set", cfg.stage_set == StageSet::full ? "full" : "linear_only"},
          {"normalize_ccm", cfg.normalize_ccm}};
}

IspConfig isp_config_from_json(const nlohmann::json& j, IspConfig cfg) {
  try {
    if (j.contains("wb_gains")) {
      const auto& g = j.at("wb_gains");
      if (g.size() != 3) throw ConfigError("wb_gains must have 3 entries");
      for (int c = 0; c < 3; ++c) cfg.wb_gains[c] = g[c].get<double>();
    }
    if (j.contains("ccm")) {
      const auto& m = j.at("ccm");
      if (m.size() != 9) throw ConfigError("ccm must have 9 entries");
      for (int i = 0; i < 9; ++i) cfg.ccm(i / 3, i % 3) = m[i].get<double>();
    }
    if (j.contains("gamma")) {
      const auto g = j.at("gamma").get<std::string>();
      if (g == "srgb") cfg.gamma = Gamma::srgb;
      else if (g == "none") cfg.gamma = Gamma::none;
      else throw ConfigError("unknown gamma '" + g + "'");
    }
    if (j.contains("stage_set")) cfg.stage_set = parse_stage_set(j.at("stage_set").get<std::string>());
    cfg.normalize_ccm = j.value("normalize_ccm", cfg.normalize_ccm);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ISP config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

LinearImage demosaic_bilinear(const LinearImage& mosaic, Cfa cfa) {
  if (mosaic.channels() != 1) throw DataError("demosaic expects a single-channel mosaic");
  const int w = mosaic.width();
  const int h = mosaic.height();
  if (w % 2 != 0 || h % 2 != 0) throw DataError("demosaic requires even width and height");
  LinearImage out(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int own = cfa_color(cfa, x, y);
      float sum[3] = {0, 0, 0};
      int count[3] = {0, 0, 0};
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          // Parity of mirrored coordinates equals parity of (x+dx, y+dy).
          const int c = cfa_color(cfa, x + dx + 2, y + dy + 2);
          if (c == own) continue;
          sum[c] += mosaic(mirror(x + dx, w), mirror(y + dy, h));
          ++count[c];
        }
      }
      for (int c = 0; c < 3; ++c) {
        out(x, y, c) = c == own ? mosaic(x, y) : sum[c] / static_cast<float>(count[c]);
      }
    }
  }
  return out;
}

LinearImage white_balance(const LinearImage& img, const Eigen::Vector3d& gains) {
  if (img.channels() != 3) throw DataError("white_balance expects 3 channels");
  LinearImage out = img;
  const Eigen::Vector3f g = gains.cast<float>();
  for (Eigen::Index i = 0; i < out.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) out.array()[3 * i + c] *= g[c];
  }
  return out;
}

LinearImage color_correct(const LinearImage& img, const Eigen::Matrix3d& ccm) {
  if (img.channels() != 3) throw DataError("color_correct expects 3 channels");
  LinearImage out(img.width(), img.height(), 3);
  const Eigen::Matrix3f m = ccm.cast<float>();
  Eigen::Map<const Eigen::Matrix<float, 3, Eigen::Dynamic>> in(img.data(), 3, img.pixel_count());
  Eigen::Map<Eigen::Matrix<float, 3, Eigen::Dynamic>> dst(out.data(), 3, out.pixel_count());
  dst.noalias() = m * in;
  return out;
}

float srgb_encode(float linear) noexcept {
  const float x = std::isnan(linear) ? 0.0f : std::clamp(linear, 0.0f, 1.0f);
  if (x <= 0.0031308f) return 12.92f * x;
  return static_cast<float>(1.055 * std::pow(static_cast<double>(x), 1.0 / 2.4) - 0.055);
}

float srgb_decode(float encoded) noexcept {
  const float v = std::isnan(encoded) ? 0.0f : std::clamp(encoded, 0.0f, 1.0f);
  if (v <= 0.04045f) return v / 12.92f;
  return static_cast<float>(std::pow((static_cast<double>(v) + 0.055) / 1.055, 2.4));
}

ImageF gamma_encode_float(const LinearImage& img) {
  ImageF out(img.width(), img.height(), img.channels());
  out.array() = img.array().unaryExpr([](float v) { return srgb_encode(v); });
  return out;
}

LinearImage gamma_decode_float(const ImageF& img) {
  LinearImage out(img.width(), img.height(), img.channels());
  out.array() = img.array().unaryExpr([](float v) { return srgb_decode(v); });
  return out;
}

RgbImage quantize(const ImageF& img, int bits) {
  if (bits != 8 && bits != 16) throw ConfigError("quantize: bits must be 8 or 16");
  const std::uint16_t maxval = bits == 8 ? 255 : 65535;
  RgbImage out{Image<std::uint16_t>(img.width(), img.height(), img.channels()), maxval};
  out.pixels.array() = img.array().unaryExpr([maxval](float v) {
    const float x = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint16_t>(std::lround(static_cast<double>(x) * maxval));
  });
  return out;
}

ImageF dequantize(const RgbImage& img) {
  ImageF out(img.width(), img.height(), img.channels());
  out.array() = img.pixels.array().cast<float>() / static_cast<float>(img.maxval);
  return out;
}

ImageF run_isp_linear_mosaic(const LinearImage& mosaic, Cfa cfa, const IspConfig& cfg) {
  cfg.validate();
  LinearImage rgb = white_balance(demosaic_bilinear(mosaic, cfa), cfg.wb_gains);
  if (cfg.stage_set == StageSet::linear_only) return rgb;
  rgb = color_correct(rgb, cfg.effective_ccm());
  if (cfg.gamma == Gamma::srgb) return gamma_encode_float(rgb);
  rgb.array() = rgb.array().max(0.0f).min(1.0f);
  return rgb;
}

ImageF run_isp(const RawFrame& frame, const IspConfig& cfg, const LinearizeOptions& lin) {
  return run_isp_linear_mosaic(linearize(frame, lin), frame.cfa, cfg);
}

ImageF to_grayscale(const ImageF& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw DataError("to_grayscale expects 1 or 3 channels");
  ImageF out(img.width(), img.height(), 1);
  for (Eigen::Index i = 0; i < out.pixel_count(); ++i) {
    const float* p = img.data() + 3 * i;
    out.array()[i] = kLumaR * p[0] + kLumaG * p[1] + kLumaB * p[2];
  }
  return out;
}

}  // namespace flashcue
