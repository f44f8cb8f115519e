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

#include "flashcue/synth.hpp"

#include <cmath>
#include <numbers>

#include "flashcue/isp.hpp"

namespace flashcue {

std::string_view to_string(MisalignMode m) {
  switch (m) {
    case MisalignMode::none: return "none";
    case MisalignMode::homography: return "homography";
    case MisalignMode::depth: return "depth";
  }
  return "?";
}

MisalignMode parse_misalign_mode(std::string_view s) {
  if (s == "none") return MisalignMode::none;
  if (s == "homography") return MisalignMode::homography;
  if (s == "depth") return MisalignMode::depth;
  throw ConfigError("unknown misalignment mode '" + std::string(s) + "'");
}

void SynthRecipe::validate() const {
  if (!(transmittance > 0 && transmittance <= 1)) throw ConfigError("transmittance must be in (0, 1]");
  if (!(reflectance > 0 && reflectance <= 1)) throw ConfigError("reflectance must be in (0, 1]");
  if (!(crop_scale > 0 && crop_scale <= 1)) throw ConfigError("crop_scale must be in (0, 1]");
  if (size_multiple < 1) throw ConfigError("size_multiple must be >= 1");
  if (!(homography_max_disp >= 0)) throw ConfigError("homography_max_disp must be >= 0");
  if (!(motion_bounds.max_translation_mm >= 0) || !(motion_bounds.max_rotation_deg >= 0)) {
    throw ConfigError("motion bounds must be non-negative");
  }
  if (motion_bounds.max_rotation_deg * std::sqrt(3.0) > 5.0) {
    throw ConfigError("rotation bound would allow more than 5 degrees");
  }
  if (focal_px && !(*focal_px > 0)) throw ConfigError("focal_px must be positive");
  if (!(depth_units_per_mm > 0)) throw ConfigError("depth_units_per_mm must be positive");
}

nlohmann::json to_json(const SynthRecipe& r) {
  nlohmann::json j = {
      {"transmittance", r.transmittance},
      {"reflectance", r.reflectance},
      {"crop_scale", r.crop_scale},
      {"size_multiple", r.size_multiple},
      {"misalign_mode", std::string(to_string(r.misalign_mode))},
      {"homography_max_disp", r.homography_max_disp},
      {"motion_bounds",
       {{"max_translation_mm", r.motion_bounds.max_translation_mm},
        {"max_rotation_deg", r.motion_bounds.max_rotation_deg}}},
      {"depth_units_per_mm", r.depth_units_per_mm},
      {"resize_half", r.resize_half},
      {"clamp_flag_fraction", r.clamp_flag_fraction},
      {"seed", r.seed},
  };
  j["focal_px"] = r.focal_px ? nlohmann::json(*r.focal_px) : nlohmann::json(nullptr);
  return j;
}

SynthRecipe recipe_from_json(const nlohmann::json& j, SynthRecipe r) {
  try {
    r.transmittance = j.value("transmittance", r.transmittance);
    r.reflectance = j.value("reflectance", r.reflectance);
    r.crop_scale = j.value("crop_scale", r.crop_scale);
    r.size_multiple = j.value("size_multiple", r.size_multiple);
    if (j.contains("misalign_mode")) r.misalign_mode = parse_misalign_mode(j.at("misalign_mode").get<std::string>());
    r.homography_max_disp = j.value("homography_max_disp", r.homography_max_disp);
    if (j.contains("motion_bounds")) {
      const auto& m = j.at("motion_bounds");
      r.motion_bounds.max_translation_mm = m.value("max_translation_mm", r.motion_bounds.max_translation_mm);
      r.motion_bounds.max_rotation_deg = m.value("max_rotation_deg", r.motion_bounds.max_rotation_deg);
    }
    if (j.contains("focal_px") && !j.at("focal_px").is_null()) r.focal_px = j.at("focal_px").get<double>();
    r.depth_units_per_mm = j.value("depth_units_per_mm", r.depth_units_per_mm);
    r.resize_half = j.value("resize_half", r.resize_half);
    r.clamp_flag_fraction = j.value("clamp_flag_fraction", r.clamp_flag_fraction);
    r.seed = j.value("seed", r.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("recipe: ") + e.what());
  }
  r.validate();
  return r;
}

LinearImage resize_half(const LinearImage& img) {
  const int w = img.width() / 2;
  const int h = img.height() / 2;
  if (w == 0 || h == 0) throw DataError("image too small to halve");
  LinearImage out(w, h, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) {
        const float s = (img(2 * x, 2 * y, c) + img(2 * x + 1, 2 * y, c)) +
                        (img(2 * x, 2 * y + 1, c) + img(2 * x + 1, 2 * y + 1, c));
        out(x, y, c) = 0.25f * s;
      }
  return out;
}

LinearImage prepare_source(const RgbImage& img, bool resize_half_size) {
  LinearImage lin = gamma_decode(img);
  return resize_half_size ? resize_half(lin) : lin;
}

Homography random_corner_homography(int width, int height, double max_disp, Rng& rng) {
  const double xr = width - 1, yb = height - 1;
  const std::array<Eigen::Vector2d, 4> src{Eigen::Vector2d(0, 0), Eigen::Vector2d(xr, 0),
                                           Eigen::Vector2d(xr, yb), Eigen::Vector2d(0, yb)};
  std::array<Eigen::Vector2d, 4> dst = src;
  for (auto& p : dst) {
    p.x() += rng.uniform(-max_disp, max_disp);
    p.y() += rng.uniform(-max_disp, max_disp);
  }
  if (max_disp == 0) return Homography();
  return homography_from_corners(src, dst);
}

CameraMotion random_motion(const MotionBounds& b, Rng& rng) {
  CameraMotion m;
  for (int i = 0; i < 3; ++i) m.rotation_deg[i] = rng.uniform(-b.max_rotation_deg, b.max_rotation_deg);
  for (int i = 0; i < 3; ++i) m.translation_mm[i] = rng.uniform(-b.max_translation_mm, b.max_translation_mm);
  return m;
}

namespace {

CropWindow sample_crop(int w, int h, const SynthRecipe& r, Rng& rng) {
  auto side = [&](int n) {
    const int scaled = static_cast<int>(std::floor(r.crop_scale * n));
    return scaled / r.size_multiple * r.size_multiple;
  };
  CropWindow c;
  c.width = side(w);
  c.height = side(h);
  if (c.width == 0 || c.height == 0) {
    throw DataError("source " + std::to_string(w) + "x" + std::to_string(h) +
                    " too small for crop scale and size multiple");
  }
  c.x = static_cast<int>(rng.index(static_cast<std::uint64_t>(w - c.width + 1)));
  c.y = static_cast<int>(rng.index(static_cast<std::uint64_t>(h - c.height + 1)));
  return c;
}

/// Builds the scaled, cropped layers and the aligned ambient composition.
/// The ambient image never moves; only the flash side is re-rendered.
struct Layers {
  LinearImage t, r, f;      // t*T, r*R, t*F after cropping
  LinearImage ambient_sum;  // T_a + R_a before clamping
};

Layers make_layers(const LinearImage& t_src, const LinearImage& r_src, const LinearImage& f_src,
                   const SynthRecipe& recipe, const CropWindow& c) {
  Layers l;
  const float kt = static_cast<float>(recipe.transmittance);
  const float kr = static_cast<float>(recipe.reflectance);
  l.t = crop(t_src, c.x, c.y, c.width, c.height);
  l.r = crop(r_src, c.x, c.y, c.width, c.height);
  l.f = crop(f_src, c.x, c.y, c.width, c.height);
  l.t.array() *= kt;
  l.r.array() *= kr;
  l.f.array() *= kt;
  l.ambient_sum = l.t;
  l.ambient_sum.array() += l.r.array();
  return l;
}

Eigen::Index clamp_unit(LinearImage& img, Eigen::Array<bool, Eigen::Dynamic, 1>& pixel_hit) {
  Eigen::Index n = 0;
  const int ch = img.channels();
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    float& v = img.array()[i];
    if (v < 0.0f || v > 1.0f) {
      v = std::clamp(v, 0.0f, 1.0f);
      pixel_hit[i / ch] = true;
      ++n;
    }
  }
  return n;
}

/// Clamps ambient and flash, records overflow and fills the ground truth.
void finish(SynthSample& s, Layers& l, LinearImage flash_sum) {
  Eigen::Array<bool, Eigen::Dynamic, 1> hit = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(l.t.pixel_count(), false);
  s.ambient = std::move(l.ambient_sum);
  clamp_unit(s.ambient, hit);
  s.flash = std::move(flash_sum);
  clamp_unit(s.flash, hit);
  s.reflection = std::move(l.r);
  s.transmission = s.ambient;
  s.transmission.array() -= s.reflection.array();
  s.flash_only = std::move(l.f);
  s.clamped_pixels = hit.count();
  s.clamp_fraction = static_cast<double>(s.clamped_pixels) / static_cast<double>(std::max<Eigen::Index>(1, hit.size()));
  s.flagged = s.clamp_fraction > s.recipe.clamp_flag_fraction;
}

void check_sources(const LinearImage& t, const LinearImage& r, const LinearImage& f) {
  require_same_shape(t, f, "synthesis transmission/flash-only sources");
  require_same_shape(t, r, "synthesis transmission/reflection sources");
}

SynthSample start(const LinearImage& t_src, const LinearImage& r_src, const LinearImage& f_src,
                  const SynthRecipe& recipe, std::uint64_t seed, Rng& rng) {
  recipe.validate();
  check_sources(t_src, r_src, f_src);
  SynthSample s;
  s.recipe = recipe;
  s.seed = seed;
  s.crop = sample_crop(t_src.width(), t_src.height(), recipe, rng);
  return s;
}

LinearImage merge_warped(const WarpResult& t, const WarpResult& r, const WarpResult& f) {
  LinearImage sum = t.image;
  sum.array() += r.image.array();
  sum.array() += f.image.array();
  return sum;
}

}  // namespace

SynthSample compose_aligned(const LinearImage& t_src, const LinearImage& r_src,
                            const LinearImage& f_src, const SynthRecipe& recipe, std::uint64_t seed) {
  Rng rng(seed);
  SynthSample s = start(t_src, r_src, f_src, recipe, seed, rng);
  Layers l = make_layers(t_src, r_src, f_src, recipe, s.crop);
  LinearImage flash_sum = l.ambient_sum;
  flash_sum.array() += l.f.array();
  s.validity = full_mask(s.crop.width, s.crop.height, true);
  finish(s, l, std::move(flash_sum));
  return s;
}

SynthSample synth_misaligned_homography(const LinearImage& t_src, const LinearImage& r_src,
                                        const LinearImage& f_src, const SynthRecipe& recipe,
                                        std::uint64_t seed) {
  Rng rng(seed);
  SynthSample s = start(t_src, r_src, f_src, recipe, seed, rng);
  Layers l = make_layers(t_src, r_src, f_src, recipe, s.crop);
  const int w = s.crop.width, h = s.crop.height;
  s.h_t = random_corner_homography(w, h, recipe.homography_max_disp, rng);
  s.h_r = random_corner_homography(w, h, recipe.homography_max_disp, rng);
  s.flow_t = homography_to_flow(*s.h_t, w, h);
  s.flow_r = homography_to_flow(*s.h_r, w, h);
  // Backward rendering of the flash view needs the flash -> ambient map.
  const FlowField back_t = homography_to_flow(s.h_t->inverse(), w, h);
  const FlowField back_r = homography_to_flow(s.h_r->inverse(), w, h);
  const WarpResult wt = warp_by_flow(l.t, back_t);
  const WarpResult wr = warp_by_flow(l.r, back_r);
  const WarpResult wf = warp_by_flow(l.f, back_t);
  s.validity = mask_and(mask_and(wt.valid, wr.valid), wf.valid);
  finish(s, l, merge_warped(wt, wr, wf));
  return s;
}

SynthSample synth_misaligned_depth(const LinearImage& t_src, const LinearImage& r_src,
                                   const LinearImage& f_src, const DepthMap& depth_t,
                                   const DepthMap& depth_r, const SynthRecipe& recipe,
                                   std::uint64_t seed) {
  validate_depth(depth_t);
  validate_depth(depth_r);
  require_same_extent(t_src, depth_t, "transmission depth");
  require_same_extent(t_src, depth_r, "reflection depth");
  Rng rng(seed);
  SynthSample s = start(t_src, r_src, f_src, recipe, seed, rng);
  Layers l = make_layers(t_src, r_src, f_src, recipe, s.crop);
  const int w = s.crop.width, h = s.crop.height;
  s.motion = random_motion(recipe.motion_bounds, rng);
  Intrinsics k = Intrinsics::default_for(w, h);
  if (recipe.focal_px) k.focal_px = *recipe.focal_px;
  const DepthFlowOptions dopts{recipe.depth_units_per_mm};
  const DepthFlow ft = depth_reproject_flow(crop(depth_t, s.crop.x, s.crop.y, w, h), *s.motion, k, dopts);
  const DepthFlow fr = depth_reproject_flow(crop(depth_r, s.crop.x, s.crop.y, w, h), *s.motion, k, dopts);
  s.flow_t = ft.flow;
  s.flow_r = fr.flow;
  const FlowField back_t = invert_flow(ft.flow);
  const FlowField back_r = invert_flow(fr.flow);
  const WarpResult wt = warp_by_flow(l.t, back_t);
  const WarpResult wr = warp_by_flow(l.r, back_r);
  const WarpResult wf = warp_by_flow(l.f, back_t);
  s.validity = mask_and(mask_and(mask_and(wt.valid, wr.valid), wf.valid), mask_and(ft.valid, fr.valid));
  finish(s, l, merge_warped(wt, wr, wf));
  return s;
}

LinearImage procedural_scene(int width, int height, std::uint64_t seed, int channels) {
  Rng rng(seed);
  LinearImage out(width, height, channels);
  const double scale = std::max(width, height);
  for (int c = 0; c < channels; ++c) {
    struct Wave { double kx, ky, phase, amp; };
    std::vector<Wave> waves;
    for (int k = 0; k < 7; ++k) {
      const double freq = rng.uniform(1.5, 12.0) / scale;
      const double theta = rng.uniform(0, 2 * std::numbers::pi);
      waves.push_back({2 * std::numbers::pi * freq * std::cos(theta),
                       2 * std::numbers::pi * freq * std::sin(theta),
                       rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0.3, 1.0)});
    }
    struct Blob { double x, y, r, amp; };
    std::vector<Blob> blobs;
    for (int k = 0; k < 5; ++k) {
      blobs.push_back({rng.uniform(0, width), rng.uniform(0, height), rng.uniform(0.04, 0.15) * scale,
                       rng.uniform(-1.0, 1.0)});
    }
    double total = 0;
    for (const auto& wv : waves) total += wv.amp;
    for (const auto& b : blobs) total += std::abs(b.amp);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double v = 0;
        for (const auto& wv : waves) v += wv.amp * std::sin(wv.kx * x + wv.ky * y + wv.phase);
        for (const auto& b : blobs) {
          const double d2 = ((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (b.r * b.r);
          v += b.amp * std::exp(-0.5 * d2);
        }
        out(x, y, c) = static_cast<float>(0.5 + 0.45 * v / total);
      }
  }
  return out;
}

DepthMap procedural_depth(int width, int height, std::uint64_t seed, double near, double far) {
  const LinearImage s = procedural_scene(width, height, seed, 1);
  DepthMap d(width, height, 1);
  // Scene values lie in [0.05, 0.95].
  d.array() = (near + (far - near) * ((s.array().cast<double>() - 0.05) / 0.9)).cast<float>();
  return d;
}

}  // namespace flashcue
