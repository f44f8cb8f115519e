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

#include <json.hpp>

#include <cstdint>
#include <optional>

#include "flashcue/geometry/depth.hpp"
#include "flashcue/geometry/flow.hpp"
#include "flashcue/geometry/homography.hpp"
#include "flashcue/image.hpp"
#include "flashcue/random.hpp"

namespace flashcue {

enum class MisalignMode { none, homography, depth };

std::string_view to_string(MisalignMode m);
MisalignMode parse_misalign_mode(std::string_view s);

struct MotionBounds {
  /// Per-axis bound on translation, millimetres.
  double max_translation_mm = 5;
  /// Per-axis bound on rotation, degrees.
  double max_rotation_deg = 1;
};

struct SynthRecipe {
  double transmittance = 0.61;
  double reflectance = 0.22;
  double crop_scale = 0.8;
  int size_multiple = 32;
  MisalignMode misalign_mode = MisalignMode::none;
  /// Per-coordinate bound on the corner perturbation, pixels.
  double homography_max_disp = 8;
  MotionBounds motion_bounds;
  /// Focal length for depth reprojection; max(width, height) when unset.
  std::optional<double> focal_px;
  double depth_units_per_mm = 1e-3;
  /// Halve RGB sources (bilinear, in linear space) before composition.
  bool resize_half = false;
  /// Samples with more clamped pixels than this fraction are flagged.
  double clamp_flag_fraction = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthRecipe& r);
SynthRecipe recipe_from_json(const nlohmann::json& j, SynthRecipe base = {});

struct CropWindow {
  int x = 0, y = 0, width = 0, height = 0;
};

/// One synthetic sample. `transmission` is the ground truth built as
/// I_a - R_a, so it is exactly consistent with the stored ambient and
/// reflection layers.
struct SynthSample {
  LinearImage ambient;
  LinearImage flash;
  /// Flash-only layer aligned with the ambient image.
  LinearImage flash_only;
  LinearImage transmission;
  LinearImage reflection;
  /// Ground-truth flows from the ambient to the flash view (present iff misaligned).
  std::optional<FlowField> flow_t;
  std::optional<FlowField> flow_r;
  Mask validity;

  CropWindow crop;
  std::optional<Homography> h_t;
  std::optional<Homography> h_r;
  std::optional<CameraMotion> motion;
  Eigen::Index clamped_pixels = 0;
  double clamp_fraction = 0;
  bool flagged = false;
  std::uint64_t seed = 0;
  SynthRecipe recipe;
};

/// Half-size bilinear decimation (2x2 mean), computed on linear values.
LinearImage resize_half(const LinearImage& img);

/// Gamma-decodes a display-referred source and optionally halves it.
LinearImage prepare_source(const RgbImage& img, bool resize_half_size);

/// Aligned composition. T_a = t T, R_a = r R, I_a = T_a + R_a,
/// I_f = I_a + t F, with one crop window for all layers.
SynthSample compose_aligned(const LinearImage& t_src, const LinearImage& r_src,
                            const LinearImage& f_src, const SynthRecipe& recipe, std::uint64_t seed);

/// Independent random homographies for the transmission and reflection
/// layers; the flash side is warped, the ambient composition stays put.
SynthSample synth_misaligned_homography(const LinearImage& t_src, const LinearImage& r_src,
                                        const LinearImage& f_src, const SynthRecipe& recipe,
                                        std::uint64_t seed);

/// One random camera motion rendered through per-layer depth maps.
SynthSample synth_misaligned_depth(const LinearImage& t_src, const LinearImage& r_src,
                                   const LinearImage& f_src, const DepthMap& depth_t,
                                   const DepthMap& depth_r, const SynthRecipe& recipe,
                                   std::uint64_t seed);

/// Random homography moving each image corner by at most `max_disp` per coordinate.
Homography random_corner_homography(int width, int height, double max_disp, Rng& rng);

/// Uniform motion within the bounds, per axis.
CameraMotion random_motion(const MotionBounds& bounds, Rng& rng);

/// Smooth textured scene in [0.05, 0.95], deterministic in seed.
LinearImage procedural_scene(int width, int height, std::uint64_t seed, int channels = 3);
/// Smooth positive depth in [near, far].
DepthMap procedural_depth(int width, int height, std::uint64_t seed, double near = 0.8, double far = 3.0);

}  // namespace flashcue
