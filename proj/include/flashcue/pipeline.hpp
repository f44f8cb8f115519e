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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flashcue/estimator.hpp"
#include "flashcue/flash_only.hpp"
#include "flashcue/geometry/correspondences.hpp"
#include "flashcue/geometry/flow.hpp"
#include "flashcue/geometry/homography.hpp"
#include "flashcue/image.hpp"
#include "flashcue/raw.hpp"

namespace flashcue {

enum class AlignMethod { identity, homography, external_flow };

AlignMethod parse_align_method(std::string_view s);
std::string_view to_string(AlignMethod m);

struct AlignSpec {
  AlignMethod method = AlignMethod::identity;
  /// Ambient -> flash flow for external_flow (takes precedence over the estimator).
  std::optional<FlowField> flow;
  /// Flow-role estimator fed {ambient, flash} for external_flow.
  std::optional<Estimator> flow_estimator;
  MatchOptions matching;
  RansacOptions ransac{1.5, 1000, 0, 1};
};

struct AlignResult {
  ImageF warped_flash;
  /// Flow actually applied (ambient -> flash).
  FlowField flow;
  Mask valid;
  std::optional<Homography> homography;
};

/// Warps the flash image onto the ambient image along the transmission-layer
/// flow: warped(p) = flash(p + flow(p)).
AlignResult align_preprocess(const ImageF& ambient, const ImageF& flash, const AlignSpec& spec);

/// Colour space the estimators see.
enum class EstimatorSpace { srgb, linear };

/// Raw Bayer pair; the ambient metadata drives the ISP for both frames.
struct RawPair {
  RawFrame ambient;
  RawFrame flash;
};

/// Linear RGB pair with exposure times.
struct LinearPair {
  LinearImage ambient;
  LinearImage flash;
  double ambient_ms = 1;
  double flash_ms = 1;
};

using PipelineInput = std::variant<RawPair, LinearPair>;

struct PipelineOptions {
  EstimatorSpace space = EstimatorSpace::srgb;
  FlashOnlyOptions flash_only;
  AlignSpec align;
};

struct StageRecord {
  std::string stage;
  /// Estimator name, empty for built-in processing stages.
  std::string estimator;
  std::optional<EstimatorRole> role;
  /// Channels actually supplied to the estimator.
  std::vector<Channel> inputs;
  double millis = 0;
};

struct StageTrace {
  std::vector<StageRecord> stages;

  const StageRecord* find(std::string_view stage) const;
  bool has(std::string_view stage) const { return find(stage) != nullptr; }
};

/// Stage list; timings go under "meta" so the rest is reproducible.
nlohmann::json to_json(const StageTrace& trace);

struct PipelineResult {
  ImageF t_hat;
  ImageF r_hat;
  /// Estimator-space ambient and flash-only images.
  ImageF ambient;
  ImageF flash_only_rgb;
  ImageF flash_only_gray;
  /// Linear flash-only before the ISP (a mosaic when subtraction ran in raw space).
  LinearImage flash_only;
  /// Linear RGB flash image after alignment.
  LinearImage aligned_flash;
  FlowField flow;
  Mask valid;
  Mask saturated;
  Eigen::Index clamped = 0;
  StageTrace trace;
  EstimatorSpace space = EstimatorSpace::srgb;
};

/// g_R must declare exactly {ambient, flash_only_gray}; g_T exactly
/// {ambient, reflection_estimate}. Throws ContractViolation naming the channel.
void validate_two_stage(const Estimator& g_r, const Estimator& g_t);

/// Alignment, exposure-compensated flash-only, grayscale, then
/// R = g_R(I_a, I_fo^g) and T = g_T(I_a, R).
PipelineResult run_two_stage(const PipelineInput& input, const Estimator& g_r, const Estimator& g_t,
                             const PipelineOptions& opts = {});

enum class BaseVariant { flash_only_input, flash_input, linear_space };

BaseVariant parse_base_variant(std::string_view s);

void validate_base(const Estimator& g_b, BaseVariant variant);

/// Single-stage T = g_B(I_a, X) with X the flash-only image, the flash
/// image, or (linear_space) the linear-ISP flash image with a linear ambient.
PipelineResult run_base(const PipelineInput& input, const Estimator& g_b, BaseVariant variant,
                        const PipelineOptions& opts = {});

/// Mean squared error over valid pixels.
double l2_loss(const ImageF& pred, const ImageF& target, const Mask* valid = nullptr);

}  // namespace flashcue
