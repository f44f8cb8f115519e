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

#include <algorithm>

#include "flashcue/geometry/flow.hpp"
#include "flashcue/image.hpp"

namespace flashcue {

struct Intrinsics {
  double focal_px = 1;
  double cx = 0;
  double cy = 0;

  /// focal = max(width, height), principal point at the image centre.
  static Intrinsics default_for(int width, int height) {
    return {static_cast<double>(std::max(width, height)), (width - 1) / 2.0, (height - 1) / 2.0};
  }
};

/// Rigid camera motion between the ambient and the flash capture.
struct CameraMotion {
  /// Euler angles in degrees, applied as R = Rz * Ry * Rx.
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();

  Eigen::Matrix3d rotation() const;
  bool is_zero() const { return rotation_deg.isZero(0) && translation_mm.isZero(0); }
  /// |rotation| <= 5 degrees and finite translation.
  void validate() const;
};

/// Positive per-pixel depth, single channel.
using DepthMap = ImageF;

void validate_depth(const DepthMap& depth);

struct DepthFlowOptions {
  /// Depth units per millimetre of translation (1e-3 for depth in metres).
  double depth_units_per_mm = 1e-3;
};

struct DepthFlow {
  FlowField flow;
  /// Unset where the moved point falls behind the camera.
  Mask valid;
};

/// Back-projects every pixel with its depth, applies the rigid motion and
/// re-projects: flow = new - old pixel position.
DepthFlow depth_reproject_flow(const DepthMap& depth, const CameraMotion& motion,
                               const Intrinsics& intrinsics, const DepthFlowOptions& opts = {});

}  // namespace flashcue
