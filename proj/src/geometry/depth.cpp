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

#include "flashcue/geometry/depth.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace flashcue {

Eigen::Matrix3d CameraMotion::rotation() const {
  const Eigen::Vector3d r = rotation_deg * (std::numbers::pi / 180.0);
  return (Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

void CameraMotion::validate() const {
  if (!rotation_deg.allFinite() || !translation_mm.allFinite()) {
    throw ConfigError("camera motion must be finite");
  }
  if (rotation_deg.norm() > 5.0) throw ConfigError("camera rotation exceeds 5 degrees");
}

void validate_depth(const DepthMap& depth) {
  if (depth.channels() != 1) throw DataError("depth map must be single-channel");
  if (!all_finite(depth) || (depth.array() <= 0.0f).any()) {
    throw DataError("depth map must be finite and strictly positive");
  }
}

DepthFlow depth_reproject_flow(const DepthMap& depth, const CameraMotion& motion,
                               const Intrinsics& k, const DepthFlowOptions& opts) {
  validate_depth(depth);
  motion.validate();
  if (!(k.focal_px > 0)) throw ConfigError("focal length must be positive");
  const int w = depth.width();
  const int h = depth.height();
  DepthFlow out{FlowField(w, h), full_mask(w, h, true)};
  if (motion.is_zero()) return out;
  const Eigen::Matrix3d r = motion.rotation();
  const Eigen::Vector3d t = motion.translation_mm * opts.depth_units_per_mm;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = depth(x, y);
      const Eigen::Vector3d p(d * (x - k.cx) / k.focal_px, d * (y - k.cy) / k.focal_px, d);
      const Eigen::Vector3d q = r * p + t;
      if (q.z() <= 0) {
        out.valid(x, y) = 0;
        continue;
      }
      out.flow.u(x, y) = static_cast<float>(k.focal_px * q.x() / q.z() + k.cx - x);
      out.flow.v(x, y) = static_cast<float>(k.focal_px * q.y() / q.z() + k.cy - y);
    }
  }
  return out;
}

}  // namespace flashcue
