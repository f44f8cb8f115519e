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
#include <Eigen/Geometry>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace flashcue {

/// 3x3 projective transform, normalized so h33 = 1.
class Homography {
 public:
  Homography() = default;
  /// Normalizes `m`; throws ConfigError if h33 ~ 0 or the matrix is singular.
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography translation(double tx, double ty);

  const Eigen::Matrix3d& matrix() const noexcept { return m_; }

  /// Projects a pixel position.
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const noexcept {
    const Eigen::Vector3d q = m_ * p.homogeneous();
    return q.hnormalized();
  }

  Homography inverse() const { return Homography(m_.inverse()); }

  /// (a * b).apply(p) == a.apply(b.apply(p)).
  friend Homography operator*(const Homography& a, const Homography& b) {
    return Homography(a.m_ * b.m_);
  }

  bool is_identity(double tol = 0) const { return (m_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol; }

 private:
  Eigen::Matrix3d m_ = Eigen::Matrix3d::Identity();
};

/// 9-element row-major JSON array.
nlohmann::json to_json(const Homography& h);
Homography homography_from_json(const nlohmann::json& j);

struct Correspondence {
  Eigen::Vector2d src;
  Eigen::Vector2d dst;
  double score = 1;
};

inline double transfer_error(const Homography& h, const Correspondence& c) {
  return (h.apply(c.src) - c.dst).norm();
}

/// True when three points are (numerically) collinear relative to their spread.
bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// Normalized (Hartley) DLT, least squares via SVD, mapping src -> dst.
/// Throws DataError for fewer than 4 pairs or a degenerate configuration.
Homography fit_homography_dlt(std::span<const Correspondence> pairs);

enum class HomographyMethod { dlt, ransac_dlt };

struct RansacOptions {
  double inlier_threshold_px = 2.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct HomographyFit {
  Homography homography;
  /// Consensus set (all true for plain DLT).
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  /// RMS transfer error over the consensus set.
  double rms_error = 0;
};

/// RANSAC draws minimal samples from a counter-based stream
/// (derive_seed(seed, iteration)) so the result is independent of thread
/// count. Ties in consensus size go to the lower total transfer error, then
/// to the earlier iteration. The winner is re-fitted on its consensus set.
HomographyFit estimate_homography(std::span<const Correspondence> pairs,
                                  HomographyMethod method = HomographyMethod::dlt,
                                  const RansacOptions& opts = {});

/// Homography taking the four given source points to the destination points.
Homography homography_from_corners(const std::array<Eigen::Vector2d, 4>& src,
                                   const std::array<Eigen::Vector2d, 4>& dst);

}  // namespace flashcue
