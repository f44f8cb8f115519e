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

#include "flashcue/geometry/homography.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <limits>

#include "flashcue/error.hpp"
#include "flashcue/parallel.hpp"
#include "flashcue/random.hpp"

namespace flashcue {

Homography::Homography(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw ConfigError("homography is not finite");
  const double scale = m.cwiseAbs().maxCoeff();
  if (std::abs(m(2, 2)) <= 1e-12 * scale || scale == 0) {
    throw ConfigError("homography cannot be normalized (h33 ~ 0)");
  }
  m_ = m / m(2, 2);
  if (std::abs(m_.determinant()) <= 1e-12) throw ConfigError("homography is singular");
}

Homography Homography::translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography(m);
}

nlohmann::json to_json(const Homography& h) {
  nlohmann::json j = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(h.matrix()(r, c));
  return j;
}

Homography homography_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) throw ConfigError("homography JSON must be an array of 9 numbers");
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = j[i].get<double>();
  return Homography(m);
}

bool collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  const double cross = u.x() * v.y() - u.y() * v.x();
  const double spread = std::max({u.squaredNorm(), v.squaredNorm(), (c - b).squaredNorm()});
  return spread == 0 || std::abs(cross) <= 1e-9 * spread;
}

namespace {

/// Similarity taking points to zero centroid and mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const Correspondence> pairs, bool use_src) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& c : pairs) mean += use_src ? c.src : c.dst;
  mean /= static_cast<double>(pairs.size());
  double dist = 0;
  for (const auto& c : pairs) dist += ((use_src ? c.src : c.dst) - mean).norm();
  dist /= static_cast<double>(pairs.size());
  if (dist <= 0) throw DataError("homography: all points coincide");
  const double s = std::sqrt(2.0) / dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

bool minimal_sample_degenerate(std::span<const Correspondence> s) {
  for (int i = 0; i < 4; ++i) {
    const int a = (i + 1) % 4, b = (i + 2) % 4, c = (i + 3) % 4;
    if (collinear(s[a].src, s[b].src, s[c].src) || collinear(s[a].dst, s[b].dst, s[c].dst)) return true;
  }
  return false;
}

struct Candidate {
  bool valid = false;
  std::size_t inliers = 0;
  double total_error = std::numeric_limits<double>::infinity();
  Homography h;
};

std::vector<bool> consensus(const Homography& h, std::span<const Correspondence> pairs, double thr,
                            std::size_t& count, double& total) {
  std::vector<bool> in(pairs.size(), false);
  count = 0;
  total = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double e = transfer_error(h, pairs[i]);
    if (e < thr) {
      in[i] = true;
      ++count;
      total += e;
    }
  }
  return in;
}

}  // namespace

Homography fit_homography_dlt(std::span<const Correspondence> pairs) {
  if (pairs.size() < 4) {
    throw DataError("homography needs at least 4 correspondences, got " + std::to_string(pairs.size()));
  }
  if (pairs.size() == 4 && minimal_sample_degenerate(pairs)) {
    throw DataError("homography: degenerate configuration (three collinear points)");
  }
  const Eigen::Matrix3d ts = normalizing_transform(pairs, true);
  const Eigen::Matrix3d td = normalizing_transform(pairs, false);
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = ts * pairs[i].src.homogeneous();
    const Eigen::Vector3d q = td * pairs[i].dst.homogeneous();
    const double x = p.x() / p.z(), y = p.y() / p.z();
    const double u = q.x() / q.z(), v = q.y() / q.z();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0 || sv(7) / sv(0) < 1e-10) {
    throw DataError("homography: degenerate configuration (rank-deficient system)");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(td.inverse() * hn * ts);
}

HomographyFit estimate_homography(std::span<const Correspondence> pairs, HomographyMethod method,
                                  const RansacOptions& opts) {
  HomographyFit fit;
  if (method == HomographyMethod::dlt) {
    fit.homography = fit_homography_dlt(pairs);
    fit.inliers.assign(pairs.size(), true);
    fit.inlier_count = pairs.size();
  } else {
    if (pairs.size() < 4) {
      throw DataError("homography needs at least 4 correspondences, got " + std::to_string(pairs.size()));
    }
    if (opts.iterations <= 0 || !(opts.inlier_threshold_px > 0)) {
      throw ConfigError("RANSAC needs positive iterations and inlier threshold");
    }
    std::vector<Candidate> cands(static_cast<std::size_t>(opts.iterations));
    parallel_for(cands.size(), opts.threads, [&](std::size_t it) {
      Rng rng(derive_seed(opts.seed, it));
      std::array<std::size_t, 4> idx{};
      for (int k = 0; k < 4; ++k) {
        bool fresh = false;
        while (!fresh) {
          idx[k] = rng.index(pairs.size());
          fresh = true;
          for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
        }
      }
      std::array<Correspondence, 4> sample{pairs[idx[0]], pairs[idx[1]], pairs[idx[2]], pairs[idx[3]]};
      if (minimal_sample_degenerate(sample)) return;
      Candidate c;
      try {
        c.h = fit_homography_dlt(sample);
      } catch (const Error&) {
        return;
      }
      consensus(c.h, pairs, opts.inlier_threshold_px, c.inliers, c.total_error);
      c.valid = true;
      cands[it] = c;
    });
    const Candidate* best = nullptr;
    for (const auto& c : cands) {
      if (!c.valid) continue;
      if (!best || c.inliers > best->inliers ||
          (c.inliers == best->inliers && c.total_error < best->total_error)) {
        best = &c;
      }
    }
    if (!best || best->inliers < 4) throw DataError("RANSAC found no consensus of at least 4 pairs");

    Homography h = best->h;
    std::size_t count = 0;
    double total = 0;
    std::vector<bool> in = consensus(h, pairs, opts.inlier_threshold_px, count, total);
    for (int round = 0; round < 3; ++round) {
      std::vector<Correspondence> subset;
      for (std::size_t i = 0; i < pairs.size(); ++i)
        if (in[i]) subset.push_back(pairs[i]);
      Homography refit;
      try {
        refit = fit_homography_dlt(subset);
      } catch (const Error&) {
        break;
      }
      std::size_t rc = 0;
      double rt = 0;
      auto rin = consensus(refit, pairs, opts.inlier_threshold_px, rc, rt);
      if (rc < count) break;
      const bool same = rin == in;
      h = refit;
      in = std::move(rin);
      count = rc;
      if (same) break;
    }
    fit.homography = h;
    fit.inliers = std::move(in);
    fit.inlier_count = count;
  }
  double sq = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (fit.inliers[i]) sq += std::pow(transfer_error(fit.homography, pairs[i]), 2);
  }
  fit.rms_error = fit.inlier_count ? std::sqrt(sq / static_cast<double>(fit.inlier_count)) : 0;
  return fit;
}

Homography homography_from_corners(const std::array<Eigen::Vector2d, 4>& src,
                                   const std::array<Eigen::Vector2d, 4>& dst) {
  std::array<Correspondence, 4> pairs;
  for (int i = 0; i < 4; ++i) pairs[i] = {src[i], dst[i], 1};
  return fit_homography_dlt(pairs);
}

}  // namespace flashcue
