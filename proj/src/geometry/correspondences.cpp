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

#include "flashcue/geometry/correspondences.hpp"

#include <cmath>
#include <optional>

#include "flashcue/isp.hpp"
#include "flashcue/parallel.hpp"

namespace flashcue {

namespace {

struct Template {
  std::vector<double> centered;
  double norm = 0;
};

Template make_template(const ImageF& img, int cx, int cy, int half) {
  Template t;
  t.centered.reserve(static_cast<std::size_t>((2 * half + 1) * (2 * half + 1)));
  double mean = 0;
  for (int y = cy - half; y <= cy + half; ++y)
    for (int x = cx - half; x <= cx + half; ++x) {
      t.centered.push_back(img(x, y));
      mean += img(x, y);
    }
  mean /= static_cast<double>(t.centered.size());
  for (auto& v : t.centered) {
    v -= mean;
    t.norm += v * v;
  }
  t.norm = std::sqrt(t.norm);
  return t;
}

double ncc(const Template& t, const ImageF& img, int cx, int cy, int half) {
  double mean = 0;
  for (int y = cy - half; y <= cy + half; ++y)
    for (int x = cx - half; x <= cx + half; ++x) mean += img(x, y);
  mean /= static_cast<double>(t.centered.size());
  double dot = 0, sq = 0;
  std::size_t i = 0;
  for (int y = cy - half; y <= cy + half; ++y)
    for (int x = cx - half; x <= cx + half; ++x, ++i) {
      const double s = img(x, y) - mean;
      dot += t.centered[i] * s;
      sq += s * s;
    }
  if (sq <= 0 || t.norm <= 0) return -1;
  return dot / (t.norm * std::sqrt(sq));
}

double parabola_peak(double left, double mid, double right) {
  const double denom = left - 2 * mid + right;
  if (denom >= 0) return 0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

std::vector<Correspondence> find_correspondences(const ImageF& a_in, const ImageF& b_in,
                                                 const MatchOptions& opts) {
  require_same_extent(a_in, b_in, "find_correspondences");
  if (opts.grid_step <= 0 || opts.patch < 3 || opts.patch % 2 == 0 || opts.search_radius < 0) {
    throw ConfigError("matching needs grid_step > 0, odd patch >= 3 and search_radius >= 0");
  }
  const ImageF a = to_grayscale(a_in);
  const ImageF b = to_grayscale(b_in);
  const int half = opts.patch / 2;
  const int r = opts.search_radius;
  const int margin = half + r + 1;
  std::vector<std::pair<int, int>> grid;
  for (int y = margin; y < a.height() - margin; y += opts.grid_step)
    for (int x = margin; x < a.width() - margin; x += opts.grid_step) grid.emplace_back(x, y);

  std::vector<std::optional<Correspondence>> found(grid.size());
  const double min_norm = opts.min_stddev * std::sqrt(static_cast<double>(opts.patch * opts.patch));
  parallel_for(grid.size(), opts.threads, [&](std::size_t g) {
    const auto [px, py] = grid[g];
    const Template t = make_template(a, px, py, half);
    if (t.norm < min_norm) return;
    const int side = 2 * r + 1;
    std::vector<double> scores(static_cast<std::size_t>(side * side), -1);
    int best_dx = 0, best_dy = 0;
    double best = -2;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const double s = ncc(t, b, px + dx, py + dy, half);
        scores[static_cast<std::size_t>((dy + r) * side + dx + r)] = s;
        if (s > best) {
          best = s;
          best_dx = dx;
          best_dy = dy;
        }
      }
    if (best < opts.min_score) return;
    auto at = [&](int dx, int dy) { return scores[static_cast<std::size_t>((dy + r) * side + dx + r)]; };
    double sx = best_dx, sy = best_dy;
    // A perfect correlation is already the peak; refinement would only add bias.
    if (opts.subpixel && best < 1.0 - 1e-12) {
      if (best_dx > -r && best_dx < r) sx += parabola_peak(at(best_dx - 1, best_dy), best, at(best_dx + 1, best_dy));
      if (best_dy > -r && best_dy < r) sy += parabola_peak(at(best_dx, best_dy - 1), best, at(best_dx, best_dy + 1));
    }
    found[g] = Correspondence{{px, py}, {px + sx, py + sy}, best};
  });
  std::vector<Correspondence> out;
  for (auto& f : found)
    if (f) out.push_back(*f);
  return out;
}

}  // namespace flashcue
