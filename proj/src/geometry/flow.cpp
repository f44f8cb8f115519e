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

#include "flashcue/geometry/flow.hpp"

#include <algorithm>
#include <cmath>

#include "flashcue/io.hpp"

namespace flashcue {

FlowField::FlowField(ImageF uv) : uv_(std::move(uv)) {
  if (uv_.channels() != 2) throw DataError("flow field must have 2 channels");
  if (!all_finite(uv_)) throw DataError("flow field contains non-finite values");
}

Eigen::Vector2d FlowField::sample(double x, double y) const noexcept {
  return {bilinear_sample(uv_, x, y, 0), bilinear_sample(uv_, x, y, 1)};
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  io::write_lfr(path, flow.image());
}

FlowField read_flow(const std::filesystem::path& path) { return FlowField(io::read_lfr(path)); }

FlowField homography_to_flow(const Homography& h, int width, int height) {
  FlowField flow(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector2d p(x, y);
      const Eigen::Vector2d d = h.apply(p) - p;
      flow.u(x, y) = static_cast<float>(d.x());
      flow.v(x, y) = static_cast<float>(d.y());
    }
  }
  if (!all_finite(flow.image())) throw DataError("homography maps pixels to infinity");
  return flow;
}

float bilinear_sample(const ImageF& img, double x, double y, int c) noexcept {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const float fx = static_cast<float>(x - x0);
  const float fy = static_cast<float>(y - y0);
  // a + t (b - a) reproduces a exactly for t = 0 and for a == b, so integer
  // positions and constant images are preserved bit-for-bit.
  auto lerp = [](float a, float b, float t) { return a + t * (b - a); };
  const float top = lerp(img(x0, y0, c), img(x1, y0, c), fx);
  if (fy == 0.0f) return top;
  const float bottom = lerp(img(x0, y1, c), img(x1, y1, c), fx);
  return lerp(top, bottom, fy);
}

WarpResult warp_by_flow(const ImageF& src, const FlowField& flow, Boundary boundary) {
  if (src.empty()) throw DataError("warp_by_flow: empty source");
  const int w = flow.width();
  const int h = flow.height();
  WarpResult r{ImageF(w, h, src.channels()), full_mask(w, h, true)};
  const double max_x = src.width() - 1;
  const double max_y = src.height() - 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + static_cast<double>(flow.u(x, y));
      const double sy = y + static_cast<double>(flow.v(x, y));
      const bool inside = sx >= 0 && sy >= 0 && sx <= max_x && sy <= max_y;
      if (!inside && boundary == Boundary::zero) {
        r.valid(x, y) = 0;
        continue;  // output already zero
      }
      for (int c = 0; c < src.channels(); ++c) r.image(x, y, c) = bilinear_sample(src, sx, sy, c);
    }
  }
  return r;
}

FlowField compose_flows(const FlowField& first, const FlowField& second) {
  FlowField out(first.width(), first.height());
  for (int y = 0; y < first.height(); ++y) {
    for (int x = 0; x < first.width(); ++x) {
      const Eigen::Vector2d d1 = first.at(x, y);
      const Eigen::Vector2d d2 = second.sample(x + d1.x(), y + d1.y());
      out.u(x, y) = static_cast<float>(d1.x() + d2.x());
      out.v(x, y) = static_cast<float>(d1.y() + d2.y());
    }
  }
  return out;
}

FlowField invert_flow(const FlowField& flow, int iterations) {
  FlowField g(flow.width(), flow.height());
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      Eigen::Vector2d d = -flow.at(x, y);
      for (int it = 0; it < iterations; ++it) {
        const Eigen::Vector2d next = -flow.sample(x + d.x(), y + d.y());
        if (next == d) break;
        d = next;
      }
      g.u(x, y) = static_cast<float>(d.x());
      g.v(x, y) = static_cast<float>(d.y());
    }
  }
  return g;
}

EndpointError endpoint_error(const FlowField& a, const FlowField& b, const Mask* valid) {
  require_same_extent(a.image(), b.image(), "endpoint_error");
  if (valid) require_same_extent(a.image(), *valid, "endpoint_error mask");
  EndpointError e;
  double sum = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (valid && !(*valid)(x, y)) continue;
      const double d = (a.at(x, y) - b.at(x, y)).norm();
      sum += d;
      e.max = std::max(e.max, d);
      ++e.count;
    }
  }
  e.mean = e.count ? sum / static_cast<double>(e.count) : 0;
  return e;
}

}  // namespace flashcue
