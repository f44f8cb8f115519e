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

#include "flashcue/metrics.hpp"

#include <cmath>
#include <vector>

#include "flashcue/isp.hpp"

namespace flashcue {

double mean_squared_error(const ImageF& pred, const ImageF& target, const Mask* mask) {
  require_same_shape(pred, target, "mean_squared_error");
  if (mask) require_same_extent(pred, *mask, "mean_squared_error mask");
  const int ch = pred.channels();
  double sum = 0;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < pred.pixel_count(); ++i) {
    if (mask && !mask->array()[i]) continue;
    for (int c = 0; c < ch; ++c) {
      const double d = static_cast<double>(pred.array()[i * ch + c]) - target.array()[i * ch + c];
      sum += d * d;
    }
    n += ch;
  }
  if (n == 0) throw DataError("mean_squared_error: no valid pixels");
  return sum / static_cast<double>(n);
}

PsnrResult psnr(const ImageF& pred, const ImageF& target, double max_value, const Mask* mask) {
  if (!(max_value > 0)) throw ConfigError("psnr: max_value must be positive");
  PsnrResult r;
  r.mse = mean_squared_error(pred, target, mask);
  if (r.mse == 0) {
    r.exact = true;
    r.db = kExactPsnrDb;
  } else {
    r.db = 10.0 * std::log10(max_value * max_value / r.mse);
  }
  return r;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || !(sigma > 0)) throw ConfigError("gaussian kernel needs odd size and sigma > 0");
  std::vector<double> k(static_cast<std::size_t>(size));
  const int half = size / 2;
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double x = i - half;
    k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

double ssim(const ImageF& pred_in, const ImageF& target_in, const SsimOptions& opts, const Mask* mask) {
  require_same_shape(pred_in, target_in, "ssim");
  const ImageF a = to_grayscale(pred_in);
  const ImageF b = to_grayscale(target_in);
  const int w = a.width(), h = a.height(), win = opts.window;
  if (w < win || h < win) throw DataError("ssim: image smaller than the window");
  if (mask) require_same_extent(a, *mask, "ssim mask");
  const std::vector<double> k = gaussian_kernel(win, opts.sigma);
  const int ow = w - win + 1, oh = h - win + 1;

  // Horizontal pass for the five moments, then vertical.
  constexpr int kMoments = 5;
  std::vector<double> horiz(static_cast<std::size_t>(kMoments) * ow * h, 0.0);
  auto hidx = [&](int m, int x, int y) { return (static_cast<std::size_t>(m) * h + y) * ow + x; };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s[kMoments] = {0, 0, 0, 0, 0};
      for (int i = 0; i < win; ++i) {
        const double wa = a(x + i, y), wb = b(x + i, y), kw = k[static_cast<std::size_t>(i)];
        s[0] += kw * wa;
        s[1] += kw * wb;
        s[2] += kw * wa * wa;
        s[3] += kw * wb * wb;
        s[4] += kw * wa * wb;
      }
      for (int m = 0; m < kMoments; ++m) horiz[hidx(m, x, y)] = s[m];
    }
  }

  // Invalid-pixel integral image for the window mask test.
  std::vector<long> invalid;
  if (mask) {
    invalid.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        invalid[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
            (mask->operator()(x, y) ? 0 : 1) + invalid[static_cast<std::size_t>(y) * (w + 1) + x + 1] +
            invalid[static_cast<std::size_t>(y + 1) * (w + 1) + x] - invalid[static_cast<std::size_t>(y) * (w + 1) + x];
      }
  }
  auto window_valid = [&](int x, int y) {
    if (!mask) return true;
    auto at = [&](int xx, int yy) { return invalid[static_cast<std::size_t>(yy) * (w + 1) + xx]; };
    return at(x + win, y + win) - at(x, y + win) - at(x + win, y) + at(x, y) == 0;
  };

  const double c1 = std::pow(opts.k1 * opts.dynamic_range, 2);
  const double c2 = std::pow(opts.k2 * opts.dynamic_range, 2);
  double total = 0;
  long count = 0;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      if (!window_valid(x, y)) continue;
      double s[kMoments] = {0, 0, 0, 0, 0};
      for (int j = 0; j < win; ++j) {
        const double kw = k[static_cast<std::size_t>(j)];
        for (int m = 0; m < kMoments; ++m) s[m] += kw * horiz[hidx(m, x, y + j)];
      }
      const double mu_a = s[0], mu_b = s[1];
      const double var_a = s[2] - mu_a * mu_a;
      const double var_b = s[3] - mu_b * mu_b;
      const double cov = s[4] - mu_a * mu_b;
      total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  if (count == 0) throw DataError("ssim: no fully valid window");
  return total / static_cast<double>(count);
}

}  // namespace flashcue
