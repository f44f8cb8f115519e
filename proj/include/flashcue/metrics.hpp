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

#include <vector>

#include "flashcue/image.hpp"

namespace flashcue {

/// Reported in place of +inf when the error is exactly zero.
inline constexpr double kExactPsnrDb = 99.0;

struct PsnrResult {
  double db = 0;
  /// MSE was exactly zero; `db` holds kExactPsnrDb.
  bool exact = false;
  double mse = 0;
};

/// Mean squared error over every channel of the pixels set in `mask`.
double mean_squared_error(const ImageF& pred, const ImageF& target, const Mask* mask = nullptr);

/// 10 log10(max^2 / MSE).
PsnrResult psnr(const ImageF& pred, const ImageF& target, double max_value = 1.0,
                const Mask* mask = nullptr);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Normalized 1-D Gaussian taps.
std::vector<double> gaussian_kernel(int size, double sigma);

/// Mean SSIM over every window that fits inside the image (and lies fully
/// inside the mask, if given). RGB inputs are reduced to Rec.709 luma first.
double ssim(const ImageF& pred, const ImageF& target, const SsimOptions& opts = {},
            const Mask* mask = nullptr);

}  // namespace flashcue
