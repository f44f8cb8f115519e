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

#include "flashcue/geometry/homography.hpp"
#include "flashcue/image.hpp"

namespace flashcue {

struct MatchOptions {
  int grid_step = 16;
  /// Side of the square template (odd).
  int patch = 11;
  int search_radius = 8;
  /// Matches whose NCC peak falls below this are dropped.
  double min_score = 0.8;
  /// Templates with a standard deviation below this are textureless.
  double min_stddev = 1e-3;
  /// Parabolic refinement of the NCC peak.
  bool subpixel = true;
  unsigned threads = 1;
};

/// Block matching by normalized cross-correlation on a regular grid of `a`.
/// Each result maps a grid point of `a` (src) to its match in `b` (dst);
/// `score` is the NCC peak. Multi-channel inputs are matched on luma.
std::vector<Correspondence> find_correspondences(const ImageF& a, const ImageF& b,
                                                 const MatchOptions& opts = {});

}  // namespace flashcue
