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

#include "flashcue/image.hpp"

#include <cmath>

namespace flashcue {

Mask mask_and(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "mask_and");
  Mask out(a.width(), a.height(), 1);
  out.array() = (a.array() != 0 && b.array() != 0).template cast<std::uint8_t>();
  return out;
}

Eigen::Index mask_count(const Mask& m) { return (m.array() != 0).count(); }

bool all_finite(const ImageF& img) { return img.array().isFinite().all(); }

}  // namespace flashcue
