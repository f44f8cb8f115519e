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

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "flashcue/dataset.hpp"
#include "flashcue/metrics.hpp"

namespace flashcue {

enum class MetricSpace { srgb, linear };

struct EvalOptions {
  /// Pixels dropped from every border before scoring.
  int border_crop = 0;
  MetricSpace space = MetricSpace::srgb;
  /// Score only pixels set in a sample's validity mask, when it has one.
  bool use_validity = true;
  unsigned threads = 1;
};

struct EvalRow {
  std::string id;
  double psnr_db = 0;
  bool exact = false;
  double ssim = 0;
  double valid_pixel_fraction = 1;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_psnr_db = 0;
  double mean_ssim = 0;
  bool all_exact = false;
  EvalOptions options;
};

/// Means over rows (exact rows contribute kExactPsnrDb).
void recompute_aggregates(EvalReport& report);

/// Scores `<predictions_dir>/<id>.lfr` (linear) or `<id>.ppm`
/// (display-referred) against each sample's ground-truth transmission.
/// A missing prediction is an error naming every missing id.
EvalReport evaluate_manifest(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                             const std::filesystem::path& predictions_dir, const EvalOptions& opts = {});

/// Per-sample rows, aggregates and config echo. `meta` (e.g. timestamps)
/// is stored under its own key so the rest stays reproducible.
nlohmann::json to_json(const EvalReport& report, const nlohmann::json& meta = nlohmann::json::object());
std::string to_table(const EvalReport& report);

}  // namespace flashcue
