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

#include "flashcue/evaluate.hpp"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "flashcue/io.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/parallel.hpp"

namespace flashcue {

namespace fs = std::filesystem;

void recompute_aggregates(EvalReport& r) {
  r.mean_psnr_db = r.mean_ssim = 0;
  r.all_exact = !r.rows.empty();
  for (const auto& row : r.rows) {
    r.mean_psnr_db += row.psnr_db;
    r.mean_ssim += row.ssim;
    r.all_exact = r.all_exact && row.exact;
  }
  if (!r.rows.empty()) {
    r.mean_psnr_db /= static_cast<double>(r.rows.size());
    r.mean_ssim /= static_cast<double>(r.rows.size());
  }
}

namespace {

/// Loads an image into the metric space. LFR1 files are linear, PPM files
/// are display-referred.
ImageF load_for_metric(const fs::path& path, MetricSpace space) {
  const auto bytes = io::read_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LFR1", 4) == 0) {
    const ImageF lin = io::decode_lfr(bytes);
    return space == MetricSpace::srgb ? gamma_encode_float(lin) : lin;
  }
  auto pnm = io::decode_netpbm(bytes);
  const ImageF display = dequantize(RgbImage{std::move(pnm.pixels), pnm.maxval});
  return space == MetricSpace::srgb ? display : gamma_decode_float(display);
}

Mask score_mask(int w, int h, int border, const Mask* validity) {
  Mask m = validity ? *validity : full_mask(w, h, true);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (x < border || y < border || x >= w - border || y >= h - border) m(x, y) = 0;
  return m;
}

}  // namespace

EvalReport evaluate_manifest(const DatasetManifest& manifest, const fs::path& dataset_dir,
                             const fs::path& predictions_dir, const EvalOptions& opts) {
  if (opts.border_crop < 0) throw ConfigError("border crop must be non-negative");
  std::vector<fs::path> preds(manifest.samples.size());
  std::string missing;
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const auto& id = manifest.samples[i].id;
    for (const char* ext : {".lfr", ".ppm"}) {
      const fs::path p = predictions_dir / (id + ext);
      if (fs::exists(p)) {
        preds[i] = p;
        break;
      }
    }
    if (preds[i].empty()) missing += (missing.empty() ? "" : ", ") + id;
  }
  if (!missing.empty()) throw DataError("missing predictions for: " + missing);

  EvalReport report;
  report.options = opts;
  report.rows.resize(manifest.samples.size());
  parallel_for(manifest.samples.size(), opts.threads, [&](std::size_t i) {
    const auto& s = manifest.samples[i];
    const auto gt_it = s.files.find("gt_transmission");
    if (gt_it == s.files.end()) throw DataError("sample '" + s.id + "' has no gt_transmission");
    const ImageF gt = load_for_metric(dataset_dir / gt_it->second, opts.space);
    const ImageF pred = load_for_metric(preds[i], opts.space);
    require_same_shape(pred, gt, "prediction '" + s.id + "'");
    Mask validity;
    const auto v_it = s.files.find("validity");
    const bool has_validity = opts.use_validity && v_it != s.files.end();
    if (has_validity) validity = io::read_mask(dataset_dir / v_it->second);
    const Mask m = score_mask(gt.width(), gt.height(), opts.border_crop, has_validity ? &validity : nullptr);
    EvalRow row;
    row.id = s.id;
    const PsnrResult p = psnr(pred, gt, 1.0, &m);
    row.psnr_db = p.db;
    row.exact = p.exact;
    row.ssim = ssim(pred, gt, {}, &m);
    row.valid_pixel_fraction = static_cast<double>(mask_count(m)) / static_cast<double>(m.pixel_count());
    report.rows[i] = row;
  });
  recompute_aggregates(report);
  return report;
}

nlohmann::json to_json(const EvalReport& r, const nlohmann::json& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"id", row.id},
                    {"psnr_db", row.psnr_db},
                    {"exact", row.exact},
                    {"ssim", row.ssim},
                    {"valid_pixel_fraction", row.valid_pixel_fraction}});
  }
  return {{"samples", rows},
          {"aggregate",
           {{"count", r.rows.size()},
            {"mean_psnr_db", r.mean_psnr_db},
            {"mean_ssim", r.mean_ssim},
            {"all_exact", r.all_exact}}},
          {"config",
           {{"border_crop", r.options.border_crop},
            {"space", r.options.space == MetricSpace::srgb ? "srgb" : "linear"},
            {"use_validity", r.options.use_validity},
            {"psnr_exact_sentinel_db", kExactPsnrDb}}},
          {"meta", meta}};
}

std::string to_table(const EvalReport& r) {
  std::size_t id_width = 6;
  for (const auto& row : r.rows) id_width = std::max(id_width, row.id.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %10s  %8s  %8s\n", static_cast<int>(id_width), "sample", "PSNR(dB)", "SSIM", "valid");
  out << line;
  for (const auto& row : r.rows) {
    std::snprintf(line, sizeof line, "%-*s  %10.4f%s %8.5f  %8.4f\n", static_cast<int>(id_width), row.id.c_str(),
                  row.psnr_db, row.exact ? "*" : " ", row.ssim, row.valid_pixel_fraction);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-*s  %10.4f%s %8.5f\n", static_cast<int>(id_width), "mean", r.mean_psnr_db,
                r.all_exact ? "*" : " ", r.mean_ssim);
  out << line;
  if (r.all_exact || std::any_of(r.rows.begin(), r.rows.end(), [](const EvalRow& x) { return x.exact; })) {
    out << "* exact match (PSNR sentinel " << kExactPsnrDb << " dB)\n";
  }
  return out.str();
}

}  // namespace flashcue
