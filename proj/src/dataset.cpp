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

#include "flashcue/dataset.hpp"

#include <cstring>

#include "flashcue/checksum.hpp"
#include "flashcue/io.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/parallel.hpp"
#include "flashcue/random.hpp"

namespace flashcue {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

nlohmann::json parse_json_file(const fs::path& path) {
  const auto bytes = io::read_bytes(path);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what(), e.byte);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  io::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

SourceManifest read_source_manifest(const fs::path& path) {
  const nlohmann::json j = parse_json_file(path);
  const fs::path base = path.parent_path();
  SourceManifest m;
  try {
    for (const auto& s : j.at("sources")) {
      SourceEntry e;
      e.id = s.at("id").get<std::string>();
      e.transmission = resolve(base, s.at("transmission").get<std::string>());
      e.flash_only = resolve(base, s.at("flash_only").get<std::string>());
      if (s.contains("depth_transmission")) {
        e.depth_transmission = resolve(base, s.at("depth_transmission").get<std::string>());
      }
      for (const auto& r : s.at("reflections")) {
        ReflectionSource rs;
        if (r.is_string()) {
          rs.image = resolve(base, r.get<std::string>());
        } else {
          rs.image = resolve(base, r.at("image").get<std::string>());
          if (r.contains("depth")) rs.depth = resolve(base, r.at("depth").get<std::string>());
        }
        e.reflections.push_back(std::move(rs));
      }
      m.sources.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("source manifest '" + path.string() + "': " + e.what());
  }
  return m;
}

nlohmann::json to_json(const SourceManifest& m) {
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& s : m.sources) {
    nlohmann::json e = {{"id", s.id},
                        {"transmission", s.transmission.generic_string()},
                        {"flash_only", s.flash_only.generic_string()}};
    if (s.depth_transmission) e["depth_transmission"] = s.depth_transmission->generic_string();
    nlohmann::json refl = nlohmann::json::array();
    for (const auto& r : s.reflections) {
      nlohmann::json rj = {{"image", r.image.generic_string()}};
      if (r.depth) rj["depth"] = r.depth->generic_string();
      refl.push_back(rj);
    }
    e["reflections"] = refl;
    sources.push_back(e);
  }
  return {{"sources", sources}};
}

nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : m.samples) {
    samples.push_back({{"id", s.id},
                       {"files", s.files},
                       {"seed", s.seed},
                       {"clamp_fraction", s.clamp_fraction},
                       {"flagged", s.flagged},
                       {"checksums", s.checksums}});
  }
  return {{"version", m.version}, {"recipe", to_json(m.recipe)}, {"samples", samples}};
}

DatasetManifest dataset_manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.recipe = recipe_from_json(j.at("recipe"));
    for (const auto& s : j.at("samples")) {
      DatasetSample d;
      d.id = s.at("id").get<std::string>();
      d.files = s.at("files").get<std::map<std::string, std::string>>();
      d.seed = s.value("seed", std::uint64_t{0});
      d.clamp_fraction = s.value("clamp_fraction", 0.0);
      d.flagged = s.value("flagged", false);
      if (s.contains("checksums")) d.checksums = s.at("checksums").get<std::map<std::string, std::string>>();
      m.samples.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("dataset manifest: ") + e.what());
  }
  return m;
}

DatasetManifest read_dataset_manifest(const fs::path& path) {
  return dataset_manifest_from_json(parse_json_file(path));
}

LinearImage load_source_image(const fs::path& path, bool resize_half_size) {
  const auto bytes = io::read_bytes(path);
  LinearImage img;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LFR1", 4) == 0) {
    img = io::decode_lfr(bytes);
  } else {
    auto pnm = io::decode_netpbm(bytes);
    img = gamma_decode(RgbImage{std::move(pnm.pixels), pnm.maxval});
  }
  if (!all_finite(img)) throw DataError("source '" + path.string() + "' has non-finite values");
  return resize_half_size ? resize_half(img) : img;
}

DatasetSample write_sample(const SynthSample& s, const std::string& id, const fs::path& out_dir) {
  DatasetSample d;
  d.id = id;
  d.seed = s.seed;
  d.clamp_fraction = s.clamp_fraction;
  d.flagged = s.flagged;
  const fs::path dir = out_dir / id;
  auto put = [&](const std::string& role, const std::string& name, const io::Bytes& bytes) {
    io::write_bytes(dir / name, bytes);
    d.files[role] = id + "/" + name;
    d.checksums[role] = sha256_hex(bytes);
  };
  put("ambient", "ambient.lfr", io::encode_lfr(s.ambient));
  put("flash", "flash.lfr", io::encode_lfr(s.flash));
  put("flash_only", "flash_only.lfr", io::encode_lfr(s.flash_only));
  put("gt_transmission", "gt_transmission.lfr", io::encode_lfr(s.transmission));
  put("gt_reflection", "gt_reflection.lfr", io::encode_lfr(s.reflection));
  if (s.flow_t) put("flow_t", "flow_t.lfr", io::encode_lfr(s.flow_t->image()));
  if (s.flow_r) put("flow_r", "flow_r.lfr", io::encode_lfr(s.flow_r->image()));
  if (s.flow_t) {
    Image<std::uint16_t> px(s.validity.width(), s.validity.height(), 1);
    px.array() = (s.validity.array() != 0).cast<std::uint16_t>() * std::uint16_t{255};
    put("validity", "validity.pgm", io::encode_netpbm(px, 255));
  }
  return d;
}

DatasetManifest emit_dataset(const SourceManifest& sources, const SynthRecipe& recipe,
                             const fs::path& out_dir, unsigned threads) {
  recipe.validate();
  struct Job {
    const SourceEntry* source;
    const ReflectionSource* reflection;
    std::string id;
  };
  std::vector<Job> jobs;
  for (const auto& s : sources.sources) {
    if (recipe.misalign_mode == MisalignMode::depth && !s.depth_transmission) {
      throw DataError("source '" + s.id + "' has no transmission depth for depth synthesis");
    }
    for (std::size_t k = 0; k < s.reflections.size(); ++k) {
      if (recipe.misalign_mode == MisalignMode::depth && !s.reflections[k].depth) {
        throw DataError("source '" + s.id + "' reflection " + std::to_string(k) + " has no depth map");
      }
      jobs.push_back({&s, &s.reflections[k], s.id + "_r" + std::to_string(k)});
    }
  }
  DatasetManifest manifest;
  manifest.recipe = recipe;
  manifest.samples.resize(jobs.size());
  fs::create_directories(out_dir);
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::uint64_t seed = derive_seed(recipe.seed, i);
    const bool half = recipe.resize_half;
    const LinearImage t = load_source_image(job.source->transmission, half);
    const LinearImage f = load_source_image(job.source->flash_only, half);
    const LinearImage r = load_source_image(job.reflection->image, half);
    SynthSample s;
    switch (recipe.misalign_mode) {
      case MisalignMode::none:
        s = compose_aligned(t, r, f, recipe, seed);
        break;
      case MisalignMode::homography:
        s = synth_misaligned_homography(t, r, f, recipe, seed);
        break;
      case MisalignMode::depth: {
        const DepthMap dt = load_source_image(*job.source->depth_transmission, half);
        const DepthMap dr = load_source_image(*job.reflection->depth, half);
        s = synth_misaligned_depth(t, r, f, dt, dr, recipe, seed);
        break;
      }
    }
    manifest.samples[i] = write_sample(s, job.id, out_dir);
  });
  write_text(out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

SourceManifest write_procedural_sources(const fs::path& dir, int n, int width, int height,
                                        std::uint64_t seed) {
  SourceManifest m;
  fs::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t base = derive_seed(seed, 1000 + static_cast<std::uint64_t>(i));
    SourceEntry e;
    e.id = "scene" + std::to_string(i);
    const std::string stem = e.id + "_";
    const LinearImage t = procedural_scene(width, height, derive_seed(base, 0));
    LinearImage f = procedural_scene(width, height, derive_seed(base, 1));
    // The flash-only layer shares structure with the transmission.
    f.array() = 0.6f * t.array() + 0.4f * f.array();
    io::write_lfr(dir / (stem + "t.lfr"), t);
    io::write_lfr(dir / (stem + "fo.lfr"), f);
    io::write_lfr(dir / (stem + "t_depth.lfr"), procedural_depth(width, height, derive_seed(base, 2), 0.8, 2.0));
    e.transmission = dir / (stem + "t.lfr");
    e.flash_only = dir / (stem + "fo.lfr");
    e.depth_transmission = dir / (stem + "t_depth.lfr");
    for (int k = 0; k < 2; ++k) {
      const fs::path img = dir / (stem + "r" + std::to_string(k) + ".lfr");
      const fs::path depth = dir / (stem + "r" + std::to_string(k) + "_depth.lfr");
      io::write_lfr(img, procedural_scene(width, height, derive_seed(base, 10 + k)));
      io::write_lfr(depth, procedural_depth(width, height, derive_seed(base, 20 + k), 1.5, 4.0));
      e.reflections.push_back({img, depth});
    }
    m.sources.push_back(std::move(e));
  }
  nlohmann::json j = to_json(m);
  // Store paths relative to the directory so the manifest is relocatable.
  for (auto& s : j["sources"]) {
    auto rel = [&](nlohmann::json& v) { v = fs::path(v.get<std::string>()).filename().generic_string(); };
    rel(s["transmission"]);
    rel(s["flash_only"]);
    rel(s["depth_transmission"]);
    for (auto& r : s["reflections"]) {
      rel(r["image"]);
      rel(r["depth"]);
    }
  }
  write_text(dir / "sources.json", j.dump(2) + "\n");
  return m;
}

}  // namespace flashcue
