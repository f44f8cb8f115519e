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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flashcue/synth.hpp"

namespace flashcue {

struct ReflectionSource {
  std::filesystem::path image;
  std::optional<std::filesystem::path> depth;
};

/// One flash-dataset pair plus the reflections to composite over it.
struct SourceEntry {
  std::string id;
  std::filesystem::path transmission;
  std::filesystem::path flash_only;
  std::optional<std::filesystem::path> depth_transmission;
  std::vector<ReflectionSource> reflections;
};

/// Input manifest: {"sources": [{id, transmission, flash_only,
/// depth_transmission?, reflections: [path | {image, depth?}]}]}.
/// Relative paths resolve against the manifest's directory.
struct SourceManifest {
  std::vector<SourceEntry> sources;
};

SourceManifest read_source_manifest(const std::filesystem::path& path);
nlohmann::json to_json(const SourceManifest& m);

struct DatasetSample {
  std::string id;
  /// Role -> path relative to the dataset directory.
  std::map<std::string, std::string> files;
  std::uint64_t seed = 0;
  double clamp_fraction = 0;
  bool flagged = false;
  /// Role -> SHA-256 of the file.
  std::map<std::string, std::string> checksums;
};

struct DatasetManifest {
  int version = 1;
  SynthRecipe recipe;
  std::vector<DatasetSample> samples;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest dataset_manifest_from_json(const nlohmann::json& j);
DatasetManifest read_dataset_manifest(const std::filesystem::path& path);

/// Loads a source layer: LFR1 as stored (linear), PPM gamma-decoded.
LinearImage load_source_image(const std::filesystem::path& path, bool resize_half_size);

/// Runs one synthesis per (source, reflection), writes every sample under
/// out_dir/<id>/ and the manifest at out_dir/manifest.json. Sample k gets
/// seed derive_seed(recipe.seed, k), so the output bytes do not depend on
/// `threads`.
DatasetManifest emit_dataset(const SourceManifest& sources, const SynthRecipe& recipe,
                             const std::filesystem::path& out_dir, unsigned threads = 1);

/// Writes one sample's layers; returns the file map and checksums.
DatasetSample write_sample(const SynthSample& s, const std::string& id,
                           const std::filesystem::path& out_dir);

/// Writes `n` procedural sources (scene pairs, two reflections each, depth
/// maps) under dir and returns the manifest describing them.
SourceManifest write_procedural_sources(const std::filesystem::path& dir, int n, int width,
                                        int height, std::uint64_t seed);

}  // namespace flashcue
