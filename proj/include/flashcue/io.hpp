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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flashcue/image.hpp"
#include "flashcue/raw.hpp"

namespace flashcue::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// LFR1 float container: "LFR1", then width, height, channels as u32 LE,
// then float32 LE samples, row-major, channel-interleaved.
Bytes encode_lfr(const ImageF& img);
ImageF decode_lfr(std::span<const std::uint8_t> bytes);
void write_lfr(const std::filesystem::path& path, const ImageF& img);
ImageF read_lfr(const std::filesystem::path& path);

struct Netpbm {
  Image<std::uint16_t> pixels;
  std::uint16_t maxval = 0;
};

/// Binary PGM (P5) or PPM (P6). Samples are 1 byte when maxval < 256,
/// otherwise 2 bytes big-endian.
Bytes encode_netpbm(const Image<std::uint16_t>& pixels, std::uint16_t maxval);
Netpbm decode_netpbm(std::span<const std::uint8_t> bytes);

void write_ppm(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_ppm(const std::filesystem::path& path);

/// Masks are stored as 8-bit PGM with 0 / 255.
void write_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_mask(const std::filesystem::path& path);

/// `<dir>/<stem>.meta.json` next to a raw PGM.
std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path);

nlohmann::json meta_to_json(const CaptureMeta& meta, Cfa cfa);
/// Parses a sidecar; a scalar black_level is broadcast to all four sites.
CaptureMeta meta_from_json(const nlohmann::json& j, Cfa* cfa = nullptr);

/// 16-bit PGM (maxval 65535) plus JSON sidecar.
void write_raw_frame(const std::filesystem::path& pgm_path, const RawFrame& frame);
RawFrame read_raw_frame(const std::filesystem::path& pgm_path);

/// Loads an estimator-space float image: LFR1 as stored, PPM scaled by
/// 1/maxval.
ImageF read_float_image(const std::filesystem::path& path);

/// Stable textual dump of every on-disk format.
std::string format_description();

}  // namespace flashcue::io
