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

#include "flashcue/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace flashcue::io {

namespace {

void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32_le(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) throw ParseError(std::string("netpbm ") + field + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("netpbm: expected ") + field, pos_);
    return v;
  }

  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ParseError("netpbm: expected whitespace before raster", pos_);
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Bytes encode_lfr(const ImageF& img) {
  Bytes out;
  out.reserve(16 + static_cast<std::size_t>(img.size()) * 4);
  for (char c : {'L', 'F', 'R', '1'}) out.push_back(static_cast<std::uint8_t>(c));
  put_u32_le(out, static_cast<std::uint32_t>(img.width()));
  put_u32_le(out, static_cast<std::uint32_t>(img.height()));
  put_u32_le(out, static_cast<std::uint32_t>(img.channels()));
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    put_u32_le(out, std::bit_cast<std::uint32_t>(img.array()[i]));
  }
  return out;
}

ImageF decode_lfr(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "LFR1", 4) != 0) {
    throw ParseError("LFR1: magic mismatch", 0);
  }
  if (bytes.size() < 16) throw ParseError("LFR1: truncated header", bytes.size());
  const std::uint32_t w = get_u32_le(bytes, 4);
  const std::uint32_t h = get_u32_le(bytes, 8);
  const std::uint32_t c = get_u32_le(bytes, 12);
  if (c == 0 || c > 4) throw ParseError("LFR1: unsupported channel count " + std::to_string(c), 12);
  if (w > (1u << 16) || h > (1u << 16)) throw ParseError("LFR1: implausible dimensions", 4);
  const std::size_t count = static_cast<std::size_t>(w) * h * c;
  if (bytes.size() < 16 + count * 4) throw ParseError("LFR1: truncated payload", bytes.size());
  if (bytes.size() > 16 + count * 4) throw ParseError("LFR1: trailing bytes", 16 + count * 4);
  ImageF img(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
  for (std::size_t i = 0; i < count; ++i) {
    img.array()[static_cast<Eigen::Index>(i)] = std::bit_cast<float>(get_u32_le(bytes, 16 + 4 * i));
  }
  return img;
}

void write_lfr(const std::filesystem::path& path, const ImageF& img) {
  write_bytes(path, encode_lfr(img));
}

ImageF read_lfr(const std::filesystem::path& path) { return decode_lfr(read_bytes(path)); }

Bytes encode_netpbm(const Image<std::uint16_t>& pixels, std::uint16_t maxval) {
  if (pixels.channels() != 1 && pixels.channels() != 3) {
    throw DataError("netpbm supports 1 or 3 channels");
  }
  if (maxval == 0) throw ConfigError("netpbm maxval must be positive");
  if (pixels.size() > 0 && pixels.array().maxCoeff() > maxval) {
    throw DataError("netpbm sample exceeds maxval");
  }
  std::ostringstream header;
  header << (pixels.channels() == 1 ? "P5" : "P6") << '\n'
         << pixels.width() << ' ' << pixels.height() << '\n'
         << maxval << '\n';
  const std::string h = header.str();
  Bytes out(h.begin(), h.end());
  const bool wide = maxval > 255;
  out.reserve(out.size() + static_cast<std::size_t>(pixels.size()) * (wide ? 2 : 1));
  for (Eigen::Index i = 0; i < pixels.size(); ++i) {
    const std::uint16_t v = pixels.array()[i];
    if (wide) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

Netpbm decode_netpbm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError("netpbm: magic mismatch (expected P5 or P6)", 0);
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader r(bytes);
  r.advance(2);
  const unsigned long w = r.number("width");
  const unsigned long h = r.number("height");
  const std::size_t maxval_at = r.pos();
  const unsigned long maxval = r.number("maxval");
  if (maxval == 0 || maxval > 65535) throw ParseError("netpbm: maxval out of range", maxval_at);
  if (w > (1u << 16) || h > (1u << 16)) throw ParseError("netpbm: implausible dimensions", 2);
  r.single_whitespace();
  const bool wide = maxval > 255;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  const std::size_t need = count * (wide ? 2 : 1);
  if (bytes.size() - r.pos() < need) throw ParseError("netpbm: truncated payload", bytes.size());
  Netpbm out{Image<std::uint16_t>(static_cast<int>(w), static_cast<int>(h), channels),
             static_cast<std::uint16_t>(maxval)};
  std::size_t p = r.pos();
  for (std::size_t i = 0; i < count; ++i) {
    std::uint16_t v = bytes[p++];
    if (wide) v = static_cast<std::uint16_t>((v << 8) | bytes[p++]);
    if (v > maxval) throw ParseError("netpbm: sample exceeds maxval", p - (wide ? 2 : 1));
    out.pixels.array()[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  if (img.channels() != 3) throw DataError("PPM output requires 3 channels");
  write_bytes(path, encode_netpbm(img.pixels, img.maxval));
}

RgbImage read_ppm(const std::filesystem::path& path) {
  auto pnm = decode_netpbm(read_bytes(path));
  if (pnm.pixels.channels() != 3) throw ParseError("expected a P6 image in '" + path.string() + "'", 0);
  return RgbImage{std::move(pnm.pixels), pnm.maxval};
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  Image<std::uint16_t> px(mask.width(), mask.height(), 1);
  px.array() = (mask.array() != 0).cast<std::uint16_t>() * std::uint16_t{255};
  write_bytes(path, encode_netpbm(px, 255));
}

Mask read_mask(const std::filesystem::path& path) {
  auto pnm = decode_netpbm(read_bytes(path));
  if (pnm.pixels.channels() != 1) throw ParseError("mask must be a P5 image", 0);
  Mask m(pnm.pixels.width(), pnm.pixels.height(), 1);
  m.array() = (pnm.pixels.array() != 0).cast<std::uint8_t>();
  return m;
}

std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
  auto p = pgm_path;
  p.replace_extension(".meta.json");
  return p;
}

nlohmann::json meta_to_json(const CaptureMeta& meta, Cfa cfa) {
  nlohmann::json j;
  j["cfa"] = std::string(to_string(cfa));
  j["black_level"] = meta.black_level;
  j["white_level"] = meta.white_level;
  j["exposure_ms"] = meta.exposure_ms;
  j["iso"] = meta.iso;
  j["wb_gains"] = {meta.wb_gains[0], meta.wb_gains[1], meta.wb_gains[2]};
  std::vector<double> ccm;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) ccm.push_back(meta.ccm(r, c));
  j["ccm"] = ccm;
  j["illumination"] = std::string(to_string(meta.illumination));
  return j;
}

CaptureMeta meta_from_json(const nlohmann::json& j, Cfa* cfa) {
  CaptureMeta m;
  try {
    if (cfa) *cfa = parse_cfa(j.at("cfa").get<std::string>());
    const auto& black = j.at("black_level");
    if (black.is_number()) {
      m.set_black_level(black.get<double>());
    } else if (black.is_array() && black.size() == 4) {
      for (int s = 0; s < 4; ++s) m.black_level[s] = black[s].get<double>();
    } else if (black.is_array() && black.size() == 1) {
      m.set_black_level(black[0].get<double>());
    } else {
      throw ConfigError("black_level must be a number or an array of 4");
    }
    m.white_level = j.at("white_level").get<double>();
    m.exposure_ms = j.at("exposure_ms").get<double>();
    m.iso = j.value("iso", 100.0);
    const auto& wb = j.at("wb_gains");
    if (!wb.is_array() || wb.size() != 3) throw ConfigError("wb_gains must have 3 entries");
    for (int c = 0; c < 3; ++c) m.wb_gains[c] = wb[c].get<double>();
    const auto& ccm = j.at("ccm");
    if (!ccm.is_array() || ccm.size() != 9) throw ConfigError("ccm must have 9 entries");
    for (int i = 0; i < 9; ++i) m.ccm(i / 3, i % 3) = ccm[i].get<double>();
    m.illumination = parse_illumination(j.value("illumination", std::string("ambient")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("capture metadata: ") + e.what());
  }
  m.validate();
  return m;
}

void write_raw_frame(const std::filesystem::path& pgm_path, const RawFrame& frame) {
  frame.validate();
  write_bytes(pgm_path, encode_netpbm(frame.samples, 65535));
  const std::string text = meta_to_json(frame.meta, frame.cfa).dump(2) + "\n";
  write_bytes(sidecar_path(pgm_path),
              std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RawFrame read_raw_frame(const std::filesystem::path& pgm_path) {
  auto pnm = decode_netpbm(read_bytes(pgm_path));
  if (pnm.pixels.channels() != 1) throw ParseError("raw frame must be a P5 image", 0);
  const auto side = sidecar_path(pgm_path);
  const auto text = read_bytes(side);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("sidecar '" + side.string() + "': " + e.what(), e.byte);
  }
  RawFrame f;
  f.meta = meta_from_json(j, &f.cfa);
  f.samples = std::move(pnm.pixels);
  f.validate();
  return f;
}

ImageF read_float_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "LFR1", 4) == 0) return decode_lfr(bytes);
  auto pnm = decode_netpbm(bytes);
  ImageF out(pnm.pixels.width(), pnm.pixels.height(), pnm.pixels.channels());
  out.array() = pnm.pixels.array().cast<float>() / static_cast<float>(pnm.maxval);
  return out;
}

std::string format_description() {
  return R"(RawFrame
  Binary PGM (P5), maxval 65535, samples big-endian 16-bit, row-major.
  Sidecar <name>.meta.json with keys:
    cfa            "RGGB" | "BGGR" | "GRBG" | "GBRG"
    black_level    [4] per 2x2 tile site: (0,0) (1,0) (0,1) (1,1); a scalar is broadcast
    white_level    number
    exposure_ms    number > 0
    iso            number
    wb_gains       [3] R, G, B multipliers > 0
    ccm            [9] row-major 3x3 colour-correction matrix
    illumination   "ambient" | "flash" | "flash_only"

LinearImage / FlowField (LFR1)
  bytes 0..3    magic "LFR1"
  bytes 4..15   width, height, channels as u32 little-endian
  bytes 16..    float32 little-endian samples, row-major, channel-interleaved
  Flow fields use channels = 2 (u then v), displacement in pixels.

RgbImage
  Binary PPM (P6), maxval 255 (8-bit) or 65535 (16-bit, big-endian).

Mask
  Binary PGM (P5), maxval 255, 0 = unset, 255 = set.

Homography
  JSON array of 9 numbers, row-major, h33 = 1.
)";
}

}  // namespace flashcue::io
