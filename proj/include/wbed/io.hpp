/**
 * Copyright 2026 The wbed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef WBED_IO_HPP_
#define WBED_IO_HPP_

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbed/error.hpp"
#include "wbed/types.hpp"

namespace wbed {

// ---------------------------------------------------------------------------
// Activation stack container (".actmap")
//
// magic "WBED" | u32 version (=1) | u32 C | u32 H | u32 W | C*H*W float32,
// plane-major row-major, every multi-byte value little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kActmapVersion = 1;
inline constexpr unsigned char kActmapMagic[4] = {0x57, 0x42, 0x45, 0x44};

struct ActmapHeader {
  std::uint32_t version = 0;
  std::uint32_t class_count = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};

namespace detail {

inline std::uint32_t load_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 |
         static_cast<std::uint32_t>(p[3]) << 24;
}

inline void store_u32le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v & 0xFF);
  p[1] = static_cast<unsigned char>(v >> 8 & 0xFF);
  p[2] = static_cast<unsigned char>(v >> 16 & 0xFF);
  p[3] = static_cast<unsigned char>(v >> 24 & 0xFF);
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kMissingFile, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::kIoError, "cannot open for reading: " + path.string());
  }
  return in;
}

inline ActmapHeader read_actmap_header_stream(std::ifstream& in,
                                              std::uintmax_t file_size,
                                              const std::string& name) {
  if (file_size < 4) {
    fail(ErrorCode::kTruncatedFile,
         name + ": too short to hold the magic bytes");
  }
  unsigned char magic[4];
  in.read(reinterpret_cast<char*>(magic), 4);
  if (!in || !std::equal(magic, magic + 4, kActmapMagic)) {
    fail(ErrorCode::kBadMagic, name + ": magic bytes are not \"WBED\"");
  }
  if (file_size < 20) {
    fail(ErrorCode::kTruncatedFile, name + ": header cut off after magic");
  }
  unsigned char rest[16];
  in.read(reinterpret_cast<char*>(rest), 16);
  if (!in) {
    fail(ErrorCode::kIoError, name + ": header read failed");
  }
  ActmapHeader h;
  h.version = load_u32le(rest);
  h.class_count = load_u32le(rest + 4);
  h.height = load_u32le(rest + 8);
  h.width = load_u32le(rest + 12);
  if (h.version != kActmapVersion) {
    fail(ErrorCode::kBadVersion,
         name + ": version " + std::to_string(h.version) + ", expected " +
             std::to_string(kActmapVersion));
  }
  if (h.class_count < 1 ||
      h.class_count > static_cast<std::uint32_t>(kMaxClassCount) ||
      h.height < 1 || h.width < 1 || h.height > 0x7FFFFFFF ||
      h.width > 0x7FFFFFFF) {
    fail(ErrorCode::kValueOutOfRange,
         name + ": header dimensions " + std::to_string(h.class_count) + "x" +
             std::to_string(h.height) + "x" + std::to_string(h.width) +
             " are out of range");
  }
  return h;
}

}  // namespace detail

/// Reads only the 20-byte header; used to learn C/H/W without paying for the
/// payload.
inline ActmapHeader read_actmap_header(const std::filesystem::path& path) {
  std::ifstream in = detail::open_for_read(path);
  return detail::read_actmap_header_stream(
      in, std::filesystem::file_size(path), path.filename().string());
}

inline ActivationStack read_actmap(const std::filesystem::path& path) {
  std::ifstream in = detail::open_for_read(path);
  const std::uintmax_t file_size = std::filesystem::file_size(path);
  const std::string name = path.filename().string();
  const ActmapHeader h =
      detail::read_actmap_header_stream(in, file_size, name);

  const std::uint64_t avail = file_size - 20;
  const std::uint64_t plane = static_cast<std::uint64_t>(h.height) * h.width;
  if (plane > avail) {
    fail(ErrorCode::kTruncatedFile,
         name + ": file too small for the dimensions the header claims");
  }
  const std::uint64_t values = plane * h.class_count;
  const std::uint64_t payload = values * 4;
  if (avail < payload) {
    fail(ErrorCode::kTruncatedFile,
         name + ": payload holds " + std::to_string(avail / 4) +
             " values, header claims " + std::to_string(values));
  }
  if (avail > payload) {
    fail(ErrorCode::kTrailingData,
         name + ": " + std::to_string(avail - payload) +
             " bytes after the payload");
  }

  std::vector<unsigned char> raw(static_cast<std::size_t>(payload));
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) {
    fail(ErrorCode::kIoError, name + ": payload read failed");
  }
  std::vector<double> planes(static_cast<std::size_t>(values));
  for (std::size_t i = 0; i < planes.size(); ++i) {
    planes[i] = static_cast<double>(
        std::bit_cast<float>(detail::load_u32le(raw.data() + i * 4)));
  }
  return ActivationStack(static_cast<int>(h.class_count),
                         static_cast<int>(h.height),
                         static_cast<int>(h.width), std::move(planes));
}

inline void write_actmap(const ActivationStack& a,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::kIoError, "cannot open for writing: " + path.string());
  }
  unsigned char header[20];
  std::copy(kActmapMagic, kActmapMagic + 4, header);
  detail::store_u32le(kActmapVersion, header + 4);
  detail::store_u32le(static_cast<std::uint32_t>(a.class_count()), header + 8);
  detail::store_u32le(static_cast<std::uint32_t>(a.height()), header + 12);
  detail::store_u32le(static_cast<std::uint32_t>(a.width()), header + 16);
  out.write(reinterpret_cast<const char*>(header), 20);

  std::vector<unsigned char> raw(a.planes().size() * 4);
  for (std::size_t i = 0; i < a.planes().size(); ++i) {
    detail::store_u32le(
        std::bit_cast<std::uint32_t>(static_cast<float>(a.planes()[i])),
        raw.data() + i * 4);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) {
    fail(ErrorCode::kIoError, "write failed: " + path.string());
  }
}

// ---------------------------------------------------------------------------
// 8-bit PNG readers/writers (libpng)
//
// Saliency maps are plain grayscale; label masks may also be palettized, in
// which case the palette INDEX is the label (VOC-style ground truth), so no
// palette expansion is ever requested.
// ---------------------------------------------------------------------------

namespace detail {

struct RawPng {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<std::uint8_t> pixels;
};

inline void png_silent_error(png_structp png, png_const_charp) {
  png_longjmp(png, 1);
}

inline void png_silent_warning(png_structp, png_const_charp) {}

/// setjmp lives here; every local is a pointer or scalar, and the buffers it
/// fills belong to the caller, so a longjmp cannot leak or corrupt anything.
inline bool decode_png_frame(std::FILE* fp, png_structp png, png_infop info,
                             RawPng* out, std::vector<png_bytep>* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  if (out->bit_depth != 8 ||
      (out->color_type != PNG_COLOR_TYPE_GRAY &&
       out->color_type != PNG_COLOR_TYPE_PALETTE) ||
      out->height == 0 || out->width == 0) {
    return true;
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != out->width) return true;
  out->pixels.resize(static_cast<std::size_t>(out->height) * out->width);
  rows->resize(out->height);
  for (std::uint32_t r = 0; r < out->height; ++r) {
    (*rows)[r] = out->pixels.data() + static_cast<std::size_t>(r) * out->width;
  }
  png_read_image(png, rows->data());
  return true;
}

inline RawPng read_png_single_channel(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorCode::kMissingFile, "no such file: " + path.string());
  }
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (fp == nullptr) {
    fail(ErrorCode::kIoError, "cannot open for reading: " + path.string());
  }
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    std::fclose(fp);
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() + ": not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_silent_error,
                                           png_silent_warning);
  png_infop info = png == nullptr ? nullptr : png_create_info_struct(png);
  if (png == nullptr || info == nullptr) {
    if (png != nullptr) png_destroy_read_struct(&png, nullptr, nullptr);
    std::fclose(fp);
    fail(ErrorCode::kIoError, "libpng allocation failed");
  }

  RawPng raw;
  std::vector<png_bytep> rows;
  const bool ok = decode_png_frame(fp, png, info, &raw, &rows);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  if (!ok) {
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() + ": PNG decode failed");
  }
  if (raw.bit_depth != 8) {
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() + ": bit depth " +
             std::to_string(raw.bit_depth) + ", only 8 is supported");
  }
  if (raw.color_type != PNG_COLOR_TYPE_GRAY &&
      raw.color_type != PNG_COLOR_TYPE_PALETTE) {
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() +
             ": only single-channel grayscale or palettized PNGs are "
             "supported");
  }
  if (raw.pixels.empty()) {
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() + ": PNG has no pixel data");
  }
  return raw;
}

/// Write-side twin of decode_png_frame; same setjmp discipline.
inline bool encode_png_frame(std::FILE* fp, png_structp png, png_infop info,
                             const std::uint8_t* pixels, std::uint32_t height,
                             std::uint32_t width,
                             std::vector<png_bytep>* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  rows->resize(height);
  for (std::uint32_t r = 0; r < height; ++r) {
    (*rows)[r] = const_cast<png_bytep>(pixels) +
                 static_cast<std::size_t>(r) * width;
  }
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  return true;
}

inline void write_png_gray8(const std::filesystem::path& path,
                            const std::uint8_t* pixels, std::uint32_t height,
                            std::uint32_t width) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (fp == nullptr) {
    fail(ErrorCode::kIoError, "cannot open for writing: " + path.string());
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_silent_error,
                                            png_silent_warning);
  png_infop info = png == nullptr ? nullptr : png_create_info_struct(png);
  if (png == nullptr || info == nullptr) {
    if (png != nullptr) png_destroy_write_struct(&png, nullptr);
    std::fclose(fp);
    fail(ErrorCode::kIoError, "libpng allocation failed");
  }
  std::vector<png_bytep> rows;
  const bool ok = encode_png_frame(fp, png, info, pixels, height, width,
                                   &rows);
  png_destroy_write_struct(&png, &info);
  const bool closed = std::fclose(fp) == 0;
  if (!ok || !closed) {
    fail(ErrorCode::kIoError, "PNG write failed: " + path.string());
  }
}

}  // namespace detail

/// Loads an 8-bit grayscale PNG as a soft saliency map, pixel v -> v/255.
inline SaliencyMap read_gray_png(const std::filesystem::path& path) {
  const detail::RawPng raw = detail::read_png_single_channel(path);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY) {
    fail(ErrorCode::kUnsupportedPngFormat,
         path.filename().string() +
             ": saliency maps must be grayscale, not palettized");
  }
  std::vector<double> values(raw.pixels.size());
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    values[i] = raw.pixels[i] / 255.0;
  }
  return SaliencyMap(static_cast<int>(raw.height),
                     static_cast<int>(raw.width), std::move(values));
}

/// Writes a saliency map as 8-bit grayscale, value v -> round(v*255).
inline void write_gray_png(const SaliencyMap& s,
                           const std::filesystem::path& path) {
  std::vector<std::uint8_t> pixels(s.values().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>(std::lround(s.values()[i] * 255.0));
  }
  detail::write_png_gray8(path, pixels.data(),
                          static_cast<std::uint32_t>(s.height()),
                          static_cast<std::uint32_t>(s.width()));
}

/// Loads a label mask from an 8-bit grayscale or palettized PNG. Palettized
/// files are decoded by palette index, never expanded to RGB.
inline LabelMask read_label_png(const std::filesystem::path& path,
                                int class_count) {
  detail::RawPng raw = detail::read_png_single_channel(path);
  try {
    return LabelMask(class_count, static_cast<int>(raw.height),
                     static_cast<int>(raw.width), std::move(raw.pixels));
  } catch (const Error& e) {
    fail(e.code(), path.filename().string() + ": " + e.message());
  }
}

/// Writes a label mask as 8-bit grayscale with raw label codes as pixel
/// values; read_label_png recovers it exactly.
inline void write_label_png(const LabelMask& mask,
                            const std::filesystem::path& path) {
  detail::write_png_gray8(path, mask.values().data(),
                          static_cast<std::uint32_t>(mask.height()),
                          static_cast<std::uint32_t>(mask.width()));
}

// ---------------------------------------------------------------------------
// Manifests (JSON-Lines) and class subsets
// ---------------------------------------------------------------------------

struct ManifestEntry {
  std::string id;
  std::vector<int> labels;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

/// Parses a JSON-Lines manifest: one {"id": ..., "labels": [...]} object per
/// line, blank lines skipped. Label indices are validated against
/// class_count when one is supplied; otherwise only against the global cap.
inline Manifest read_manifest(const std::filesystem::path& path,
                              std::optional<int> class_count = std::nullopt) {
  std::ifstream in = detail::open_for_read(path);
  const int cap = class_count.value_or(kMaxClassCount);
  Manifest manifest;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail(ErrorCode::kParseError,
           path.filename().string() + " line " + std::to_string(line_no) +
               ": not a JSON object");
    }
    if (!j.contains("id") || !j["id"].is_string()) {
      fail(ErrorCode::kParseError,
           path.filename().string() + " line " + std::to_string(line_no) +
               ": missing string field \"id\"");
    }
    if (!j.contains("labels") || !j["labels"].is_array()) {
      fail(ErrorCode::kParseError,
           path.filename().string() + " line " + std::to_string(line_no) +
               ": missing array field \"labels\"");
    }
    ManifestEntry entry;
    entry.id = j["id"].get<std::string>();
    for (const nlohmann::json& v : j["labels"]) {
      if (!v.is_number_integer()) {
        fail(ErrorCode::kParseError,
             path.filename().string() + " line " + std::to_string(line_no) +
                 ": labels must be integers");
      }
      const std::int64_t idx = v.get<std::int64_t>();
      if (idx < 0 || idx >= cap) {
        fail(ErrorCode::kLabelOutOfRange,
             path.filename().string() + " line " + std::to_string(line_no) +
                 ": label " + std::to_string(idx) + " outside [0, " +
                 std::to_string(cap) + ")");
      }
      entry.labels.push_back(static_cast<int>(idx));
    }
    if (!seen_ids.insert(entry.id).second) {
      fail(ErrorCode::kDuplicateId,
           path.filename().string() + " line " + std::to_string(line_no) +
               ": duplicate id \"" + entry.id + "\"");
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

/// The 0-based class indices kept when converting class-wise ground truth to
/// class-agnostic saliency.
class ClassSubset {
 public:
  explicit ClassSubset(std::vector<int> kept) : kept_(std::move(kept)) {
    if (kept_.empty()) {
      fail(ErrorCode::kInvalidArgument, "class subset is empty");
    }
    std::sort(kept_.begin(), kept_.end());
    kept_.erase(std::unique(kept_.begin(), kept_.end()), kept_.end());
    if (kept_.front() < 0) {
      fail(ErrorCode::kLabelOutOfRange,
           "class subset holds negative index " +
               std::to_string(kept_.front()));
    }
  }

  bool contains(int class_index) const {
    return std::binary_search(kept_.begin(), kept_.end(), class_index);
  }

  const std::vector<int>& kept() const { return kept_; }

 private:
  std::vector<int> kept_;
};

/// Projects class-wise ground truth onto a binary saliency map: a pixel is
/// salient iff its label code k is a foreground class (k >= 1) whose 0-based
/// index k-1 is in the subset. Background and ignore pixels map to 0.
inline SaliencyMap classwise_to_salient(const LabelMask& gt,
                                        const ClassSubset& subset) {
  if (subset.kept().back() >= gt.class_count()) {
    fail(ErrorCode::kLabelOutOfRange,
         "class subset index " + std::to_string(subset.kept().back()) +
             " outside [0, " + std::to_string(gt.class_count()) + ")");
  }
  std::vector<double> values(gt.values().size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint8_t k = gt.values()[i];
    if (k >= 1 && k != kIgnoreLabel && subset.contains(k - 1)) {
      values[i] = 1.0;
    }
  }
  return SaliencyMap(gt.height(), gt.width(), std::move(values),
                     /*binarized=*/true);
}

}  // namespace wbed

#endif  // WBED_IO_HPP_
