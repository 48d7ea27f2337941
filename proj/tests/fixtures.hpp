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
#ifndef WBED_TESTS_FIXTURES_HPP_
#define WBED_TESTS_FIXTURES_HPP_

#include <png.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbed/wbed.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path unique_path(const std::string& stem) {
  static std::atomic<int> counter{0};
  return fs::temp_directory_path() /
         (stem + "-" + std::to_string(::getpid()) + "-" +
          std::to_string(counter.fetch_add(1)));
}

/// Self-deleting scratch directory.
struct TempDir {
  fs::path path;

  TempDir() : path(unique_path("wbed-test")) { fs::create_directories(path); }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path operator/(const std::string& name) const { return path / name; }
};

/// Runs fn and reports the wbed error code it threw, as a printable string.
template <typename Fn>
inline std::string thrown_code(Fn&& fn) {
  try {
    fn();
    return "<no error>";
  } catch (const wbed::Error& e) {
    return wbed::to_string(e.code());
  } catch (...) {
    return "<foreign exception>";
  }
}

/// Message text of the wbed error fn throws, "" if it does not throw one.
template <typename Fn>
inline std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const wbed::Error& e) {
    return e.message();
  }
  return "";
}

// ---------------------------------------------------------------------------
// Byte-level writers for malformed-input tests (independent of the library's
// serializers).
// ---------------------------------------------------------------------------

struct RawActmapSpec {
  std::array<unsigned char, 4> magic{{0x57, 0x42, 0x45, 0x44}};
  std::uint32_t version = 1;
  std::uint32_t class_count = 1;
  std::uint32_t height = 1;
  std::uint32_t width = 1;
  std::vector<float> values;
  int trailing_bytes = 0;
};

inline void write_actmap_raw(const fs::path& path, const RawActmapSpec& spec) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const auto put_u32 = [&out](std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xFF),
        static_cast<unsigned char>(v >> 8 & 0xFF),
        static_cast<unsigned char>(v >> 16 & 0xFF),
        static_cast<unsigned char>(v >> 24 & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write(reinterpret_cast<const char*>(spec.magic.data()), 4);
  put_u32(spec.version);
  put_u32(spec.class_count);
  put_u32(spec.height);
  put_u32(spec.width);
  for (const float f : spec.values) {
    std::uint32_t bits;
    static_assert(sizeof bits == sizeof f);
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  }
  for (int i = 0; i < spec.trailing_bytes; ++i) out.put('\0');
  if (!out) throw std::runtime_error("fixture write failed");
}

/// Writes an arbitrary 8/16-bit gray, palette, or RGB PNG for format tests.
/// `data` holds packed big-endian rows. `palette_size` > 0 adds a PLTE chunk
/// (and selects PNG_COLOR_TYPE_PALETTE data semantics).
inline void write_test_png(const fs::path& path, int color_type, int bit_depth,
                           int height, int width,
                           const std::vector<unsigned char>& data,
                           int palette_size = 0, bool interlaced = false) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (fp == nullptr) throw std::runtime_error("fixture fopen failed");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                              nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  std::vector<png_color> palette(palette_size);
  const std::size_t rowbytes = data.size() / height;
  for (int r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(data.data()) + r * rowbytes;
  }
  for (int i = 0; i < palette_size; ++i) {
    palette[i].red = static_cast<png_byte>(255 - i);
    palette[i].green = static_cast<png_byte>(7 * i);
    palette[i].blue = static_cast<png_byte>(i);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("fixture png write failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               interlaced ? PNG_INTERLACE_ADAM7 : PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette_size > 0) png_set_PLTE(png, info, palette.data(), palette_size);
  png_write_info(png, info);
  png_write_image(png, rows.data());  // writes all Adam7 passes if interlaced
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// ---------------------------------------------------------------------------
// Synthetic datasets
//
// Every image is one foreground band over a clean background, sized so the
// interesting thresholds fall strictly between grid points (as float32):
//
//   rows [0, H/4)      object, activation `hi`, salient, gt = class code
//   rows [H/4, H/2)    object, activation `mid`, salient, gt = class code
//   row  H/2 (strip)   salient false-positive strip, gt = background:
//                        col 0 fixed at 0.96 so the class union never
//                        empties below tau 0.95, cols 1.. at `noise`
//   rows (H/2, H)      background, not salient, activation 0
//
// Image i carries class code (i % class_count) + 1 only.
// ---------------------------------------------------------------------------

enum class FixtureKind {
  kAccurate,      // pseudo label equals gt at any tau < 0.9; no strip
  kPeakAt03,      // on grid 0.1:0.9:0.1 the unique best tau is 0.3
  kSparseCam,     // weak activations: best tau is 0.1 on both stock grids
  kSaturatedCam,  // strong activations: best tau is 0.4 on both stock grids
};

struct FixtureParams {
  double hi = 0.0;
  double mid = 0.0;
  double noise = 0.0;
  bool strip = false;
};

inline FixtureParams params_for(FixtureKind kind) {
  switch (kind) {
    case FixtureKind::kAccurate:
      return {0.9, 0.9, 0.0, false};
    case FixtureKind::kPeakAt03:
      return {0.45, 0.35, 0.25, true};
    case FixtureKind::kSparseCam:
      return {0.16, 0.16, 0.08, true};
    case FixtureKind::kSaturatedCam:
      return {0.93, 0.93, 0.37, true};
  }
  throw std::logic_error("unknown fixture kind");
}

inline double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

struct FixtureImage {
  std::string id;
  int class_code = 0;  // 1-based label code
  wbed::ActivationStack activations{1, 1, 1, {0.0}};
  wbed::SaliencyMap saliency{1, 1, {0.0}};
  wbed::LabelMask gt{1, 1, 1, {0}};
};

inline FixtureImage make_image(FixtureKind kind, int index, int class_count,
                               int height, int width) {
  if (height % 4 != 0) throw std::logic_error("fixture height must be 4k");
  const FixtureParams p = params_for(kind);
  const int class_code = index % class_count + 1;
  const int plane = height * width;

  std::vector<double> planes(static_cast<std::size_t>(class_count) * plane,
                             0.0);
  std::vector<double> sal(static_cast<std::size_t>(plane), 0.0);
  std::vector<std::uint8_t> gt(static_cast<std::size_t>(plane), 0);
  const std::size_t base = static_cast<std::size_t>(class_code - 1) * plane;

  for (int r = 0; r < height / 2; ++r) {
    const double a = r < height / 4 ? p.hi : p.mid;
    for (int c = 0; c < width; ++c) {
      const int px = r * width + c;
      planes[base + px] = f32(a);
      sal[px] = 1.0;
      gt[px] = static_cast<std::uint8_t>(class_code);
    }
  }
  if (p.strip) {
    const int r = height / 2;
    for (int c = 0; c < width; ++c) {
      const int px = r * width + c;
      planes[base + px] = f32(c == 0 ? 0.96 : p.noise);
      sal[px] = 1.0;
    }
  }
  if (kind == FixtureKind::kAccurate) {
    for (int c = 0; c < width; ++c) {
      planes[base + (height - 1) * width + c] = f32(0.02);
    }
  }

  FixtureImage img;
  img.id = "img" + std::to_string(index);
  img.class_code = class_code;
  img.activations =
      wbed::ActivationStack(class_count, height, width, std::move(planes));
  img.saliency = wbed::SaliencyMap(height, width, std::move(sal));
  img.gt = wbed::LabelMask(class_count, height, width, std::move(gt));
  return img;
}

struct FixtureDataset {
  fs::path root;
  fs::path actmaps;
  fs::path saliency;
  fs::path gt;
  fs::path manifest;
};

/// Writes a full on-disk dataset under root: actmaps/, saliency/, gt/ and
/// manifest.jsonl.
inline FixtureDataset write_fixture(const fs::path& root, FixtureKind kind,
                                    int images, int class_count,
                                    int height = 16, int width = 16) {
  FixtureDataset d;
  d.root = root;
  d.actmaps = root / "actmaps";
  d.saliency = root / "saliency";
  d.gt = root / "gt";
  d.manifest = root / "manifest.jsonl";
  fs::create_directories(d.actmaps);
  fs::create_directories(d.saliency);
  fs::create_directories(d.gt);

  std::ofstream manifest(d.manifest, std::ios::binary | std::ios::trunc);
  for (int i = 0; i < images; ++i) {
    const FixtureImage img = make_image(kind, i, class_count, height, width);
    wbed::write_actmap(img.activations, d.actmaps / (img.id + ".actmap"));
    wbed::write_gray_png(img.saliency, d.saliency / (img.id + ".png"));
    wbed::write_label_png(img.gt, d.gt / (img.id + ".png"));
    manifest << "{\"id\":\"" << img.id << "\",\"labels\":["
             << img.class_code - 1 << "]}\n";
  }
  if (!manifest) throw std::runtime_error("fixture manifest write failed");
  return d;
}

/// Copies saliency maps from src to dst, flipping every fifth salient pixel
/// (row-major order over salient pixels, so 20% of them) to non-salient.
inline void degrade_saliency(const fs::path& src, const fs::path& dst,
                             const wbed::Manifest& manifest) {
  fs::create_directories(dst);
  for (const wbed::ManifestEntry& entry : manifest.entries) {
    const wbed::SaliencyMap in = wbed::read_gray_png(src / (entry.id + ".png"));
    std::vector<double> values(in.values().begin(), in.values().end());
    std::size_t salient_seen = 0;
    for (double& v : values) {
      if (v >= 0.5) {
        if (salient_seen % 5 == 0) v = 0.0;
        ++salient_seen;
      }
    }
    const wbed::SaliencyMap out(in.height(), in.width(), std::move(values));
    wbed::write_gray_png(out, dst / (entry.id + ".png"));
  }
}

// ---------------------------------------------------------------------------
// CLI runner
// ---------------------------------------------------------------------------

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a shell command, capturing exit code, stdout, and stderr.
inline CommandResult run_command(const std::string& cmd) {
  const fs::path out_file = unique_path("wbed-cli-out");
  const fs::path err_file = unique_path("wbed-cli-err");
  const std::string full = cmd + " >'" + out_file.string() + "' 2>'" +
                           err_file.string() + "'";
  const int status = std::system(full.c_str());
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_all(out_file);
  r.err = read_all(err_file);
  std::error_code ec;
  fs::remove(out_file, ec);
  fs::remove(err_file, ec);
  return r;
}

}  // namespace fixtures

#endif  // WBED_TESTS_FIXTURES_HPP_
