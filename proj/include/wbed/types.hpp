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
#ifndef WBED_TYPES_HPP_
#define WBED_TYPES_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wbed/error.hpp"

namespace wbed {

/// Mask code for pixels excluded from training and evaluation.
inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Label codes are 0 (background), 1..C (classes), 255 (ignore), so C tops
/// out one below the ignore code.
inline constexpr int kMaxClassCount = 254;

namespace detail {

inline void check_class_count(int class_count) {
  if (class_count < 1 || class_count > kMaxClassCount) {
    fail(ErrorCode::kValueOutOfRange,
         "class_count must be in [1, " + std::to_string(kMaxClassCount) +
             "], got " + std::to_string(class_count));
  }
}

inline void check_extent(int height, int width) {
  if (height < 1 || width < 1) {
    fail(ErrorCode::kValueOutOfRange,
         "height and width must be positive, got " + std::to_string(height) +
             "x" + std::to_string(width));
  }
}

inline void check_unit_interval(const std::vector<double>& values,
                                const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      fail(ErrorCode::kNonFinite, std::string(what) + " value at index " +
                                      std::to_string(i) + " is not finite");
    }
    if (v < 0.0 || v > 1.0) {
      fail(ErrorCode::kValueOutOfRange,
           std::string(what) + " value " + std::to_string(v) + " at index " +
               std::to_string(i) + " is outside [0, 1]");
    }
  }
}

}  // namespace detail

/// Per-image stack of C class activation planes, each HxW with values in
/// [0, 1]. Storage is plane-major then row-major, the one canonical layout
/// shared with the .actmap file format.
class ActivationStack {
 public:
  ActivationStack(int class_count, int height, int width,
                  std::vector<double> planes)
      : class_count_(class_count),
        height_(height),
        width_(width),
        planes_(std::move(planes)) {
    detail::check_class_count(class_count_);
    detail::check_extent(height_, width_);
    const std::size_t expected = static_cast<std::size_t>(class_count_) *
                                 height_ * width_;
    if (planes_.size() != expected) {
      fail(ErrorCode::kDimensionMismatch,
           "activation stack expects " + std::to_string(expected) +
               " values, got " + std::to_string(planes_.size()));
    }
    detail::check_unit_interval(planes_, "activation");
  }

  int class_count() const { return class_count_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  std::span<const double> plane(int c) const {
    return {planes_.data() + static_cast<std::size_t>(c) * plane_size(),
            plane_size()};
  }

  double at(int c, int row, int col) const {
    return planes_[(static_cast<std::size_t>(c) * height_ + row) * width_ +
                   col];
  }

  const std::vector<double>& planes() const { return planes_; }

 private:
  int class_count_;
  int height_;
  int width_;
  std::vector<double> planes_;
};

/// Class-agnostic foreground map. Soft maps live in [0, 1]; once binarized
/// every value is exactly 0.0 or 1.0 and the flag records that.
class SaliencyMap {
 public:
  SaliencyMap(int height, int width, std::vector<double> values,
              bool binarized = false)
      : height_(height),
        width_(width),
        values_(std::move(values)),
        binarized_(binarized) {
    detail::check_extent(height_, width_);
    if (values_.size() != static_cast<std::size_t>(height_) * width_) {
      fail(ErrorCode::kDimensionMismatch,
           "saliency map expects " +
               std::to_string(static_cast<std::size_t>(height_) * width_) +
               " values, got " + std::to_string(values_.size()));
    }
    detail::check_unit_interval(values_, "saliency");
    if (binarized_) {
      for (double v : values_) {
        if (v != 0.0 && v != 1.0) {
          fail(ErrorCode::kNotBinarized,
               "map flagged binarized holds value " + std::to_string(v));
        }
      }
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  bool binarized() const { return binarized_; }
  std::span<const double> values() const { return values_; }
  double at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }

 private:
  int height_;
  int width_;
  std::vector<double> values_;
  bool binarized_;
};

/// HxW discrete mask: 0 background, 1..C classes, 255 ignore.
class LabelMask {
 public:
  LabelMask(int class_count, int height, int width,
            std::vector<std::uint8_t> values)
      : class_count_(class_count),
        height_(height),
        width_(width),
        values_(std::move(values)) {
    detail::check_class_count(class_count_);
    detail::check_extent(height_, width_);
    if (values_.size() != static_cast<std::size_t>(height_) * width_) {
      fail(ErrorCode::kDimensionMismatch,
           "label mask expects " +
               std::to_string(static_cast<std::size_t>(height_) * width_) +
               " values, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const std::uint8_t v = values_[i];
      if (v != kIgnoreLabel && v > class_count_) {
        fail(ErrorCode::kInvalidLabelValue,
             "label value " + std::to_string(v) + " at index " +
                 std::to_string(i) + " is outside {0.." +
                 std::to_string(class_count_) + ", 255}");
      }
    }
  }

  int class_count() const { return class_count_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::span<const std::uint8_t> values() const { return values_; }
  std::uint8_t at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }

 private:
  int class_count_;
  int height_;
  int width_;
  std::vector<std::uint8_t> values_;
};

/// C presence flags: which classes appear in the image-level annotation.
class ImageLabelVector {
 public:
  explicit ImageLabelVector(std::vector<std::uint8_t> flags)
      : flags_(std::move(flags)) {
    if (flags_.empty()) {
      fail(ErrorCode::kInvalidArgument, "label vector must not be empty");
    }
    for (std::uint8_t f : flags_) {
      if (f > 1) {
        fail(ErrorCode::kValueOutOfRange,
             "presence flag must be 0 or 1, got " + std::to_string(f));
      }
    }
  }

  /// Builds the flag vector from 0-based class indices.
  static ImageLabelVector from_class_indices(int class_count,
                                             const std::vector<int>& indices) {
    detail::check_class_count(class_count);
    std::vector<std::uint8_t> flags(static_cast<std::size_t>(class_count), 0);
    for (int idx : indices) {
      if (idx < 0 || idx >= class_count) {
        fail(ErrorCode::kLabelOutOfRange,
             "class index " + std::to_string(idx) + " is outside [0, " +
                 std::to_string(class_count) + ")");
      }
      flags[static_cast<std::size_t>(idx)] = 1;
    }
    return ImageLabelVector(std::move(flags));
  }

  int size() const { return static_cast<int>(flags_.size()); }
  bool present(int c) const { return flags_[static_cast<std::size_t>(c)] != 0; }
  std::span<const std::uint8_t> flags() const { return flags_; }

 private:
  std::vector<std::uint8_t> flags_;
};

/// Pre-sigmoid classifier scores.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values)
      : values_(std::move(values)) {
    if (values_.empty()) {
      fail(ErrorCode::kInvalidArgument, "logit vector must not be empty");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        fail(ErrorCode::kNonFinite,
             "logit at index " + std::to_string(i) + " is not finite");
      }
    }
  }

  int size() const { return static_cast<int>(values_.size()); }
  double at(int c) const { return values_[static_cast<std::size_t>(c)]; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// (C+1)x(C+1) pixel-count matrix over {background, classes}. Rows index the
/// ground-truth code, columns the prediction; pixels ignored on either side
/// are tallied separately so total bookkeeping stays exact.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int class_count)
      : class_count_(class_count),
        counts_(static_cast<std::size_t>(class_count + 1) * (class_count + 1),
                0),
        ignored_pixels_(0) {
    detail::check_class_count(class_count_);
  }

  int class_count() const { return class_count_; }
  int bin_count() const { return class_count_ + 1; }

  std::uint64_t count(int gt, int pred) const {
    return counts_[static_cast<std::size_t>(gt) * bin_count() + pred];
  }

  std::uint64_t& count_ref(int gt, int pred) {
    return counts_[static_cast<std::size_t>(gt) * bin_count() + pred];
  }

  std::uint64_t ignored_pixels() const { return ignored_pixels_; }
  void add_ignored(std::uint64_t n) { ignored_pixels_ += n; }

  std::uint64_t counted_pixels() const {
    std::uint64_t total = 0;
    for (std::uint64_t v : counts_) total += v;
    return total;
  }

  std::uint64_t total_pixels() const {
    return counted_pixels() + ignored_pixels_;
  }

  /// Element-wise sum; commutative and associative by construction.
  void merge(const ConfusionMatrix& other) {
    if (other.class_count_ != class_count_) {
      fail(ErrorCode::kClassCountMismatch,
           "cannot merge matrices with class counts " +
               std::to_string(class_count_) + " and " +
               std::to_string(other.class_count_));
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      counts_[i] += other.counts_[i];
    }
    ignored_pixels_ += other.ignored_pixels_;
  }

  friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    return a.class_count_ == b.class_count_ && a.counts_ == b.counts_ &&
           a.ignored_pixels_ == b.ignored_pixels_;
  }

 private:
  int class_count_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t ignored_pixels_;
};

/// Checks that an activation stack, a saliency map, and an image-level label
/// vector describe the same image. Mismatched dimensions are an error, never
/// reconciled by resampling.
inline void validate_pair(const ActivationStack& a, const SaliencyMap& s,
                          const ImageLabelVector& y) {
  if (a.height() != s.height() || a.width() != s.width()) {
    fail(ErrorCode::kDimensionMismatch,
         "activation stack is " + std::to_string(a.height()) + "x" +
             std::to_string(a.width()) + " but saliency map is " +
             std::to_string(s.height()) + "x" + std::to_string(s.width()));
  }
  if (a.class_count() != y.size()) {
    fail(ErrorCode::kDimensionMismatch,
         "activation stack has " + std::to_string(a.class_count()) +
             " classes but label vector has " + std::to_string(y.size()));
  }
}

}  // namespace wbed

#endif  // WBED_TYPES_HPP_
