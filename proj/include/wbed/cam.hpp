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
#ifndef WBED_CAM_HPP_
#define WBED_CAM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wbed/error.hpp"
#include "wbed/types.hpp"

namespace wbed {

/// Raw feature planes from a classifier's last convolutional layer:
/// C x H x W finite reals, unbounded sign.
class FeatureStack {
 public:
  FeatureStack(int class_count, int height, int width,
               std::vector<double> values)
      : class_count_(class_count),
        height_(height),
        width_(width),
        values_(std::move(values)) {
    detail::check_class_count(class_count_);
    detail::check_extent(height_, width_);
    const std::size_t expected =
        static_cast<std::size_t>(class_count_) * height_ * width_;
    if (values_.size() != expected) {
      fail(ErrorCode::kDimensionMismatch,
           "feature stack expects " + std::to_string(expected) +
               " values, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        fail(ErrorCode::kNonFinite,
             "feature value at index " + std::to_string(i) + " is not finite");
      }
    }
  }

  int class_count() const { return class_count_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::span<const double> plane(int c) const {
    return {values_.data() + static_cast<std::size_t>(c) * plane_size(),
            plane_size()};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  int class_count_;
  int height_;
  int width_;
  std::vector<double> values_;
};

/// Per-channel activation-map normalization:
/// A_c = relu(F_c) / max(relu(F_c)). A channel with no positive value maps to
/// the all-zero plane; any channel with one maps its maximum to exactly 1.0.
inline ActivationStack normalize_cam(const FeatureStack& features) {
  const std::size_t plane = features.plane_size();
  std::vector<double> out(features.values().size());
  for (int c = 0; c < features.class_count(); ++c) {
    const std::span<const double> src = features.plane(c);
    double peak = 0.0;
    for (double v : src) peak = std::max(peak, v);
    double* dst = out.data() + static_cast<std::size_t>(c) * plane;
    if (peak == 0.0) {
      std::fill(dst, dst + plane, 0.0);
    } else {
      for (std::size_t i = 0; i < plane; ++i) {
        dst[i] = src[i] > 0.0 ? src[i] / peak : 0.0;
      }
    }
  }
  return ActivationStack(features.class_count(), features.height(),
                         features.width(), std::move(out));
}

namespace detail {

// log(1 + exp(x)) without overflow for any finite x.
inline double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

}  // namespace detail

/// Mean binary cross-entropy over C independent sigmoid outputs:
/// (1/C) sum_c -[y_c log s(z_c) + (1 - y_c) log(1 - s(z_c))], evaluated in
/// the softplus form so logits up to |z| = 1e3 cannot overflow.
inline double bce_loss(const LogitVector& logits,
                       const ImageLabelVector& labels) {
  if (logits.size() != labels.size()) {
    fail(ErrorCode::kLengthMismatch,
         "logit vector has " + std::to_string(logits.size()) +
             " entries but label vector has " + std::to_string(labels.size()));
  }
  double total = 0.0;
  for (int c = 0; c < logits.size(); ++c) {
    const double z = logits.at(c);
    total += labels.present(c) ? detail::softplus(-z) : detail::softplus(z);
  }
  return total / logits.size();
}

/// Global average pooling: per-channel arithmetic mean of the feature planes.
inline LogitVector global_average_pool(const FeatureStack& features) {
  std::vector<double> logits(static_cast<std::size_t>(features.class_count()));
  for (int c = 0; c < features.class_count(); ++c) {
    double sum = 0.0;
    for (double v : features.plane(c)) sum += v;
    logits[static_cast<std::size_t>(c)] =
        sum / static_cast<double>(features.plane_size());
  }
  return LogitVector(std::move(logits));
}

}  // namespace wbed

#endif  // WBED_CAM_HPP_
