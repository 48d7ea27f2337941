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
#ifndef WBED_FUSION_HPP_
#define WBED_FUSION_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wbed/error.hpp"
#include "wbed/types.hpp"

namespace wbed {

/// Pseudo-label generation knobs: the activation threshold tau and the cutoff
/// used to binarize soft saliency maps before fusion.
class FusionConfig {
 public:
  explicit FusionConfig(double tau, double saliency_threshold = 0.5)
      : tau_(tau), saliency_threshold_(saliency_threshold) {
    if (!std::isfinite(tau_) || tau_ < 0.0 || tau_ > 1.0) {
      fail(ErrorCode::kThresholdOutOfRange,
           "tau must be in [0, 1], got " + std::to_string(tau_));
    }
    if (!std::isfinite(saliency_threshold_) || saliency_threshold_ <= 0.0 ||
        saliency_threshold_ >= 1.0) {
      fail(ErrorCode::kThresholdOutOfRange,
           "saliency threshold must be in (0, 1), got " +
               std::to_string(saliency_threshold_));
    }
  }

  double tau() const { return tau_; }
  double saliency_threshold() const { return saliency_threshold_; }

 private:
  double tau_;
  double saliency_threshold_;
};

/// Cuts a soft saliency map to {0, 1} at the given threshold. The cutoff is
/// inclusive (value >= threshold is salient), so the operation is idempotent
/// on maps that are already binary for any threshold in (0, 1].
inline SaliencyMap binarize_saliency(const SaliencyMap& s, double threshold) {
  if (!std::isfinite(threshold) || threshold <= 0.0 || threshold > 1.0) {
    fail(ErrorCode::kThresholdOutOfRange,
         "binarization threshold must be in (0, 1], got " +
             std::to_string(threshold));
  }
  std::vector<double> out(s.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = s.values()[i] >= threshold ? 1.0 : 0.0;
  }
  return SaliencyMap(s.height(), s.width(), std::move(out),
                     /*binarized=*/true);
}

/// Fuses activations with a binary saliency map into a pseudo label.
///
/// Per pixel, the background cue is 1 - S and the cue for class c is A_c when
/// A_c > tau and class c is present in the image-level labels, else 0. The
/// label is the argmax over the stacked (C+1)-vector [bg, fg_1..fg_C], ties
/// broken toward the lowest index. Salient pixels that still end up
/// background become the ignore code 255.
inline LabelMask generate_pseudo_label(const ActivationStack& activations,
                                       const SaliencyMap& saliency,
                                       const ImageLabelVector& labels,
                                       double tau) {
  if (!saliency.binarized()) {
    fail(ErrorCode::kNotBinarized,
         "pseudo-label generation requires a binarized saliency map; "
         "call binarize_saliency first");
  }
  validate_pair(activations, saliency, labels);
  if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) {
    fail(ErrorCode::kThresholdOutOfRange,
         "tau must be in [0, 1], got " + std::to_string(tau));
  }

  const std::size_t plane = activations.plane_size();
  std::vector<double> best(plane);
  std::vector<std::uint8_t> code(plane, 0);

  for (std::size_t p = 0; p < plane; ++p) {
    best[p] = 1.0 - saliency.values()[p];
  }
  for (int c = 0; c < activations.class_count(); ++c) {
    if (!labels.present(c)) continue;
    const std::span<const double> a = activations.plane(c);
    const std::uint8_t label = static_cast<std::uint8_t>(c + 1);
    for (std::size_t p = 0; p < plane; ++p) {
      const double v = a[p];
      if (v > tau && v > best[p]) {
        best[p] = v;
        code[p] = label;
      }
    }
  }
  for (std::size_t p = 0; p < plane; ++p) {
    if (saliency.values()[p] == 1.0 && code[p] == 0) {
      code[p] = kIgnoreLabel;
    }
  }
  return LabelMask(activations.class_count(), activations.height(),
                   activations.width(), std::move(code));
}

}  // namespace wbed

#endif  // WBED_FUSION_HPP_
