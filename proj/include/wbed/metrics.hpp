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
#ifndef WBED_METRICS_HPP_
#define WBED_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wbed/error.hpp"
#include "wbed/fusion.hpp"
#include "wbed/types.hpp"

namespace wbed {

/// Segmentation quality summary. Per-class entries are indexed 0..C with 0 =
/// background; a class whose union (or precision/recall denominator) is zero
/// is marked absent with nullopt and excluded from the means.
struct MetricReport {
  std::vector<std::optional<double>> per_class_iou;
  std::vector<std::optional<double>> per_class_precision;
  std::vector<std::optional<double>> per_class_recall;
  double miou = 0.0;
  double pixel_accuracy = 0.0;
  double ignored_fraction = 0.0;
};

/// Adds one prediction/ground-truth mask pair to the matrix. A pixel ignored
/// in EITHER mask is excluded from the counts: pseudo labels carry 255 by
/// construction and must not be scored on those pixels.
inline void accumulate(ConfusionMatrix& m, const LabelMask& pred,
                       const LabelMask& gt) {
  if (pred.height() != gt.height() || pred.width() != gt.width()) {
    fail(ErrorCode::kDimensionMismatch,
         "prediction is " + std::to_string(pred.height()) + "x" +
             std::to_string(pred.width()) + " but ground truth is " +
             std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  if (pred.class_count() != gt.class_count() ||
      pred.class_count() != m.class_count()) {
    fail(ErrorCode::kClassCountMismatch,
         "class counts disagree: matrix " + std::to_string(m.class_count()) +
             ", prediction " + std::to_string(pred.class_count()) +
             ", ground truth " + std::to_string(gt.class_count()));
  }
  const std::span<const std::uint8_t> p = pred.values();
  const std::span<const std::uint8_t> g = gt.values();
  std::uint64_t ignored = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == kIgnoreLabel || g[i] == kIgnoreLabel) {
      ++ignored;
    } else {
      ++m.count_ref(g[i], p[i]);
    }
  }
  m.add_ignored(ignored);
}

/// Reduces an accumulated matrix to IoU / precision / recall per class plus
/// their means. Background participates as class 0; zero-union classes are
/// excluded from the mean rather than scored 0.
inline MetricReport finalize(const ConfusionMatrix& m) {
  const int bins = m.bin_count();
  std::vector<std::uint64_t> row_sum(static_cast<std::size_t>(bins), 0);
  std::vector<std::uint64_t> col_sum(static_cast<std::size_t>(bins), 0);
  std::uint64_t diag_total = 0;
  std::uint64_t counted = 0;
  for (int r = 0; r < bins; ++r) {
    for (int c = 0; c < bins; ++c) {
      const std::uint64_t v = m.count(r, c);
      row_sum[static_cast<std::size_t>(r)] += v;
      col_sum[static_cast<std::size_t>(c)] += v;
      counted += v;
      if (r == c) diag_total += v;
    }
  }

  MetricReport report;
  report.per_class_iou.resize(static_cast<std::size_t>(bins));
  report.per_class_precision.resize(static_cast<std::size_t>(bins));
  report.per_class_recall.resize(static_cast<std::size_t>(bins));

  double iou_sum = 0.0;
  int iou_classes = 0;
  for (int k = 0; k < bins; ++k) {
    const std::uint64_t diag = m.count(k, k);
    const std::uint64_t uni =
        row_sum[static_cast<std::size_t>(k)] +
        col_sum[static_cast<std::size_t>(k)] - diag;
    if (uni > 0) {
      const double iou = static_cast<double>(diag) / static_cast<double>(uni);
      report.per_class_iou[static_cast<std::size_t>(k)] = iou;
      iou_sum += iou;
      ++iou_classes;
    }
    if (col_sum[static_cast<std::size_t>(k)] > 0) {
      report.per_class_precision[static_cast<std::size_t>(k)] =
          static_cast<double>(diag) /
          static_cast<double>(col_sum[static_cast<std::size_t>(k)]);
    }
    if (row_sum[static_cast<std::size_t>(k)] > 0) {
      report.per_class_recall[static_cast<std::size_t>(k)] =
          static_cast<double>(diag) /
          static_cast<double>(row_sum[static_cast<std::size_t>(k)]);
    }
  }
  if (iou_classes == 0) {
    fail(ErrorCode::kNoValidClasses,
         "every class has zero union; nothing to score");
  }
  report.miou = iou_sum / iou_classes;
  report.pixel_accuracy =
      static_cast<double>(diag_total) / static_cast<double>(counted);
  report.ignored_fraction =
      static_cast<double>(m.ignored_pixels()) /
      static_cast<double>(m.total_pixels());
  return report;
}

/// Saliency quality versus a binary reference: mean absolute error plus IoU
/// of the salient class after cutting the candidate at 0.5. Two empty maps
/// count as identical (IoU 1).
struct SaliencyError {
  double mae = 0.0;
  double iou = 0.0;
};

inline SaliencyError saliency_error(const SaliencyMap& s,
                                    const SaliencyMap& gt) {
  if (!gt.binarized()) {
    fail(ErrorCode::kNotBinarized,
         "saliency_error requires a binarized reference map");
  }
  if (s.height() != gt.height() || s.width() != gt.width()) {
    fail(ErrorCode::kDimensionMismatch,
         "candidate is " + std::to_string(s.height()) + "x" +
             std::to_string(s.width()) + " but reference is " +
             std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  }
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < s.values().size(); ++i) {
    const double d = s.values()[i] - gt.values()[i];
    abs_sum += d < 0.0 ? -d : d;
  }

  const SaliencyMap cut = binarize_saliency(s, 0.5);
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  for (std::size_t i = 0; i < cut.values().size(); ++i) {
    const bool a = cut.values()[i] == 1.0;
    const bool b = gt.values()[i] == 1.0;
    if (a && b) ++inter;
    if (a || b) ++uni;
  }
  SaliencyError err;
  err.mae = abs_sum / static_cast<double>(s.values().size());
  err.iou = uni == 0 ? 1.0
                     : static_cast<double>(inter) / static_cast<double>(uni);
  return err;
}

}  // namespace wbed

#endif  // WBED_METRICS_HPP_
