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
#ifndef WBED_EXPERIMENTS_HPP_
#define WBED_EXPERIMENTS_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wbed/error.hpp"
#include "wbed/fusion.hpp"
#include "wbed/io.hpp"
#include "wbed/metrics.hpp"
#include "wbed/parallel.hpp"
#include "wbed/types.hpp"

namespace wbed {

/// Threshold grid {start, start+step, ..., <= stop}.
class SweepGrid {
 public:
  SweepGrid(double start, double stop, double step)
      : start_(start), stop_(stop), step_(step) {
    if (!(start >= 0.0 && start <= stop && stop <= 1.0)) {
      fail(ErrorCode::kInvalidArgument,
           "grid needs 0 <= start <= stop <= 1, got start=" +
               std::to_string(start) + " stop=" + std::to_string(stop));
    }
    if (!(step > 0.0)) {
      fail(ErrorCode::kInvalidArgument,
           "grid step must be positive, got " + std::to_string(step));
    }
  }

  static SweepGrid default_grid() { return SweepGrid(0.05, 0.95, 0.05); }

  double start() const { return start_; }
  double stop() const { return stop_; }
  double step() const { return step_; }

  /// Enumerates start + i*step (not cumulative sums, to keep rounding flat).
  /// The tolerance only absorbs representation noise; with any sane step it
  /// never admits an extra point.
  std::vector<double> values() const {
    std::vector<double> taus;
    for (int i = 0;; ++i) {
      const double tau = start_ + i * step_;
      if (tau > stop_ + 1e-12) break;
      if (taus.size() == 100000) {
        fail(ErrorCode::kInvalidArgument,
             "grid has more than 100000 points; step is too small");
      }
      taus.push_back(std::min(tau, 1.0));
    }
    return taus;
  }

 private:
  double start_;
  double stop_;
  double step_;
};

struct SweepRow {
  double tau = 0.0;
  double miou = 0.0;
  std::vector<std::optional<double>> per_class_iou;
  double ignored_fraction = 0.0;
};

/// Rows ordered by tau ascending; best_tau is the SMALLEST tau reaching the
/// maximal miou.
struct SweepResult {
  std::vector<SweepRow> rows;
  double best_tau = 0.0;
  double best_miou = 0.0;
};

/// miou per (method, saliency source) cell, row-major over methods.
struct CrossMatrix {
  std::vector<std::string> method_names;
  std::vector<std::string> saliency_names;
  std::vector<double> miou;

  double at(std::size_t method, std::size_t saliency) const {
    return miou[method * saliency_names.size() + saliency];
  }
};

namespace detail {

[[noreturn]] inline void fail_for_image(const std::string& id,
                                        const Error& e) {
  fail(e.code(), "image '" + id + "': " + e.message());
}

}  // namespace detail

/// Fuses and scores every manifest image: for each id, loads
/// <actmap_root>/<id>.actmap, <saliency_root>/<id>.png (soft saliency) and
/// <gt_root>/<id>.png (ground truth), binarizes, fuses at config.tau, and
/// accumulates the confusion matrix. The class count comes from the first
/// image's activation stack; every other image must agree. Images run on
/// `jobs` workers with one matrix each, merged in worker order, so the
/// report is identical for every jobs value.
inline MetricReport evaluate_dataset(const Manifest& manifest,
                                     const std::filesystem::path& actmap_root,
                                     const std::filesystem::path& saliency_root,
                                     const std::filesystem::path& gt_root,
                                     const FusionConfig& config,
                                     int jobs = 1) {
  if (manifest.entries.empty()) {
    fail(ErrorCode::kInvalidArgument, "manifest has no entries");
  }
  if (jobs < 1) {
    fail(ErrorCode::kInvalidArgument,
         "jobs must be at least 1, got " + std::to_string(jobs));
  }
  const std::string& first_id = manifest.entries.front().id;
  int class_count = 0;
  try {
    class_count = static_cast<int>(
        read_actmap_header(actmap_root / (first_id + ".actmap")).class_count);
  } catch (const Error& e) {
    detail::fail_for_image(first_id, e);
  }

  const std::size_t n = manifest.entries.size();
  const std::size_t workers = std::min(static_cast<std::size_t>(jobs), n);
  std::vector<ConfusionMatrix> partial(workers, ConfusionMatrix(class_count));

  parallel_for(n, jobs, [&](std::size_t worker, std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    try {
      const ActivationStack a =
          read_actmap(actmap_root / (entry.id + ".actmap"));
      if (a.class_count() != class_count) {
        fail(ErrorCode::kClassCountMismatch,
             "activation stack has " + std::to_string(a.class_count()) +
                 " classes, dataset has " + std::to_string(class_count));
      }
      const SaliencyMap soft = read_gray_png(saliency_root / (entry.id + ".png"));
      const LabelMask gt =
          read_label_png(gt_root / (entry.id + ".png"), class_count);
      const ImageLabelVector y =
          ImageLabelVector::from_class_indices(class_count, entry.labels);
      const SaliencyMap binary =
          binarize_saliency(soft, config.saliency_threshold());
      const LabelMask pred = generate_pseudo_label(a, binary, y, config.tau());
      accumulate(partial[worker], pred, gt);
    } catch (const Error& e) {
      detail::fail_for_image(entry.id, e);
    }
  });

  ConfusionMatrix total(class_count);
  for (const ConfusionMatrix& m : partial) total.merge(m);
  return finalize(total);
}

/// Scores already-written prediction masks against ground truth:
/// <pred_root>/<id>.png vs <gt_root>/<id>.png for every manifest id.
inline MetricReport evaluate_predictions(const Manifest& manifest,
                                         const std::filesystem::path& pred_root,
                                         const std::filesystem::path& gt_root,
                                         int class_count, int jobs = 1) {
  if (manifest.entries.empty()) {
    fail(ErrorCode::kInvalidArgument, "manifest has no entries");
  }
  if (jobs < 1) {
    fail(ErrorCode::kInvalidArgument,
         "jobs must be at least 1, got " + std::to_string(jobs));
  }
  const std::size_t n = manifest.entries.size();
  const std::size_t workers = std::min(static_cast<std::size_t>(jobs), n);
  std::vector<ConfusionMatrix> partial(workers, ConfusionMatrix(class_count));

  parallel_for(n, jobs, [&](std::size_t worker, std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    try {
      const LabelMask pred =
          read_label_png(pred_root / (entry.id + ".png"), class_count);
      const LabelMask gt =
          read_label_png(gt_root / (entry.id + ".png"), class_count);
      accumulate(partial[worker], pred, gt);
    } catch (const Error& e) {
      detail::fail_for_image(entry.id, e);
    }
  });

  ConfusionMatrix total(class_count);
  for (const ConfusionMatrix& m : partial) total.merge(m);
  return finalize(total);
}

/// One evaluate_dataset per grid point, rows ascending in tau. Strict
/// greater-than keeps the first (smallest) tau on ties.
inline SweepResult sweep(const Manifest& manifest,
                         const std::filesystem::path& actmap_root,
                         const std::filesystem::path& saliency_root,
                         const std::filesystem::path& gt_root,
                         const SweepGrid& grid,
                         double saliency_threshold = 0.5, int jobs = 1) {
  SweepResult result;
  for (const double tau : grid.values()) {
    const FusionConfig config(tau, saliency_threshold);
    const MetricReport report = evaluate_dataset(
        manifest, actmap_root, saliency_root, gt_root, config, jobs);
    SweepRow row;
    row.tau = tau;
    row.miou = report.miou;
    row.per_class_iou = report.per_class_iou;
    row.ignored_fraction = report.ignored_fraction;
    const bool better = result.rows.empty() || row.miou > result.best_miou;
    result.rows.push_back(std::move(row));
    if (better) {
      result.best_miou = report.miou;
      result.best_tau = tau;
    }
  }
  return result;
}

/// Full methods x saliency-sources grid; cell (m, s) evaluates method m's
/// activation maps against saliency source s at m's own tau. Any failing
/// cell aborts the whole matrix.
inline CrossMatrix cross_matrix(
    const std::vector<std::pair<std::string, std::filesystem::path>>& methods,
    const std::vector<std::pair<std::string, std::filesystem::path>>&
        saliencies,
    const Manifest& manifest, const std::filesystem::path& gt_root,
    const std::map<std::string, double>& per_method_tau,
    double saliency_threshold = 0.5, int jobs = 1) {
  if (methods.empty() || saliencies.empty()) {
    fail(ErrorCode::kInvalidArgument,
         "cross matrix needs at least one method and one saliency source");
  }
  for (const auto& [name, root] : methods) {
    if (!per_method_tau.contains(name)) {
      fail(ErrorCode::kInvalidArgument, "no tau given for method '" + name +
                                            "'");
    }
  }

  CrossMatrix grid;
  grid.method_names.reserve(methods.size());
  grid.saliency_names.reserve(saliencies.size());
  for (const auto& [name, root] : methods) grid.method_names.push_back(name);
  for (const auto& [name, root] : saliencies) {
    grid.saliency_names.push_back(name);
  }
  grid.miou.reserve(methods.size() * saliencies.size());
  for (const auto& [method_name, actmap_root] : methods) {
    const FusionConfig config(per_method_tau.at(method_name),
                              saliency_threshold);
    for (const auto& [saliency_name, saliency_root] : saliencies) {
      const MetricReport report = evaluate_dataset(
          manifest, actmap_root, saliency_root, gt_root, config, jobs);
      grid.miou.push_back(report.miou);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// CSV reports: fixed six decimals, '\n' newlines, absent classes as empty
// cells, byte-identical across runs.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt6(const std::optional<double>& v) {
  return v.has_value() ? fmt6(*v) : std::string();
}

inline std::ofstream open_for_write_text(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorCode::kIoError, "cannot open for writing: " + path.string());
  }
  return out;
}

inline void finish_write(std::ofstream& out,
                         const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    fail(ErrorCode::kIoError, "write failed: " + path.string());
  }
}

inline void check_csv_name(const std::string& name) {
  if (name.empty() || name.find_first_of(",\n\r\"") != std::string::npos) {
    fail(ErrorCode::kInvalidArgument,
         "name '" + name + "' cannot be used in a CSV report");
  }
}

}  // namespace detail

/// tau,miou,ignored_fraction,iou_0,...,iou_C with one row per grid point.
inline void write_report(const SweepResult& result,
                         const std::filesystem::path& path) {
  if (result.rows.empty()) {
    fail(ErrorCode::kInvalidArgument, "sweep result has no rows");
  }
  std::ofstream out = detail::open_for_write_text(path);
  out << "tau,miou,ignored_fraction";
  for (std::size_t k = 0; k < result.rows.front().per_class_iou.size(); ++k) {
    out << ",iou_" << k;
  }
  out << "\n";
  for (const SweepRow& row : result.rows) {
    out << detail::fmt6(row.tau) << ',' << detail::fmt6(row.miou) << ','
        << detail::fmt6(row.ignored_fraction);
    for (const std::optional<double>& iou : row.per_class_iou) {
      out << ',' << detail::fmt6(iou);
    }
    out << "\n";
  }
  detail::finish_write(out, path);
}

/// method,<saliency source names...> with one row per method.
inline void write_report(const CrossMatrix& grid,
                         const std::filesystem::path& path) {
  detail::check_csv_name("method");
  for (const std::string& name : grid.method_names) {
    detail::check_csv_name(name);
  }
  for (const std::string& name : grid.saliency_names) {
    detail::check_csv_name(name);
  }
  std::ofstream out = detail::open_for_write_text(path);
  out << "method";
  for (const std::string& name : grid.saliency_names) out << ',' << name;
  out << "\n";
  for (std::size_t m = 0; m < grid.method_names.size(); ++m) {
    out << grid.method_names[m];
    for (std::size_t s = 0; s < grid.saliency_names.size(); ++s) {
      out << ',' << detail::fmt6(grid.at(m, s));
    }
    out << "\n";
  }
  detail::finish_write(out, path);
}

/// Single-row summary: miou, pixel accuracy, ignored fraction, then per-class
/// iou/precision/recall columns.
inline void write_report(const MetricReport& report,
                         const std::filesystem::path& path) {
  std::ofstream out = detail::open_for_write_text(path);
  const std::size_t bins = report.per_class_iou.size();
  out << "miou,pixel_accuracy,ignored_fraction";
  for (std::size_t k = 0; k < bins; ++k) out << ",iou_" << k;
  for (std::size_t k = 0; k < bins; ++k) out << ",precision_" << k;
  for (std::size_t k = 0; k < bins; ++k) out << ",recall_" << k;
  out << "\n";
  out << detail::fmt6(report.miou) << ','
      << detail::fmt6(report.pixel_accuracy) << ','
      << detail::fmt6(report.ignored_fraction);
  for (const std::optional<double>& v : report.per_class_iou) {
    out << ',' << detail::fmt6(v);
  }
  for (const std::optional<double>& v : report.per_class_precision) {
    out << ',' << detail::fmt6(v);
  }
  for (const std::optional<double>& v : report.per_class_recall) {
    out << ',' << detail::fmt6(v);
  }
  out << "\n";
  detail::finish_write(out, path);
}

}  // namespace wbed

#endif  // WBED_EXPERIMENTS_HPP_
