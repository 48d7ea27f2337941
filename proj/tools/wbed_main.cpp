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

// wbed: pseudo-label fusion and evaluation from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 data or runtime error.
// Progress goes to stderr; machine-readable results to stdout and files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "wbed/wbed.hpp"

namespace {

namespace fs = std::filesystem;

int usage_error(const std::string& message) {
  std::cerr << "wbed: usage error: " << message << "\n";
  return 1;
}

int data_error(const std::exception& e) {
  std::cerr << "wbed: error: " << e.what() << "\n";
  return 2;
}

/// Splits "S:E:STEP" into a validated grid; nullopt means usage error
/// (message already printed).
std::optional<wbed::SweepGrid> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t colon = text.find(':', begin);
    const std::string piece =
        text.substr(begin, colon == std::string::npos ? std::string::npos
                                                      : colon - begin);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      usage_error("--grid expects S:E:STEP with numeric fields, got '" +
                  text + "'");
      return std::nullopt;
    }
    if (colon == std::string::npos) break;
    begin = colon + 1;
  }
  if (parts.size() != 3) {
    usage_error("--grid expects exactly three fields S:E:STEP, got '" + text +
                "'");
    return std::nullopt;
  }
  if (!(parts[0] >= 0.0 && parts[0] <= parts[1] && parts[1] <= 1.0)) {
    usage_error("--grid needs 0 <= S <= E <= 1, got '" + text + "'");
    return std::nullopt;
  }
  if (!(parts[2] > 0.0)) {
    usage_error("--grid step must be positive, got '" + text + "'");
    return std::nullopt;
  }
  return wbed::SweepGrid(parts[0], parts[1], parts[2]);
}

/// Splits "name=value,name=value,..." preserving order; nullopt on usage
/// error (message already printed).
std::optional<std::vector<std::pair<std::string, std::string>>> parse_pairs(
    const std::string& flag, const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t comma = text.find(',', begin);
    const std::string piece =
        text.substr(begin, comma == std::string::npos ? std::string::npos
                                                      : comma - begin);
    const std::size_t eq = piece.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == piece.size()) {
      usage_error(flag + " expects comma-separated name=value pairs, got '" +
                  piece + "'");
      return std::nullopt;
    }
    const std::string name = piece.substr(0, eq);
    for (const auto& [seen, value] : pairs) {
      if (seen == name) {
        usage_error(flag + " names a '" + name + "' entry twice");
        return std::nullopt;
      }
    }
    pairs.emplace_back(name, piece.substr(eq + 1));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (pairs.empty()) {
    usage_error(flag + " is empty");
    return std::nullopt;
  }
  return pairs;
}

/// Splits a comma-separated integer list; nullopt on usage error.
std::optional<std::vector<int>> parse_int_list(const std::string& flag,
                                               const std::string& text) {
  std::vector<int> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t comma = text.find(',', begin);
    const std::string piece =
        text.substr(begin, comma == std::string::npos ? std::string::npos
                                                      : comma - begin);
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      usage_error(flag + " expects comma-separated integers, got '" + piece +
                  "'");
      return std::nullopt;
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

bool check_tau(double tau, const std::string& flag, int& rc) {
  if (tau < 0.0 || tau > 1.0) {
    rc = usage_error(flag + " must be in [0, 1], got " + std::to_string(tau));
    return false;
  }
  return true;
}

bool check_saliency_thresh(double t, int& rc) {
  if (t <= 0.0 || t >= 1.0) {
    rc = usage_error("--saliency-thresh must be in (0, 1), got " +
                     std::to_string(t));
    return false;
  }
  return true;
}

bool check_jobs(int jobs, int& rc) {
  if (jobs < 1) {
    rc = usage_error("--jobs must be at least 1, got " + std::to_string(jobs));
    return false;
  }
  return true;
}

bool check_classes(int classes, int& rc) {
  if (classes < 1 || classes > wbed::kMaxClassCount) {
    rc = usage_error("--classes must be in [1, " +
                     std::to_string(wbed::kMaxClassCount) + "], got " +
                     std::to_string(classes));
    return false;
  }
  return true;
}

bool ensure_out_dir(const fs::path& out, int& rc) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::cerr << "wbed: error: cannot create output directory '"
              << out.string() << "': " << ec.message() << "\n";
    rc = 2;
    return false;
  }
  return true;
}

struct FuseArgs {
  std::string actmaps, saliency, manifest, out;
  double tau = 0.0;
  double saliency_thresh = 0.5;
  int jobs = wbed::default_jobs();
};

int run_fuse(const FuseArgs& args) {
  int rc = 0;
  if (!check_tau(args.tau, "--tau", rc)) return rc;
  if (!check_saliency_thresh(args.saliency_thresh, rc)) return rc;
  if (!check_jobs(args.jobs, rc)) return rc;
  if (!ensure_out_dir(args.out, rc)) return rc;
  try {
    const wbed::Manifest manifest = wbed::read_manifest(args.manifest);
    if (manifest.entries.empty()) {
      throw wbed::Error(wbed::ErrorCode::kInvalidArgument,
                        "manifest has no entries");
    }
    std::cerr << "wbed: fuse: " << manifest.entries.size()
              << " images, tau=" << args.tau << "\n";
    const std::string& first_id = manifest.entries.front().id;
    int class_count = 0;
    try {
      class_count = static_cast<int>(
          wbed::read_actmap_header(fs::path(args.actmaps) /
                                   (first_id + ".actmap"))
              .class_count);
    } catch (const wbed::Error& e) {
      throw wbed::Error(e.code(), "image '" + first_id + "': " + e.message());
    }
    wbed::parallel_for(
        manifest.entries.size(), args.jobs,
        [&](std::size_t, std::size_t i) {
          const wbed::ManifestEntry& entry = manifest.entries[i];
          try {
            const wbed::ActivationStack a = wbed::read_actmap(
                fs::path(args.actmaps) / (entry.id + ".actmap"));
            if (a.class_count() != class_count) {
              wbed::fail(wbed::ErrorCode::kClassCountMismatch,
                         "activation stack has " +
                             std::to_string(a.class_count()) +
                             " classes, dataset has " +
                             std::to_string(class_count));
            }
            const wbed::SaliencyMap soft = wbed::read_gray_png(
                fs::path(args.saliency) / (entry.id + ".png"));
            const wbed::SaliencyMap binary =
                wbed::binarize_saliency(soft, args.saliency_thresh);
            const wbed::ImageLabelVector y =
                wbed::ImageLabelVector::from_class_indices(class_count,
                                                           entry.labels);
            const wbed::LabelMask pred =
                wbed::generate_pseudo_label(a, binary, y, args.tau);
            wbed::write_label_png(pred,
                                  fs::path(args.out) / (entry.id + ".png"));
          } catch (const wbed::Error& e) {
            throw wbed::Error(e.code(),
                              "image '" + entry.id + "': " + e.message());
          }
        });
    std::printf("processed=%zu\n", manifest.entries.size());
    return 0;
  } catch (const std::exception& e) {
    return data_error(e);
  }
}

struct SweepArgs {
  std::string actmaps, saliency, manifest, gt, out;
  std::string grid = "0.05:0.95:0.05";
  double saliency_thresh = 0.5;
  int jobs = wbed::default_jobs();
};

int run_sweep(const SweepArgs& args) {
  int rc = 0;
  if (!check_saliency_thresh(args.saliency_thresh, rc)) return rc;
  if (!check_jobs(args.jobs, rc)) return rc;
  const std::optional<wbed::SweepGrid> grid = parse_grid(args.grid);
  if (!grid.has_value()) return 1;
  try {
    const wbed::Manifest manifest = wbed::read_manifest(args.manifest);
    std::cerr << "wbed: sweep: " << manifest.entries.size() << " images, "
              << grid->values().size() << " grid points\n";
    const wbed::SweepResult result =
        wbed::sweep(manifest, args.actmaps, args.saliency, args.gt, *grid,
                    args.saliency_thresh, args.jobs);
    wbed::write_report(result, args.out);
    std::printf("best_tau=%.6f best_miou=%.6f\n", result.best_tau,
                result.best_miou);
    return 0;
  } catch (const std::exception& e) {
    return data_error(e);
  }
}

struct EvalArgs {
  std::string pred, gt, manifest, out;
  int classes = 0;
  int jobs = wbed::default_jobs();
};

int run_eval(const EvalArgs& args) {
  int rc = 0;
  if (!check_classes(args.classes, rc)) return rc;
  if (!check_jobs(args.jobs, rc)) return rc;
  try {
    const wbed::Manifest manifest =
        wbed::read_manifest(args.manifest, args.classes);
    std::cerr << "wbed: eval: " << manifest.entries.size() << " images\n";
    const wbed::MetricReport report = wbed::evaluate_predictions(
        manifest, args.pred, args.gt, args.classes, args.jobs);
    wbed::write_report(report, args.out);
    std::printf("miou=%.6f\n", report.miou);
    return 0;
  } catch (const std::exception& e) {
    return data_error(e);
  }
}

struct ConvertArgs {
  std::string gt, manifest, out, keep_classes;
  int classes = 0;
  int jobs = wbed::default_jobs();
};

int run_convert_saliency(const ConvertArgs& args) {
  int rc = 0;
  if (!check_classes(args.classes, rc)) return rc;
  if (!check_jobs(args.jobs, rc)) return rc;
  const std::optional<std::vector<int>> kept =
      parse_int_list("--keep-classes", args.keep_classes);
  if (!kept.has_value()) return 1;
  if (kept->empty()) {
    return usage_error("--keep-classes must name at least one class");
  }
  for (const int k : *kept) {
    if (k < 0 || k >= args.classes) {
      return usage_error("--keep-classes index " + std::to_string(k) +
                         " outside [0, " + std::to_string(args.classes) + ")");
    }
  }
  if (!ensure_out_dir(args.out, rc)) return rc;
  try {
    const wbed::Manifest manifest =
        wbed::read_manifest(args.manifest, args.classes);
    std::cerr << "wbed: convert-saliency: " << manifest.entries.size()
              << " images, keeping " << kept->size() << " classes\n";
    const wbed::ClassSubset subset(*kept);
    wbed::parallel_for(
        manifest.entries.size(), args.jobs,
        [&](std::size_t, std::size_t i) {
          const wbed::ManifestEntry& entry = manifest.entries[i];
          try {
            const wbed::LabelMask gt = wbed::read_label_png(
                fs::path(args.gt) / (entry.id + ".png"), args.classes);
            const wbed::SaliencyMap salient =
                wbed::classwise_to_salient(gt, subset);
            wbed::write_gray_png(salient,
                                 fs::path(args.out) / (entry.id + ".png"));
          } catch (const wbed::Error& e) {
            throw wbed::Error(e.code(),
                              "image '" + entry.id + "': " + e.message());
          }
        });
    std::printf("processed=%zu\n", manifest.entries.size());
    return 0;
  } catch (const std::exception& e) {
    return data_error(e);
  }
}

struct CrossArgs {
  std::string methods, saliencies, taus, manifest, gt, out;
  double saliency_thresh = 0.5;
  int jobs = wbed::default_jobs();
};

int run_cross(const CrossArgs& args) {
  int rc = 0;
  if (!check_saliency_thresh(args.saliency_thresh, rc)) return rc;
  if (!check_jobs(args.jobs, rc)) return rc;
  const auto methods = parse_pairs("--methods", args.methods);
  if (!methods.has_value()) return 1;
  const auto saliencies = parse_pairs("--saliencies", args.saliencies);
  if (!saliencies.has_value()) return 1;
  const auto tau_pairs = parse_pairs("--taus", args.taus);
  if (!tau_pairs.has_value()) return 1;

  std::map<std::string, double> per_method_tau;
  for (const auto& [name, value] : *tau_pairs) {
    double tau = 0.0;
    try {
      std::size_t used = 0;
      tau = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      return usage_error("--taus value for '" + name + "' is not a number: '" +
                         value + "'");
    }
    if (!check_tau(tau, "--taus entry '" + name + "'", rc)) return rc;
    per_method_tau[name] = tau;
  }
  for (const auto& [name, root] : *methods) {
    if (!per_method_tau.contains(name)) {
      return usage_error("--taus has no entry for method '" + name + "'");
    }
  }

  std::vector<std::pair<std::string, fs::path>> method_roots;
  std::vector<std::pair<std::string, fs::path>> saliency_roots;
  for (const auto& [name, root] : *methods) {
    method_roots.emplace_back(name, fs::path(root));
  }
  for (const auto& [name, root] : *saliencies) {
    saliency_roots.emplace_back(name, fs::path(root));
  }

  try {
    const wbed::Manifest manifest = wbed::read_manifest(args.manifest);
    std::cerr << "wbed: cross: " << method_roots.size() << " methods x "
              << saliency_roots.size() << " saliency sources\n";
    const wbed::CrossMatrix grid = wbed::cross_matrix(
        method_roots, saliency_roots, manifest, args.gt, per_method_tau,
        args.saliency_thresh, args.jobs);
    wbed::write_report(grid, args.out);
    std::printf("cells=%zu\n", grid.miou.size());
    return 0;
  } catch (const std::exception& e) {
    return data_error(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-label fusion and evaluation for weakly-supervised "
               "segmentation"};
  app.require_subcommand(1);

  FuseArgs fuse_args;
  CLI::App* fuse = app.add_subcommand(
      "fuse", "Fuse activation stacks with saliency into pseudo labels");
  fuse->add_option("--actmaps", fuse_args.actmaps,
                   "Directory of <id>.actmap activation stacks")
      ->required();
  fuse->add_option("--saliency", fuse_args.saliency,
                   "Directory of <id>.png saliency maps")
      ->required();
  fuse->add_option("--manifest", fuse_args.manifest,
                   "JSON-Lines manifest of image ids and labels")
      ->required();
  fuse->add_option("--tau", fuse_args.tau,
                   "Foreground activation threshold in [0, 1]")
      ->required();
  fuse->add_option("--out", fuse_args.out,
                   "Output directory for <id>.png pseudo labels")
      ->required();
  fuse->add_option("--saliency-thresh", fuse_args.saliency_thresh,
                   "Saliency binarization cutoff in (0, 1)")
      ->capture_default_str();
  fuse->add_option("--jobs", fuse_args.jobs, "Worker threads")
      ->capture_default_str();

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Evaluate pseudo labels over a grid of tau thresholds");
  sweep->add_option("--actmaps", sweep_args.actmaps,
                    "Directory of <id>.actmap activation stacks")
      ->required();
  sweep->add_option("--saliency", sweep_args.saliency,
                    "Directory of <id>.png saliency maps")
      ->required();
  sweep->add_option("--manifest", sweep_args.manifest,
                    "JSON-Lines manifest of image ids and labels")
      ->required();
  sweep->add_option("--gt", sweep_args.gt,
                    "Directory of <id>.png ground-truth masks")
      ->required();
  sweep->add_option("--grid", sweep_args.grid,
                    "Threshold grid START:STOP:STEP")
      ->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "Output CSV path")->required();
  sweep->add_option("--saliency-thresh", sweep_args.saliency_thresh,
                    "Saliency binarization cutoff in (0, 1)")
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_args.jobs, "Worker threads")
      ->capture_default_str();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score prediction masks against ground truth");
  eval->add_option("--pred", eval_args.pred,
                   "Directory of <id>.png prediction masks")
      ->required();
  eval->add_option("--gt", eval_args.gt,
                   "Directory of <id>.png ground-truth masks")
      ->required();
  eval->add_option("--manifest", eval_args.manifest,
                   "JSON-Lines manifest of image ids and labels")
      ->required();
  eval->add_option("--classes", eval_args.classes,
                   "Number of foreground classes")
      ->required();
  eval->add_option("--out", eval_args.out, "Output CSV path")->required();
  eval->add_option("--jobs", eval_args.jobs, "Worker threads")
      ->capture_default_str();

  ConvertArgs convert_args;
  CLI::App* convert = app.add_subcommand(
      "convert-saliency",
      "Project class-wise ground truth onto binary saliency maps");
  convert->add_option("--gt", convert_args.gt,
                      "Directory of <id>.png ground-truth masks")
      ->required();
  convert->add_option("--manifest", convert_args.manifest,
                      "JSON-Lines manifest of image ids and labels")
      ->required();
  convert->add_option("--keep-classes", convert_args.keep_classes,
                      "Comma-separated 0-based class indices to keep")
      ->required();
  convert->add_option("--classes", convert_args.classes,
                      "Number of foreground classes")
      ->required();
  convert->add_option("--out", convert_args.out,
                      "Output directory for <id>.png saliency maps")
      ->required();
  convert->add_option("--jobs", convert_args.jobs, "Worker threads")
      ->capture_default_str();

  CrossArgs cross_args;
  CLI::App* cross = app.add_subcommand(
      "cross", "Evaluate every method against every saliency source");
  cross->add_option("--methods", cross_args.methods,
                    "Comma-separated name=DIR activation-map roots")
      ->required();
  cross->add_option("--saliencies", cross_args.saliencies,
                    "Comma-separated name=DIR saliency roots")
      ->required();
  cross->add_option("--taus", cross_args.taus,
                    "Comma-separated name=TAU per-method thresholds")
      ->required();
  cross->add_option("--manifest", cross_args.manifest,
                    "JSON-Lines manifest of image ids and labels")
      ->required();
  cross->add_option("--gt", cross_args.gt,
                    "Directory of <id>.png ground-truth masks")
      ->required();
  cross->add_option("--out", cross_args.out, "Output CSV path")->required();
  cross->add_option("--saliency-thresh", cross_args.saliency_thresh,
                    "Saliency binarization cutoff in (0, 1)")
      ->capture_default_str();
  cross->add_option("--jobs", cross_args.jobs, "Worker threads")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (fuse->parsed()) return run_fuse(fuse_args);
  if (sweep->parsed()) return run_sweep(sweep_args);
  if (eval->parsed()) return run_eval(eval_args);
  if (convert->parsed()) return run_convert_saliency(convert_args);
  if (cross->parsed()) return run_cross(cross_args);
  return usage_error("no subcommand given");
}
