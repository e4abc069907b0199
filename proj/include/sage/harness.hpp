#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sage/fusion.hpp"
#include "sage/groundtruth.hpp"
#include "sage/manifest.hpp"
#include "sage/metrics.hpp"
#include "sage/parallel.hpp"
#include "sage/providers.hpp"
#include "sage/smap_io.hpp"

namespace sage {

/// Which fixation ground truth a prediction is scored against.
enum class Regime { gaze_only, sage };
/// Whether the prediction is the raw model output or the composed pipeline output.
enum class Pipeline { raw, sage_net };

inline std::string_view to_string(Regime r) { return r == Regime::gaze_only ? "gaze_only" : "sage"; }
inline std::string_view to_string(Pipeline p) { return p == Pipeline::raw ? "raw" : "sage_net"; }

inline Regime parse_regime(std::string_view s) {
  if (s == "gaze_only" || s == "gaze") return Regime::gaze_only;
  if (s == "sage") return Regime::sage;
  throw ValidationError("unknown regime '" + std::string(s) + "'");
}

inline Pipeline parse_pipeline(std::string_view s) {
  if (s == "raw") return Pipeline::raw;
  if (s == "sage_net") return Pipeline::sage_net;
  throw ValidationError("unknown pipeline '" + std::string(s) + "'");
}

inline constexpr std::size_t kMetricCount = 4;  // D_KL, CC, F1, MAE

struct MetricRow {
  std::string clip_id;
  std::set<std::string> scenario_tags;
  Regime regime = Regime::gaze_only;
  Pipeline pipeline = Pipeline::raw;
  std::array<double, kMetricCount> values{};
};

struct ClipFailure {
  std::string clip_id;
  std::string message;
  ErrorKind kind = ErrorKind::validation;
};

struct EvalResult {
  std::vector<MetricRow> rows;
  std::vector<ClipFailure> failures;
};

using WarningSink = std::function<void(const std::string&)>;

inline void warn_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

struct EvalOptions {
  std::vector<Regime> regimes{Regime::gaze_only, Regime::sage};
  std::vector<Pipeline> pipelines{Pipeline::raw, Pipeline::sage_net};
  std::size_t workers = 1;
  /// Defaults to the file-backed providers at the manifest's working dims.
  std::optional<ProviderBundle> providers;
  WarningSink warn = warn_stderr;
};

namespace detail {

// Predictions above 1 (possible under clamp policy "none") are max-normalized
// so binarization and MAE see [0,1] maps.
inline SalMap metric_ready(const SalMap& m) { return grid_max(m) > 1.0f ? normalize_max(m) : m; }

inline std::vector<MetricRow> evaluate_clip(const ClipEntry& entry, GridDims dims, const PipelineConfig& config,
                                            const ThresholdPolicy& policy, const EvalOptions& opt,
                                            const ProviderBundle& providers) {
  if (auto missing = missing_artifacts(entry); !missing.empty())
    throw IoError("missing artifact " + missing.front().string());
  const ClipWindow clip = open_clip(entry);

  std::vector<std::pair<Pipeline, SalMap>> predictions;
  for (Pipeline p : opt.pipelines) {
    if (p == Pipeline::raw)
      predictions.emplace_back(
          p, normalize_max(call_provider(*providers.saliency, [&] { return providers.saliency->predict(clip); })));
    else
      predictions.emplace_back(p, metric_ready(run_sage_net(clip, providers, config)));
  }

  // Sums over frames, indexed [regime][pipeline][metric].
  std::vector<std::vector<std::array<double, kMetricCount>>> sums(
      opt.regimes.size(), std::vector<std::array<double, kMetricCount>>(predictions.size()));
  for (const auto& frame : entry.frames) {
    const SalMap gaze = resize_bilinear(load_smap(frame.gaze), dims);
    const BinaryMask mask = resize_nearest(load_bmsk(frame.mask), dims);
    for (std::size_t r = 0; r < opt.regimes.size(); ++r) {
      const SalMap fixation_gt =
          opt.regimes[r] == Regime::gaze_only ? gaze : superimpose(normalize_max(gaze), mask);
      for (std::size_t p = 0; p < predictions.size(); ++p) {
        const auto results = evaluate_frame(predictions[p].second, fixation_gt, mask, policy);
        for (std::size_t m = 0; m < kMetricCount; ++m) sums[r][p][m] += results[m].value;
      }
    }
  }

  std::vector<MetricRow> rows;
  const double n = static_cast<double>(entry.frames.size());
  for (std::size_t r = 0; r < opt.regimes.size(); ++r)
    for (std::size_t p = 0; p < predictions.size(); ++p) {
      MetricRow row{entry.clip_id, entry.scenario_tags, opt.regimes[r], predictions[p].first, {}};
      for (std::size_t m = 0; m < kMetricCount; ++m) row.values[m] = sums[r][p][m] / n;
      rows.push_back(std::move(row));
    }
  return rows;
}

}  // namespace detail

/// Scores every clip under each requested (regime, pipeline). A clip's score is
/// the mean of its per-frame metrics. Rows come back in manifest order whatever
/// the worker count; a failing clip is recorded, warned about, and skipped.
inline EvalResult evaluate_corpus(const CorpusManifest& manifest, const PipelineConfig& config,
                                  const ThresholdPolicy& policy, const EvalOptions& opt = {}) {
  config.validate();
  policy.validate();
  if (opt.regimes.empty() || opt.pipelines.empty())
    throw ValidationError("evaluate_corpus: at least one regime and one pipeline are required");
  const ProviderBundle providers = serialize(opt.providers ? *opt.providers : file_providers(manifest.dims));

  const std::size_t n = manifest.clips.size();
  std::vector<std::vector<MetricRow>> per_clip(n);
  std::vector<std::optional<ClipFailure>> failed(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    const auto& entry = manifest.clips[i];
    try {
      per_clip[i] = detail::evaluate_clip(entry, manifest.dims, config, policy, opt, providers);
    } catch (const Error& e) {
      failed[i] = ClipFailure{entry.clip_id, e.what(), e.kind()};
    } catch (const std::exception& e) {
      failed[i] = ClipFailure{entry.clip_id, e.what(), ErrorKind::io};
    }
  });

  EvalResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) {
      if (opt.warn) opt.warn("clip '" + failed[i]->clip_id + "' skipped: " + failed[i]->message);
      out.failures.push_back(std::move(*failed[i]));
      continue;
    }
    for (auto& row : per_clip[i]) out.rows.push_back(std::move(row));
  }
  return out;
}

/// Keeps the rows whose clip carries `tag`.
inline std::vector<MetricRow> filter_scenario(const std::vector<MetricRow>& rows, const std::string& tag,
                                              const WarningSink& warn = warn_stderr) {
  std::vector<MetricRow> out;
  for (const auto& r : rows)
    if (r.scenario_tags.count(tag)) out.push_back(r);
  if (out.empty() && warn) warn("scenario tag '" + tag + "' matched no rows");
  return out;
}

/// Keeps the clips that carry `tag`.
inline CorpusManifest filter_scenario(const CorpusManifest& manifest, const std::string& tag,
                                      const WarningSink& warn = warn_stderr) {
  CorpusManifest out{manifest.root, manifest.dims, {}};
  for (const auto& c : manifest.clips)
    if (c.scenario_tags.count(tag)) out.clips.push_back(c);
  if (out.clips.empty() && warn) warn("scenario tag '" + tag + "' matched no clips");
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and reports

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1); 0 when n = 1
};

/// Mean and sample standard deviation; an empty input is a degenerate-input error.
inline MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) throw DegenerateInputError("mean_std: no values");
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

struct ReportCell {
  Regime regime = Regime::gaze_only;
  Pipeline pipeline = Pipeline::raw;
  std::size_t count = 0;
  std::array<MeanStd, kMetricCount> metrics{};
};

struct ReportTable {
  std::vector<ReportCell> cells;
};

/// One cell per (regime, pipeline) present in the rows, ordered by first appearance.
inline ReportTable aggregate(const std::vector<MetricRow>& rows, const WarningSink& warn = warn_stderr) {
  std::vector<std::pair<Regime, Pipeline>> order;
  std::map<std::pair<Regime, Pipeline>, std::array<std::vector<double>, kMetricCount>> buckets;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.regime, r.pipeline);
    if (!buckets.count(key)) order.push_back(key);
    auto& b = buckets[key];
    for (std::size_t m = 0; m < kMetricCount; ++m)
      if (std::isfinite(r.values[m])) b[m].push_back(r.values[m]);
  }
  ReportTable table;
  for (const auto& key : order) {
    const auto& b = buckets.at(key);
    ReportCell cell{key.first, key.second, b[0].size(), {}};
    bool complete = true;
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      if (b[m].empty()) {
        complete = false;
        break;
      }
      cell.metrics[m] = mean_std(b[m]);
    }
    if (!complete || cell.count == 0) {
      if (warn)
        warn("report cell " + std::string(to_string(key.first)) + "/" + std::string(to_string(key.second)) +
             " has no values; excluded");
      continue;
    }
    table.cells.push_back(cell);
  }
  return table;
}

enum class ReportFormat { csv, markdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw ValidationError("unknown report format '" + std::string(s) + "'");
}

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline std::string render_report(const ReportTable& table, ReportFormat format) {
  std::ostringstream out;
  const auto& names = metric_names();
  if (format == ReportFormat::csv) {
    out << "regime,pipeline,clips";
    for (const auto& n : names) out << ',' << n << "_mean," << n << "_std";
    out << "\r\n";
    for (const auto& c : table.cells) {
      out << to_string(c.regime) << ',' << to_string(c.pipeline) << ',' << c.count;
      for (const auto& m : c.metrics) out << ',' << detail::fixed(m.mean, 6) << ',' << detail::fixed(m.std, 6);
      out << "\r\n";
    }
    return out.str();
  }
  out << "| Regime | Pipeline | Clips | Fixation: D_KL (lower) | Fixation: CC (higher) "
         "| Semantic: F1 (higher) | Semantic: MAE (lower) |\n";
  out << "|---|---|---:|---:|---:|---:|---:|\n";
  for (const auto& c : table.cells) {
    out << "| " << to_string(c.regime) << " | " << to_string(c.pipeline) << " | " << c.count;
    for (const auto& m : c.metrics) out << " | " << detail::fixed(m.mean, 4) << " ± " << detail::fixed(m.std, 4);
    out << " |\n";
  }
  out << "\nCells are mean ± sample standard deviation (n-1) over clips; each clip score is the mean over its "
         "16 frames.\n";
  return out.str();
}

inline void emit_report(const ReportTable& table, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << render_report(table, format);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace sage
