// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "aerotrack/error.hpp"

namespace aerotrack::eval {

namespace {

constexpr std::size_t kRecallPoints = 101;

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Greedy matching of score-ordered predictions against gts for one
// (image, class) cell. Returns, per prediction, whether it hit at threshold t.
std::vector<char> greedy_match(const std::vector<std::vector<double>>& overlaps,
                               std::size_t num_gt, double t) {
  std::vector<char> gt_taken(num_gt, 0);
  std::vector<char> hits(overlaps.size(), 0);
  for (std::size_t p = 0; p < overlaps.size(); ++p) {
    double best = -1.0;
    std::size_t best_gt = num_gt;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (gt_taken[g]) continue;
      const double o = overlaps[p][g];
      if (o >= t && o > best) {
        best = o;
        best_gt = g;
      }
    }
    if (best_gt < num_gt) {
      gt_taken[best_gt] = 1;
      hits[p] = 1;
    }
  }
  return hits;
}

std::optional<double> mean_of_present(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// Folds a (class x threshold) AP table into the report fields.
void summarize(const std::vector<int>& classes, const std::vector<double>& thresholds,
               const std::vector<std::vector<std::optional<double>>>& ap_table,
               MetricsReport& report) {
  report.iou_thresholds = thresholds;
  report.ap_per_threshold.assign(thresholds.size(), 0.0);
  std::vector<double> all;
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    std::vector<std::optional<double>> column;
    for (std::size_t k = 0; k < classes.size(); ++k) column.push_back(ap_table[k][ti]);
    report.ap_per_threshold[ti] = mean_of_present(column).value_or(0.0);
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    report.per_class_ap[classes[k]] = mean_of_present(ap_table[k]);
    for (const auto& x : ap_table[k]) {
      if (x) all.push_back(*x);
    }
  }
  report.ap = mean(all);
}

}  // namespace

EvalConfig EvalConfig::detection() {
  EvalConfig config;
  for (int i = 0; i < 10; ++i) config.iou_thresholds.push_back(0.5 + 0.05 * i);
  config.categories = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return config;
}

EvalConfig EvalConfig::tracking() {
  EvalConfig config;
  config.iou_thresholds = {0.25, 0.50, 0.75};
  config.categories = {visdrone::kCar, visdrone::kBus, visdrone::kTruck,
                       visdrone::kPedestrian, visdrone::kVan};
  return config;
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw ValidationError("at least one IoU threshold is required");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("IoU thresholds must lie in (0, 1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) {
      throw ValidationError("IoU thresholds must ascend");
    }
  }
  if (max_dets_levels.empty()) throw ValidationError("at least one max-detections level is required");
  for (std::size_t i = 0; i < max_dets_levels.size(); ++i) {
    if (max_dets_levels[i] == 0 || (i > 0 && max_dets_levels[i] <= max_dets_levels[i - 1])) {
      throw ValidationError("max-detections levels must be positive and ascend");
    }
  }
  if (categories.empty()) throw ValidationError("no categories to evaluate");
  for (const int c : categories) {
    if (!contains(known_classes, c)) {
      throw ValidationError("evaluated category " + std::to_string(c) + " is not a known class");
    }
  }
}

std::optional<double> MetricsReport::ap_at(double threshold) const {
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    if (std::abs(iou_thresholds[i] - threshold) < 1e-9) return ap_per_threshold[i];
  }
  return std::nullopt;
}

double interpolated_ap(std::span<const char> ranked_hits, std::size_t positives) {
  if (positives == 0 || ranked_hits.empty()) return 0.0;
  const std::size_t n = ranked_hits.size();
  std::vector<double> recall(n), precision(n);
  double tp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked_hits[i] ? 1.0 : 0.0;
    recall[i] = tp / static_cast<double>(positives);
    precision[i] = tp / static_cast<double>(i + 1);
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < kRecallPoints; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(kRecallPoints - 1);
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / static_cast<double>(kRecallPoints);
}

MetricsReport eval_detection(std::span<const Detection> predictions,
                             const DetectionGroundTruth& ground_truth,
                             const EvalConfig& config) {
  config.validate();
  const std::size_t cap = config.max_dets_levels.back();
  const auto& classes = config.categories;

  for (const auto& gt : ground_truth.boxes) {
    if (!gt.box.valid()) throw ValidationError("ground truth has an invalid box");
    if (!contains(config.known_classes, gt.class_id)) {
      throw ValidationError("ground truth has unknown class " + std::to_string(gt.class_id));
    }
  }

  std::unordered_map<FrameId, std::vector<const IgnoreRegion*>> ignore_by_image;
  for (const auto& region : ground_truth.ignore_regions) {
    ignore_by_image[region.image_id].push_back(&region);
  }
  auto in_ignored_region = [&](const Detection& det) {
    const auto it = ignore_by_image.find(det.frame_id);
    if (it == ignore_by_image.end()) return false;
    for (const IgnoreRegion* region : it->second) {
      const double overlap =
          config.ignore_overlap == IgnoreOverlap::kIoU
              ? iou(det.box, region->box)
              : intersection_area(det.box, region->box) / det.box.area();
      if (overlap > config.ignore_threshold) return true;
    }
    return false;
  };

  // Per image: surviving predictions ranked by score (input order on ties).
  struct Ranked {
    const Detection* det;
    std::size_t input_index;
    std::size_t rank = 0;
  };
  std::map<FrameId, std::vector<Ranked>> by_image;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Detection& det = predictions[i];
    if (!contains(config.known_classes, det.class_id)) {
      throw ValidationError("prediction has unknown class " + std::to_string(det.class_id));
    }
    if (!det.box.valid()) throw ValidationError("prediction has an invalid box");
    if (!contains(classes, det.class_id) || in_ignored_region(det)) continue;
    by_image[det.frame_id].push_back({&det, i});
  }
  for (auto& [image, ranked] : by_image) {
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
      return a.det->confidence > b.det->confidence;
    });
    for (std::size_t r = 0; r < ranked.size(); ++r) ranked[r].rank = r;
    if (ranked.size() > cap) ranked.resize(cap);
  }

  std::map<std::pair<FrameId, int>, std::vector<const GroundTruthBox*>> gt_cells;
  std::map<int, std::size_t> positives;
  for (const auto& gt : ground_truth.boxes) {
    if (!contains(classes, gt.class_id)) continue;
    gt_cells[{gt.image_id, gt.class_id}].push_back(&gt);
    ++positives[gt.class_id];
  }

  const std::size_t num_t = config.iou_thresholds.size();
  std::vector<std::vector<std::optional<double>>> ap_table(
      classes.size(), std::vector<std::optional<double>>(num_t));
  std::map<std::size_t, std::vector<double>> recalls;

  for (std::size_t k = 0; k < classes.size(); ++k) {
    const int cls = classes[k];
    const std::size_t npos = positives.count(cls) ? positives[cls] : 0;
    if (npos == 0) continue;

    // Each pooled entry: score, image, per-image rank, hit per threshold.
    struct Pooled {
      double score;
      FrameId image;
      std::size_t rank;
      std::vector<char> hit;
    };
    std::vector<Pooled> pooled;
    for (const auto& [image, ranked] : by_image) {
      std::vector<const Ranked*> cell;
      for (const auto& r : ranked) {
        if (r.det->class_id == cls) cell.push_back(&r);
      }
      if (cell.empty()) continue;
      const auto gt_it = gt_cells.find({image, cls});
      const std::size_t num_gt = gt_it == gt_cells.end() ? 0 : gt_it->second.size();
      std::vector<std::vector<double>> overlaps(cell.size(), std::vector<double>(num_gt));
      for (std::size_t p = 0; p < cell.size(); ++p) {
        for (std::size_t g = 0; g < num_gt; ++g) {
          overlaps[p][g] = iou(cell[p]->det->box, gt_it->second[g]->box);
        }
      }
      std::vector<std::vector<char>> hits_per_t;
      for (const double t : config.iou_thresholds) {
        hits_per_t.push_back(greedy_match(overlaps, num_gt, t));
      }
      for (std::size_t p = 0; p < cell.size(); ++p) {
        Pooled entry{cell[p]->det->confidence, image, cell[p]->rank, std::vector<char>(num_t)};
        for (std::size_t ti = 0; ti < num_t; ++ti) entry.hit[ti] = hits_per_t[ti][p];
        pooled.push_back(std::move(entry));
      }
    }
    std::stable_sort(pooled.begin(), pooled.end(), [](const Pooled& a, const Pooled& b) {
      return a.score > b.score;
    });

    for (std::size_t ti = 0; ti < num_t; ++ti) {
      std::vector<char> ranked_hits;
      ranked_hits.reserve(pooled.size());
      for (const auto& e : pooled) ranked_hits.push_back(e.hit[ti]);
      ap_table[k][ti] = interpolated_ap(ranked_hits, npos);

      for (const std::size_t level : config.max_dets_levels) {
        std::size_t tp = 0;
        for (const auto& e : pooled) {
          if (e.rank < level && e.hit[ti]) ++tp;
        }
        recalls[level].push_back(static_cast<double>(tp) / static_cast<double>(npos));
      }
    }
  }

  MetricsReport report;
  summarize(classes, config.iou_thresholds, ap_table, report);
  for (const std::size_t level : config.max_dets_levels) report.ar[level] = mean(recalls[level]);
  return report;
}

double tracklet_iou(std::span<const tracking::TrackletRow> a,
                    std::span<const tracking::TrackletRow> b) {
  if (a.empty() || b.empty()) return 0.0;
  const FrameId a0 = a.front().frame, a1 = a.back().frame;
  const FrameId b0 = b.front().frame, b1 = b.back().frame;
  // Frames in [a0, a1] ∪ [b0, b1].
  std::int64_t span_frames = (a1 - a0 + 1) + (b1 - b0 + 1);
  const FrameId lo = std::max(a0, b0), hi = std::min(a1, b1);
  if (lo <= hi) span_frames -= hi - lo + 1;

  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].frame < b[j].frame) {
      ++i;
    } else if (b[j].frame < a[i].frame) {
      ++j;
    } else {
      sum += iou(a[i].box, b[j].box);
      ++i;
      ++j;
    }
  }
  return sum / static_cast<double>(span_frames);
}

namespace {

struct Tracklet {
  std::size_t sequence = 0;
  tracking::TrackId id = 0;
  int class_id = 0;
  double mean_confidence = 0.0;
  std::vector<tracking::TrackletRow> rows;  // sorted by frame
};

std::vector<Tracklet> build_tracklets(std::span<const tracking::TrackletRow> rows,
                                      std::size_t sequence, const char* side) {
  std::map<tracking::TrackId, Tracklet> by_id;
  for (const auto& row : rows) {
    auto [it, inserted] = by_id.try_emplace(row.track_id);
    Tracklet& t = it->second;
    if (inserted) {
      t.sequence = sequence;
      t.id = row.track_id;
      t.class_id = row.class_id;
    } else if (t.class_id != row.class_id) {
      throw ValidationError(std::string(side) + " tracklet " + std::to_string(row.track_id) +
                            " changes class");
    }
    if (!row.box.valid()) {
      throw ValidationError(std::string(side) + " tracklet " + std::to_string(row.track_id) +
                            " has an invalid box at frame " + std::to_string(row.frame));
    }
    t.rows.push_back(row);
  }
  std::vector<Tracklet> out;
  for (auto& [id, t] : by_id) {
    std::stable_sort(t.rows.begin(), t.rows.end(),
                     [](const auto& a, const auto& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      if (t.rows[i].frame == t.rows[i - 1].frame) {
        throw ValidationError(std::string(side) + " tracklet " + std::to_string(id) +
                              " has two rows at frame " + std::to_string(t.rows[i].frame));
      }
    }
    double sum = 0.0;
    for (const auto& r : t.rows) sum += r.confidence;
    t.mean_confidence = sum / static_cast<double>(t.rows.size());
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

MetricsReport eval_tracking(std::span<const TrackingSequence> sequences,
                            const EvalConfig& config) {
  config.validate();
  const auto& classes = config.categories;

  std::vector<Tracklet> predicted, truth;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    for (const auto& row : sequences[s].predictions) {
      if (!contains(config.known_classes, row.class_id)) {
        throw ValidationError("predicted tracklet has unknown class " +
                              std::to_string(row.class_id));
      }
    }
    for (const auto& row : sequences[s].ground_truth) {
      if (!contains(config.known_classes, row.class_id)) {
        throw ValidationError("ground-truth tracklet has unknown class " +
                              std::to_string(row.class_id));
      }
    }
    auto p = build_tracklets(sequences[s].predictions, s, "predicted");
    auto g = build_tracklets(sequences[s].ground_truth, s, "ground-truth");
    predicted.insert(predicted.end(), std::make_move_iterator(p.begin()),
                     std::make_move_iterator(p.end()));
    truth.insert(truth.end(), std::make_move_iterator(g.begin()),
                 std::make_move_iterator(g.end()));
  }

  const std::size_t num_t = config.iou_thresholds.size();
  std::vector<std::vector<std::optional<double>>> ap_table(
      classes.size(), std::vector<std::optional<double>>(num_t));

  for (std::size_t k = 0; k < classes.size(); ++k) {
    const int cls = classes[k];
    std::vector<const Tracklet*> preds, gts;
    for (const auto& t : predicted) {
      if (t.class_id == cls) preds.push_back(&t);
    }
    for (const auto& t : truth) {
      if (t.class_id == cls) gts.push_back(&t);
    }
    if (gts.empty()) continue;
    std::stable_sort(preds.begin(), preds.end(), [](const Tracklet* a, const Tracklet* b) {
      return a->mean_confidence > b->mean_confidence;
    });

    std::vector<std::vector<double>> overlaps(preds.size(), std::vector<double>(gts.size(), 0.0));
    for (std::size_t p = 0; p < preds.size(); ++p) {
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (preds[p]->sequence != gts[g]->sequence) continue;
        overlaps[p][g] = tracklet_iou(preds[p]->rows, gts[g]->rows);
      }
    }
    for (std::size_t ti = 0; ti < num_t; ++ti) {
      const auto hits = greedy_match(overlaps, gts.size(), config.iou_thresholds[ti]);
      ap_table[k][ti] = interpolated_ap(hits, gts.size());
    }
  }

  MetricsReport report;
  summarize(classes, config.iou_thresholds, ap_table, report);
  return report;
}

MetricsReport eval_tracking(std::span<const tracking::TrackletRow> predictions,
                            std::span<const tracking::TrackletRow> ground_truth,
                            const EvalConfig& config) {
  const TrackingSequence sequence{{predictions.begin(), predictions.end()},
                                  {ground_truth.begin(), ground_truth.end()}};
  return eval_tracking(std::span<const TrackingSequence>(&sequence, 1), config);
}

}  // namespace aerotrack::eval
