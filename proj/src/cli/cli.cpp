// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "aerotrack/error.hpp"
#include "aerotrack/io.hpp"
#include "aerotrack/postprocess.hpp"
#include "aerotrack/synth.hpp"
#include "aerotrack/tracker.hpp"

namespace aerotrack::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path manifest_path_for(const fs::path& output) {
  if (fs::is_directory(output)) return output / "manifest.json";
  return fs::path(output.string() + ".manifest.json");
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

nlohmann::json tracker_json(const tracking::TrackerParams& p) {
  return {{"n_init", p.n_init},
          {"max_age", p.max_age},
          {"gallery_budget", p.gallery_budget},
          {"confidence_floor", p.confidence_floor},
          {"lambda_app", p.association.lambda_app},
          {"gate_threshold", p.association.gate_threshold},
          {"max_app_distance", p.association.max_app_distance},
          {"max_iou_distance", p.association.max_iou_distance},
          {"std_weight_position", p.motion.std_weight_position},
          {"std_weight_velocity", p.motion.std_weight_velocity}};
}

// Embedding row i must exist for detection record i.
void check_alignment(const DetectionStream& stream, const EmbeddingTable& table,
                     const fs::path& detections_path) {
  std::size_t records = 0;
  for (const auto& frame : stream) records += frame.detections.size();
  if (records == table.size()) return;
  if (table.size() > records) {
    throw ValidationError(detections_path.string() + ": " + std::to_string(records) +
                          " detections but " + std::to_string(table.size()) +
                          " embedding rows; extra rows follow the last frame" +
                          (stream.empty() ? std::string() : " " + std::to_string(stream.back().frame_id)));
  }
  for (const auto& frame : stream) {
    for (const auto& det : frame.detections) {
      if (*det.embedding_ref >= table.size()) {
        throw ValidationError("frame " + std::to_string(frame.frame_id) + ": embeddings run out (" +
                              std::to_string(table.size()) + " rows for " +
                              std::to_string(records) + " detections)");
      }
    }
  }
}

struct TrackJob {
  fs::path detections;
  fs::path embeddings;
  fs::path output;
};

std::size_t run_track_job(const TrackJob& job, const tracking::TrackerParams& params,
                          const std::optional<postprocess::NmsParams>& nms) {
  DetectionStream stream = io::read_detections(job.detections);
  const EmbeddingTable table = io::read_embeddings(job.embeddings);
  check_alignment(stream, table, job.detections);
  if (nms) {
    for (auto& frame : stream) {
      frame.detections = postprocess::nms_pipeline(std::span<const Detection>(frame.detections), *nms);
    }
  }
  const auto rows = tracking::run_sequence(stream, table, params);
  io::write_tracks(rows, job.output);
  return rows.size();
}

struct Common {
  std::string format = "text";
  std::string output;
};

void add_format(CLI::App* sub, Common& common) {
  sub->add_option("--format", common.format, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

void emit_report(std::ostream& out, const Common& common, const std::string& text,
                 nlohmann::json json, RunManifest& manifest, Clock::time_point start) {
  if (!common.output.empty()) manifest.outputs.push_back(common.output);
  manifest.wall_seconds = seconds_since(start);
  std::string body;
  if (common.format == "json") {
    json["manifest"] = manifest.to_json();
    body = json.dump(2) + "\n";
  } else {
    body = text;
  }
  out << body;
  if (!common.output.empty()) {
    io::write_file(common.output, body);
    manifest.write(manifest_path_for(common.output));
  }
}

anchors::CoverageStats merge(anchors::CoverageStats into, const anchors::CoverageStats& add) {
  if (into.buckets.empty()) return add;
  for (std::size_t i = 0; i < into.buckets.size(); ++i) {
    into.buckets[i].total += add.buckets[i].total;
    into.buckets[i].covered += add.buckets[i].covered;
  }
  for (std::size_t i = 0; i < into.best_iou_histogram.size(); ++i) {
    into.best_iou_histogram[i] += add.best_iou_histogram[i];
  }
  into.gt_best_iou.insert(into.gt_best_iou.end(), add.gt_best_iou.begin(), add.gt_best_iou.end());
  into.total += add.total;
  into.covered += add.covered;
  return into;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "aerotrack";
  for (const auto& a : args) s += " " + a;
  return s;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  CLI::App app{"Offline multi-object tracking and evaluation for drone video", "aerotrack"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // track
  auto* track = app.add_subcommand("track", "Track a detection sequence (file or directory)");
  std::string det_path, emb_path, track_config;
  std::vector<std::string> overrides;
  unsigned jobs = 1;
  bool use_nms = false;
  postprocess::NmsParams nms_params;
  Common track_common;
  track->add_option("--detections", det_path, "Detections file, or directory of *.txt")->required();
  track->add_option("--embeddings", emb_path, "Embeddings file, or directory of <name>.emb")->required();
  track->add_option("--output", track_common.output, "Tracks file, or directory")->required();
  track->add_option("--config", track_config, "Tracker key-value config file");
  track->add_option("--set", overrides, "Override a config key: key=value (repeatable)");
  track->add_option("--jobs", jobs, "Sequences processed in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  track->add_flag("--nms", use_nms, "Run score filter + per-class NMS before tracking");
  track->add_option("--score-threshold", nms_params.score_thresh, "NMS score floor")->capture_default_str();
  track->add_option("--nms-iou", nms_params.nms_iou, "NMS IoU threshold")->capture_default_str();
  track->add_option("--max-dets", nms_params.max_dets, "Detections kept per frame after NMS")
      ->capture_default_str();

  // eval-det
  auto* eval_det = app.add_subcommand("eval-det", "Detection AP/AR against VisDrone annotations");
  std::string pred_path, gt_path, ignore_overlap = "iou";
  Common det_common;
  eval_det->add_option("--detections", pred_path, "Predicted detections file")->required();
  eval_det->add_option("--gt", gt_path, "Annotation file (frame = image id)")->required();
  eval_det->add_option("--output", det_common.output, "Also write the report here");
  eval_det->add_option("--ignore-overlap", ignore_overlap,
                       "Overlap with ignored regions: iou, or iop (intersection over prediction)")
      ->check(CLI::IsMember({"iou", "iop"}))
      ->capture_default_str();
  add_format(eval_det, det_common);

  // eval-mot
  auto* eval_mot = app.add_subcommand("eval-mot", "Tracklet AP against VisDrone MOT annotations");
  std::string tracks_path, mot_gt_path;
  Common mot_common;
  eval_mot->add_option("--tracks", tracks_path, "Tracker output file, or directory of *.txt")->required();
  eval_mot->add_option("--gt", mot_gt_path, "Annotation file, or directory with matching names")->required();
  eval_mot->add_option("--output", mot_common.output, "Also write the report here");
  add_format(eval_mot, mot_common);

  // anchors report
  auto* anchors_cmd = app.add_subcommand("anchors", "Anchor analysis");
  anchors_cmd->require_subcommand(1);
  auto* report = anchors_cmd->add_subcommand("report", "Anchor coverage of ground-truth boxes");
  std::string preset = "baseline", anchor_config, anchor_gt;
  int width = 1920, height = 1080;
  double pos_iou = 0.5;
  bool force_best = false;
  Common anchor_common;
  report->add_option("--preset", preset, "Built-in anchor configuration")
      ->check(CLI::IsMember({"baseline", "dense"}))
      ->capture_default_str();
  report->add_option("--config", anchor_config, "Anchor config file (overrides --preset)");
  report->add_option("--gt", anchor_gt, "Annotation file; frames are images")->required();
  report->add_option("--width", width, "Image width")->check(CLI::PositiveNumber)->capture_default_str();
  report->add_option("--height", height, "Image height")->check(CLI::PositiveNumber)->capture_default_str();
  report->add_option("--pos-iou", pos_iou, "Positive IoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  report->add_flag("--force-best-match", force_best, "Promote each gt's best anchor to positive");
  report->add_option("--output", anchor_common.output, "Also write the report here");
  add_format(report, anchor_common);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence");
  synth::SynthConfig sc;
  std::vector<std::string> occlusions;
  std::string synth_dir;
  synth_cmd->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--identities", sc.num_identities, "Number of identities")->capture_default_str();
  synth_cmd->add_option("--frames", sc.frames, "Number of frames")->capture_default_str();
  synth_cmd->add_option("--width", sc.image_size.width, "Image width")->capture_default_str();
  synth_cmd->add_option("--height", sc.image_size.height, "Image height")->capture_default_str();
  synth_cmd->add_option("--max-speed", sc.max_speed, "Max speed per axis, px/frame")->capture_default_str();
  synth_cmd->add_option("--noise", sc.detection_noise, "Detection noise std, px")->capture_default_str();
  synth_cmd->add_option("--miss-prob", sc.miss_probability, "Per-detection miss probability")
      ->capture_default_str();
  synth_cmd->add_option("--occlusion", occlusions, "target_id:first:last (repeatable)");
  synth_cmd->add_option("--dim", sc.embedding_dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--intra", sc.intra_radius, "Intra-identity cosine radius")->capture_default_str();
  synth_cmd->add_option("--inter", sc.inter_min_distance, "Required inter-identity cosine distance")
      ->capture_default_str();
  synth_cmd->add_option("--class", sc.classes, "Classes assigned round-robin (repeatable)");
  synth_cmd->add_option("--output", synth_dir, "Output directory")->required();

  std::vector<const char*> argv{"aerotrack"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (track->parsed()) {
      tracking::TrackerParams params;
      RunManifest manifest;
      manifest.command = join_args(args);
      if (!track_config.empty()) {
        params = io::read_tracker_config(track_config);
        manifest.add_input(track_config);
      }
      for (const auto& o : overrides) io::apply_tracker_override(params, o);
      std::optional<postprocess::NmsParams> nms;
      if (use_nms) nms = nms_params;
      manifest.config = {{"tracker", tracker_json(params)}};
      if (nms) {
        manifest.config["nms"] = {{"score_threshold", nms->score_thresh},
                                  {"nms_iou", nms->nms_iou},
                                  {"max_dets", nms->max_dets}};
      }

      std::vector<TrackJob> batch;
      if (fs::is_directory(det_path)) {
        if (!fs::is_directory(emb_path)) {
          throw ValidationError("--detections is a directory, so --embeddings must be one too");
        }
        fs::create_directories(track_common.output);
        for (const auto& file : list_files(det_path, ".txt")) {
          const fs::path emb = fs::path(emb_path) / (file.stem().string() + ".emb");
          if (!fs::exists(emb)) throw ValidationError("no embeddings for " + file.string() + " (expected " + emb.string() + ")");
          batch.push_back({file, emb, fs::path(track_common.output) / file.filename()});
        }
      } else {
        batch.push_back({det_path, emb_path, track_common.output});
      }

      std::vector<std::string> errors(batch.size());
      std::vector<std::size_t> rows(batch.size(), 0);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < batch.size(); i = next++) {
          try {
            rows[i] = run_track_job(batch[i], params, nms);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      const std::size_t threads = std::min<std::size_t>(jobs, std::max<std::size_t>(batch.size(), 1));
      for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      bool failed = false;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!errors[i].empty()) {
          err << "error: " << errors[i] << "\n";
          failed = true;
          continue;
        }
        manifest.add_input(batch[i].detections);
        manifest.add_input(batch[i].embeddings);
        manifest.outputs.push_back(batch[i].output.string());
        out << batch[i].output.string() << ": " << rows[i] << " rows\n";
      }
      if (failed) return kExitFailure;
      manifest.wall_seconds = seconds_since(start);
      manifest.write(manifest_path_for(track_common.output));
      return kExitOk;
    }

    if (eval_det->parsed()) {
      const auto preds = io::read_detections(pred_path);
      const auto gt = io::to_detection_ground_truth(io::read_annotations(gt_path));
      std::vector<Detection> flat;
      for (const auto& frame : preds) flat.insert(flat.end(), frame.detections.begin(), frame.detections.end());
      eval::EvalConfig config = eval::EvalConfig::detection();
      config.ignore_overlap = ignore_overlap == "iop" ? eval::IgnoreOverlap::kIntersectionOverPrediction
                                                      : eval::IgnoreOverlap::kIoU;
      const auto metrics = eval::eval_detection(flat, gt, config);
      RunManifest manifest;
      manifest.command = join_args(args);
      manifest.config = {{"iou_thresholds", config.iou_thresholds},
                         {"max_dets_levels", config.max_dets_levels},
                         {"categories", config.categories},
                         {"ignore_overlap", ignore_overlap},
                         {"ignore_threshold", config.ignore_threshold}};
      manifest.add_input(pred_path);
      manifest.add_input(gt_path);
      emit_report(out, det_common, report_text(metrics, "Detection metrics"), report_json(metrics),
                  manifest, start);
      return kExitOk;
    }

    if (eval_mot->parsed()) {
      RunManifest manifest;
      manifest.command = join_args(args);
      std::vector<eval::TrackingSequence> sequences;
      auto load = [&](const fs::path& tracks, const fs::path& gt) {
        sequences.push_back({io::read_tracks(tracks), io::to_gt_tracklets(io::read_annotations(gt))});
        manifest.add_input(tracks);
        manifest.add_input(gt);
      };
      if (fs::is_directory(tracks_path)) {
        if (!fs::is_directory(mot_gt_path)) {
          throw ValidationError("--tracks is a directory, so --gt must be one too");
        }
        for (const auto& file : list_files(tracks_path, ".txt")) {
          const fs::path gt = fs::path(mot_gt_path) / file.filename();
          if (!fs::exists(gt)) throw ValidationError("no annotations for " + file.string());
          load(file, gt);
        }
      } else {
        load(tracks_path, mot_gt_path);
      }
      const eval::EvalConfig config = eval::EvalConfig::tracking();
      const auto metrics = eval::eval_tracking(sequences, config);
      manifest.config = {{"iou_thresholds", config.iou_thresholds}, {"categories", config.categories}};
      emit_report(out, mot_common, report_text(metrics, "Tracklet metrics"), report_json(metrics),
                  manifest, start);
      return kExitOk;
    }

    if (report->parsed()) {
      anchors::AnchorConfig config =
          preset == "dense" ? anchors::AnchorConfig::dense() : anchors::AnchorConfig::baseline();
      RunManifest manifest;
      manifest.command = join_args(args);
      if (!anchor_config.empty()) {
        config = io::read_anchor_config(anchor_config);
        manifest.add_input(anchor_config);
      }
      const auto records = io::read_annotations(anchor_gt);
      manifest.add_input(anchor_gt);
      std::map<FrameId, std::vector<BoundingBox>> per_image;
      for (const auto& rec : records) {
        if (visdrone::is_object_class(rec.category)) per_image[rec.frame].push_back(rec.box);
      }
      const anchors::ImageSize size{width, height};
      anchors::CoverageStats stats;
      for (const auto& [image, boxes] : per_image) {
        stats = merge(std::move(stats), anchors::coverage_report(config, boxes, size, pos_iou, force_best));
      }
      if (per_image.empty()) stats = anchors::coverage_report(config, {}, size, pos_iou, force_best);
      manifest.config = {{"anchors", io::serialize_anchor_config(config)},
                         {"image_size", {width, height}},
                         {"pos_iou", pos_iou},
                         {"force_best_match", force_best}};
      const std::string title =
          "Anchor coverage (" + (anchor_config.empty() ? preset : anchor_config) + ")";
      emit_report(out, anchor_common, coverage_text(stats, title), coverage_json(stats), manifest, start);
      return kExitOk;
    }

    if (synth_cmd->parsed()) {
      for (const auto& o : occlusions) {
        std::istringstream in(o);
        std::string id, first, last;
        if (!std::getline(in, id, ':') || !std::getline(in, first, ':') || !std::getline(in, last) ||
            id.empty() || first.empty() || last.empty()) {
          throw ValidationError("occlusion '" + o + "' is not target_id:first:last");
        }
        std::size_t target = 0;
        try {
          target = std::stoul(id);
          sc.occlusions.push_back({target - 1, std::stoll(first), std::stoll(last)});
        } catch (const std::logic_error&) {
          throw ValidationError("occlusion '" + o + "' is not target_id:first:last");
        }
        if (target == 0) throw ValidationError("occlusion target ids start at 1");
      }
      const auto generated = synth::generate(sc);
      const fs::path dir(synth_dir);
      fs::create_directories(dir);
      io::write_annotations(generated.ground_truth, dir / "gt.txt");
      io::write_detections(generated.detections, dir / "detections.txt");
      io::write_embeddings(generated.embeddings, dir / "embeddings.emb");
      RunManifest manifest;
      manifest.command = join_args(args);
      nlohmann::json occ = nlohmann::json::array();
      for (const auto& w : sc.occlusions) occ.push_back({{"target_id", w.identity + 1}, {"first", w.first}, {"last", w.last}});
      manifest.config = {{"seed", sc.seed},
                         {"identities", sc.num_identities},
                         {"frames", sc.frames},
                         {"image_size", {sc.image_size.width, sc.image_size.height}},
                         {"max_speed", sc.max_speed},
                         {"noise", sc.detection_noise},
                         {"miss_probability", sc.miss_probability},
                         {"occlusions", occ},
                         {"embedding_dim", sc.embedding_dim},
                         {"intra_radius", sc.intra_radius},
                         {"inter_min_distance", sc.inter_min_distance},
                         {"classes", sc.classes}};
      for (const char* name : {"gt.txt", "detections.txt", "embeddings.emb"}) {
        manifest.outputs.push_back((dir / name).string());
      }
      manifest.wall_seconds = seconds_since(start);
      manifest.write(dir / "manifest.json");
      out << "wrote " << generated.ground_truth.size() << " gt rows, "
          << generated.embeddings.size() << " detections to " << dir.string() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace aerotrack::cli
