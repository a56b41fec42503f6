// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "aerotrack/error.hpp"

namespace aerotrack::synth {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

void remove_components(Vec& v, const std::vector<Vec>& basis) {
  // Two passes of Gram-Schmidt keep the residual orthogonal to working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vec& b : basis) {
      const double c = dot(v, b);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * b[k];
    }
  }
}

Vec gaussian_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

// A unit vector orthogonal to every row of `basis`.
Vec orthogonal_unit(const std::vector<Vec>& basis, std::size_t dim, std::mt19937_64& rng) {
  while (true) {
    Vec v = gaussian_vector(dim, rng);
    remove_components(v, basis);
    if (std::sqrt(dot(v, v)) > 1e-6) {
      normalize(v);
      return v;
    }
  }
}

struct Identity {
  double center_x = 0.0;
  double center_y = 0.0;
  double velocity_x = 0.0;
  double velocity_y = 0.0;
  double width = 0.0;
  double height = 0.0;
  int class_id = 0;
};

}  // namespace

void SynthConfig::validate() const {
  if (num_identities == 0) throw ValidationError("num_identities must be >= 1");
  if (frames == 0) throw ValidationError("frames must be >= 1");
  if (first_frame < 0) throw ValidationError("first_frame must be nonnegative");
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("image size must be positive");
  }
  if (!(min_side > 0.0 && min_side <= max_side)) {
    throw ValidationError("box sides need 0 < min_side <= max_side");
  }
  if (!(max_speed >= 0.0)) throw ValidationError("max_speed must be >= 0");
  if (!(detection_noise >= 0.0)) throw ValidationError("detection_noise must be >= 0");
  if (!(miss_probability >= 0.0 && miss_probability <= 1.0)) {
    throw ValidationError("miss_probability must lie in [0, 1]");
  }
  for (const auto& w : occlusions) {
    if (w.identity >= num_identities) {
      throw ValidationError("occlusion names identity " + std::to_string(w.identity) +
                            " but there are " + std::to_string(num_identities));
    }
    if (w.first > w.last) throw ValidationError("occlusion window ends before it starts");
  }
  if (classes.empty()) throw ValidationError("at least one class is required");
  for (const int c : classes) {
    if (!visdrone::is_object_class(c)) {
      throw ValidationError("class " + std::to_string(c) + " is not an object class");
    }
  }
  if (!(min_confidence >= 0.0 && min_confidence <= max_confidence && max_confidence <= 1.0)) {
    throw ValidationError("confidence range must satisfy 0 <= min <= max <= 1");
  }
  if (!(intra_radius >= 0.0 && intra_radius < 1.0)) {
    throw ValidationError("intra_radius must lie in [0, 1)");
  }
  if (!(inter_min_distance >= 0.0 && inter_min_distance <= 2.0)) {
    throw ValidationError("inter_min_distance must lie in [0, 2]");
  }
  if (embedding_dim <= num_identities) {
    throw ValidationError("embedding_dim " + std::to_string(embedding_dim) +
                          " cannot separate " + std::to_string(num_identities) +
                          " identities; it must exceed the identity count");
  }
  const double guaranteed = (1.0 - intra_radius) * (1.0 - intra_radius);
  if (guaranteed < inter_min_distance) {
    throw ValidationError("intra_radius " + std::to_string(intra_radius) +
                          " only guarantees inter-identity distance " + std::to_string(guaranteed) +
                          " < required " + std::to_string(inter_min_distance));
  }
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = config.embedding_dim;

  std::vector<Vec> anchors;
  for (std::size_t i = 0; i < config.num_identities; ++i) {
    anchors.push_back(orthogonal_unit(anchors, dim, rng));
  }

  std::vector<Identity> identities(config.num_identities);
  const double w_img = config.image_size.width;
  const double h_img = config.image_size.height;
  for (std::size_t i = 0; i < identities.size(); ++i) {
    Identity& id = identities[i];
    id.width = config.min_side + (config.max_side - config.min_side) * unit(rng);
    id.height = config.min_side + (config.max_side - config.min_side) * unit(rng);
    id.center_x = id.width + (w_img - 2.0 * id.width) * unit(rng);
    id.center_y = id.height + (h_img - 2.0 * id.height) * unit(rng);
    id.velocity_x = config.max_speed * (2.0 * unit(rng) - 1.0);
    id.velocity_y = config.max_speed * (2.0 * unit(rng) - 1.0);
    id.class_id = config.classes[i % config.classes.size()];
  }

  auto occluded = [&](std::size_t identity, FrameId frame) {
    return std::any_of(config.occlusions.begin(), config.occlusions.end(),
                       [&](const OcclusionWindow& w) {
                         return w.identity == identity && frame >= w.first && frame <= w.last;
                       });
  };

  SynthOutput out;
  out.embeddings.dim = dim;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t row = 0;
  for (std::size_t f = 0; f < config.frames; ++f) {
    const FrameId frame = config.first_frame + static_cast<FrameId>(f);
    FrameDetections frame_dets{frame, {}};
    for (std::size_t i = 0; i < identities.size(); ++i) {
      const Identity& id = identities[i];
      const double t = static_cast<double>(f);
      const BoundingBox truth = BoundingBox::from_center(
          id.center_x + id.velocity_x * t, id.center_y + id.velocity_y * t, id.width, id.height);
      const bool hidden = occluded(i, frame);
      out.ground_truth.push_back(
          {frame, static_cast<std::int64_t>(i + 1), truth, 1.0, id.class_id, 0, hidden ? 2 : 0});

      // Every identity consumes the same draws each frame so one setting
      // does not reshuffle the others.
      const bool missed = unit(rng) < config.miss_probability;
      BoundingBox box = truth;
      if (config.detection_noise > 0.0) {
        box.left += config.detection_noise * noise(rng);
        box.top += config.detection_noise * noise(rng);
        box.width = std::max(1.0, box.width + config.detection_noise * noise(rng));
        box.height = std::max(1.0, box.height + config.detection_noise * noise(rng));
      }
      const double confidence =
          config.min_confidence + (config.max_confidence - config.min_confidence) * unit(rng);
      // Cosine distance to the anchor is 1 - c, uniform in [0, intra_radius].
      const double c = 1.0 - config.intra_radius * unit(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      const Vec tangent = orthogonal_unit(anchors, dim, rng);
      if (hidden || missed) continue;

      Detection det;
      det.frame_id = frame;
      det.box = box;
      det.class_id = id.class_id;
      det.confidence = confidence;
      det.embedding_ref = row++;
      frame_dets.detections.push_back(det);
      for (std::size_t k = 0; k < dim; ++k) {
        out.embeddings.data.push_back(static_cast<float>(c * anchors[i][k] + s * tangent[k]));
      }
      out.row_identity.push_back(i);
    }
    if (!frame_dets.detections.empty()) out.detections.push_back(std::move(frame_dets));
  }

  if (out.row_identity.size() > 1) {
    const double achieved = min_inter_identity_distance(out.embeddings, out.row_identity);
    if (achieved < config.inter_min_distance - 1e-6) {
      throw std::logic_error("generated embeddings violate the separation bound: " +
                             std::to_string(achieved));
    }
  }
  return out;
}

double min_inter_identity_distance(const EmbeddingTable& table,
                                   const std::vector<std::size_t>& row_identity) {
  if (row_identity.size() != table.size()) {
    throw ValidationError("row_identity does not match the embedding table");
  }
  std::vector<Vec> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto r = table.row(i);
    Vec v(r.begin(), r.end());
    normalize(v);
    rows.push_back(std::move(v));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (row_identity[i] == row_identity[j]) continue;
      best = std::min(best, 1.0 - dot(rows[i], rows[j]));
    }
  }
  return best;
}

}  // namespace aerotrack::synth
