// Copyright 2026 The milnet authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "milnet/layers.hpp"
#include "milnet/tensor.hpp"

namespace milnet {

enum class SupervisionLevel { ImageLevel, PerInstance };
enum class Split { Train, Val, Test };

struct DetectorMeta {
  std::string source;
  double threshold = 0.8;
};

/// One image record: RGB pixels in [0, 1], person boxes in image
/// coordinates, an image-level label vector, and (when available)
/// per-instance label vectors aligned with the boxes.
struct Sample {
  std::string id;
  Tensor image;  // 3 x H x W
  std::vector<Roi> boxes;
  std::vector<int> image_labels;  // C entries of 0/1
  std::optional<std::vector<std::vector<int>>> per_box_labels;
  std::optional<DetectorMeta> detector_meta;
};

struct Corpus {
  std::vector<std::string> class_names;
  SupervisionLevel supervision = SupervisionLevel::ImageLevel;
  Split split = Split::Train;
  std::vector<Sample> samples;

  int num_classes() const { return static_cast<int>(class_names.size()); }
};

Corpus load_corpus(const std::string& path);
void save_corpus(const std::string& path, const Corpus& corpus);

/// Settings for the synthetic scene generator.
///
/// Scenes contain 1..max_people gray person boxes. Each person performs one
/// of C = 2 x (C/2) verb-object classes: the verb is drawn as a two-patch
/// arrangement inside the box (which patch is brighter, top or bottom),
/// while the object is a colored glyph that sits inside the box with
/// probability 1 - context_dependence and out in the surrounding scene
/// otherwise. Image labels are the OR over people; per-person ground truth
/// is kept alongside for diagnostics and per-instance training.
struct SynthSpec {
  int n_images = 300;       // train split size
  int n_test = 100;         // test split size
  int num_classes = 8;      // even, >= 2
  int max_people = 3;
  int image_size = 40;
  double context_dependence = 1.0;  // probability the object leaves the box
  double class_skew = 1.0;  // most:least likely class probability ratio
  std::uint64_t seed = 0;
};

/// Deterministic (spec, seed) -> (train, test). Scene seeds are derived per
/// split, so the two corpora never share a scene.
std::pair<Corpus, Corpus> synth_generate(const SynthSpec& spec);

struct ClassStat {
  int positives = 0;
  int negatives = 0;
  double neg_pos_ratio = 0.0;  // +inf encoded as infinity when positives == 0
};

struct ClassStats {
  std::vector<ClassStat> per_class;
  double max_ratio = 0.0;  // over classes with at least one positive
  int empty_classes = 0;   // classes with no positive sample
};

/// Image-level positive/negative counts and imbalance ratios per class.
ClassStats class_stats(const Corpus& corpus);

}  // namespace milnet
