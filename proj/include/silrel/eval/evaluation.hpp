/**
 * Copyright 2026 The silrel Authors
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

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silrel/geometry/geometry.hpp"
#include "silrel/model/sil_model.hpp"
#include "silrel/scenes/detector.hpp"
#include "silrel/scenes/scene.hpp"

namespace silrel::eval {

struct LabeledBox {
    std::size_t category = 0;
    geo::BBox box;
};

struct RelationPrediction {
    LabeledBox subject;
    LabeledBox object;
    std::size_t predicate = 0;
    double score = 0.0;
};

/// Ground-truth triplet with its boxes resolved.
struct GroundTruthRelation {
    LabeledBox subject;
    LabeledBox object;
    std::size_t predicate = 0;
};

enum class TaskSetting { kPredicateClassification, kUnionBoxDetection, kTwoBoxesDetection };

/// Report key prefix: predicate_cls, union_box, two_boxes.
std::string task_key(TaskSetting setting);
TaskSetting task_from_key(const std::string& key);

bool match_triplet(const RelationPrediction& pred, const GroundTruthRelation& gt,
                   TaskSetting setting);

std::vector<GroundTruthRelation> ground_truth_relations(const scenes::SceneAnnotation& scene);

struct RecallCount {
    std::size_t recalled = 0;
    std::size_t total = 0;
};

/// One image: top-K predictions by score (stable, so equal scores keep input
/// order) certify ground truths greedily in score order, each prediction at
/// most one ground truth, each ground truth at most once.
RecallCount recall_at_k_image(const std::vector<RelationPrediction>& predictions,
                              const std::vector<GroundTruthRelation>& ground_truth,
                              std::size_t k, TaskSetting setting);

/// Total recalled over total ground truths; nullopt when there are none.
std::optional<double> recall_at_k(const std::vector<std::vector<RelationPrediction>>& predictions,
                                  const std::vector<std::vector<GroundTruthRelation>>& ground_truth,
                                  std::size_t k, TaskSetting setting);

/// Average precision of one ranked list: all-point interpolated area under
/// the precision/recall curve. `hits` marks true positives in rank order.
double average_precision(const std::vector<bool>& hits, std::size_t num_ground_truth);

/// Per-class AP at the IoU threshold, averaged over classes present in the
/// ground truth. Detections are ranked by score, ties by (image, index).
/// nullopt when the ground truth is empty.
std::optional<double> detector_map(const std::vector<std::vector<geo::ScoredBox>>& detections,
                                   const std::vector<std::vector<scenes::ObjectInstance>>& ground_truth,
                                   double iou_threshold = 0.5);

struct EvalOptions {
    std::vector<TaskSetting> tasks{TaskSetting::kPredicateClassification,
                                   TaskSetting::kUnionBoxDetection,
                                   TaskSetting::kTwoBoxesDetection};
    std::vector<std::size_t> ks{50, 100};
    scenes::DetectorNoiseConfig noise;  // seed is mixed with the scene index
    std::size_t workers = 1;
    std::size_t batch_size = 32;
};

struct EvalReport {
    std::size_t images = 0;
    std::size_t gt_relations = 0;
    std::size_t detections = 0;
    std::size_t scored_pairs = 0;
    std::size_t skipped_pairs = 0;  // pairs whose masks could not be rasterised
    /// "<task>.recall@<k>" -> value; absent when there is no ground truth.
    std::map<std::string, std::optional<double>> recalls;
    bool detection_run = false;
    std::optional<double> detector_map;  // absent without ground-truth objects

    /// Flat "key value" lines in a stable order; undefined values print "n/a".
    std::string to_text() const;
    static EvalReport from_text(const std::string& text);
};

/// Predictions for every ordered pair of `boxes` (scored with predict_pairs).
std::vector<RelationPrediction> predict_relations(const model::RelationModel& model,
                                                  const geo::Image& image,
                                                  const std::vector<geo::ScoredBox>& boxes,
                                                  std::size_t batch_size,
                                                  std::size_t* skipped = nullptr);

EvalReport evaluate_dataset(const std::vector<scenes::SceneAnnotation>& scenes,
                            const model::RelationModel& model, const EvalOptions& options);

}  // namespace silrel::eval
