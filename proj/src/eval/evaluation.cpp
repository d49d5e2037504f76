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

#include "silrel/eval/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "silrel/model/pairs.hpp"
#include "silrel/random.hpp"

namespace silrel::eval {

namespace {

bool same_labeled_box(const LabeledBox& a, const LabeledBox& b) {
    return a.category == b.category && a.box == b.box;
}

// Overlap quality used to pick among several ground truths one prediction
// could certify; negative when it does not match at all.
double match_quality(const RelationPrediction& pred, const GroundTruthRelation& gt,
                     TaskSetting setting) {
    if (pred.predicate != gt.predicate || pred.subject.category != gt.subject.category ||
        pred.object.category != gt.object.category) {
        return -1.0;
    }
    switch (setting) {
        case TaskSetting::kPredicateClassification:
            return same_labeled_box(pred.subject, gt.subject) &&
                           same_labeled_box(pred.object, gt.object)
                       ? 1.0
                       : -1.0;
        case TaskSetting::kUnionBoxDetection: {
            const geo::Bounds unbounded{1e300, 1e300};
            const double v =
                geo::iou(geo::union_box(pred.subject.box, pred.object.box, 0.0, unbounded),
                         geo::union_box(gt.subject.box, gt.object.box, 0.0, unbounded));
            return v >= 0.5 ? v : -1.0;
        }
        case TaskSetting::kTwoBoxesDetection: {
            const double s = geo::iou(pred.subject.box, gt.subject.box);
            const double o = geo::iou(pred.object.box, gt.object.box);
            return s >= 0.5 && o >= 0.5 ? std::min(s, o) : -1.0;
        }
    }
    return -1.0;
}

std::vector<std::size_t> score_order(const std::vector<RelationPrediction>& predictions) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].score > predictions[b].score;
    });
    return order;
}

std::string format_value(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

std::string task_key(TaskSetting setting) {
    switch (setting) {
        case TaskSetting::kPredicateClassification: return "predicate_cls";
        case TaskSetting::kUnionBoxDetection: return "union_box";
        case TaskSetting::kTwoBoxesDetection: return "two_boxes";
    }
    return "";
}

TaskSetting task_from_key(const std::string& key) {
    for (auto t : {TaskSetting::kPredicateClassification, TaskSetting::kUnionBoxDetection,
                   TaskSetting::kTwoBoxesDetection}) {
        if (task_key(t) == key) return t;
    }
    throw std::invalid_argument("unknown task '" + key +
                                "' (expected predicate_cls, union_box or two_boxes)");
}

bool match_triplet(const RelationPrediction& pred, const GroundTruthRelation& gt,
                   TaskSetting setting) {
    return match_quality(pred, gt, setting) >= 0.0;
}

std::vector<GroundTruthRelation> ground_truth_relations(const scenes::SceneAnnotation& scene) {
    std::vector<GroundTruthRelation> out;
    for (const auto& r : scene.relations) {
        const auto& s = scene.objects.at(r.subject);
        const auto& o = scene.objects.at(r.object);
        out.push_back({{s.category, s.box}, {o.category, o.box}, r.predicate});
    }
    return out;
}

RecallCount recall_at_k_image(const std::vector<RelationPrediction>& predictions,
                              const std::vector<GroundTruthRelation>& ground_truth,
                              std::size_t k, TaskSetting setting) {
    if (k == 0) throw std::invalid_argument("recall_at_k: K must be positive");
    RecallCount count;
    count.total = ground_truth.size();
    std::vector<bool> taken(ground_truth.size(), false);
    const auto order = score_order(predictions);
    const std::size_t top = std::min(k, order.size());
    for (std::size_t r = 0; r < top; ++r) {
        const auto& pred = predictions[order[r]];
        std::size_t best = ground_truth.size();
        double best_quality = -1.0;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (taken[g]) continue;
            const double q = match_quality(pred, ground_truth[g], setting);
            if (q > best_quality) {
                best_quality = q;
                best = g;
            }
        }
        if (best < ground_truth.size()) {
            taken[best] = true;
            ++count.recalled;
        }
    }
    return count;
}

std::optional<double> recall_at_k(const std::vector<std::vector<RelationPrediction>>& predictions,
                                  const std::vector<std::vector<GroundTruthRelation>>& ground_truth,
                                  std::size_t k, TaskSetting setting) {
    if (predictions.size() != ground_truth.size()) {
        throw std::invalid_argument("recall_at_k: prediction and ground-truth image counts differ");
    }
    RecallCount total;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto c = recall_at_k_image(predictions[i], ground_truth[i], k, setting);
        total.recalled += c.recalled;
        total.total += c.total;
    }
    if (total.total == 0) return std::nullopt;
    return static_cast<double>(total.recalled) / static_cast<double>(total.total);
}

double average_precision(const std::vector<bool>& hits, std::size_t num_ground_truth) {
    if (num_ground_truth == 0) throw std::invalid_argument("average_precision: no ground truth");
    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        tp += hits[i];
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(num_ground_truth));
    }
    // Precision envelope, then area under the step curve.
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

std::optional<double> detector_map(const std::vector<std::vector<geo::ScoredBox>>& detections,
                                   const std::vector<std::vector<scenes::ObjectInstance>>& ground_truth,
                                   double iou_threshold) {
    if (detections.size() != ground_truth.size()) {
        throw std::invalid_argument("detector_map: detection and ground-truth image counts differ");
    }
    std::map<std::size_t, std::size_t> gt_per_class;
    for (const auto& objects : ground_truth) {
        for (const auto& o : objects) ++gt_per_class[o.category];
    }
    if (gt_per_class.empty()) return std::nullopt;

    struct Ranked {
        double score;
        std::size_t image;
        std::size_t index;
    };
    double sum = 0.0;
    for (const auto& [category, n_gt] : gt_per_class) {
        std::vector<Ranked> ranked;
        for (std::size_t img = 0; img < detections.size(); ++img) {
            for (std::size_t d = 0; d < detections[img].size(); ++d) {
                if (detections[img][d].category == category) {
                    ranked.push_back({detections[img][d].score, img, d});
                }
            }
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
        std::vector<std::vector<bool>> taken(ground_truth.size());
        for (std::size_t img = 0; img < ground_truth.size(); ++img) {
            taken[img].assign(ground_truth[img].size(), false);
        }
        std::vector<bool> hits;
        for (const auto& r : ranked) {
            const auto& box = detections[r.image][r.index].box;
            const auto& objects = ground_truth[r.image];
            std::size_t best = objects.size();
            double best_iou = iou_threshold;
            for (std::size_t g = 0; g < objects.size(); ++g) {
                if (objects[g].category != category || taken[r.image][g]) continue;
                const double v = geo::iou(box, objects[g].box);
                if (v >= best_iou && (best == objects.size() || v > best_iou)) {
                    best_iou = v;
                    best = g;
                }
            }
            if (best < objects.size()) taken[r.image][best] = true;
            hits.push_back(best < objects.size());
        }
        sum += average_precision(hits, n_gt);
    }
    return sum / static_cast<double>(gt_per_class.size());
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << "images " << images << "\n";
    out << "gt_relations " << gt_relations << "\n";
    out << "detections " << detections << "\n";
    out << "scored_pairs " << scored_pairs << "\n";
    out << "skipped_pairs " << skipped_pairs << "\n";
    for (const auto& [key, value] : recalls) out << key << " " << format_value(value) << "\n";
    if (detection_run) out << "detector.map " << format_value(detector_map) << "\n";
    return out.str();
}

EvalReport EvalReport::from_text(const std::string& text) {
    EvalReport r;
    std::istringstream in(text);
    std::string key;
    std::string value;
    while (in >> key >> value) {
        const std::optional<double> v =
            value == "n/a" ? std::nullopt : std::optional<double>(std::stod(value));
        if (key == "images") r.images = std::stoull(value);
        else if (key == "gt_relations") r.gt_relations = std::stoull(value);
        else if (key == "detections") r.detections = std::stoull(value);
        else if (key == "scored_pairs") r.scored_pairs = std::stoull(value);
        else if (key == "skipped_pairs") r.skipped_pairs = std::stoull(value);
        else if (key == "detector.map") {
            r.detection_run = true;
            r.detector_map = v;
        }
        else if (key.find(".recall@") != std::string::npos) r.recalls[key] = v;
        else throw std::invalid_argument("unknown report field '" + key + "'");
    }
    return r;
}

std::vector<RelationPrediction> predict_relations(const model::RelationModel& model,
                                                  const geo::Image& image,
                                                  const std::vector<geo::ScoredBox>& boxes,
                                                  std::size_t batch_size, std::size_t* skipped) {
    const std::size_t s = model.config().input_size;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& [a, b] : scenes::enumerate_pairs(boxes.size())) {
        const geo::BBox frame = model::pair_frame(boxes[a].box, boxes[b].box, image.bounds());
        try {
            geo::rasterize_dual_masks(frame, boxes[a].box, boxes[b].box, s);
        } catch (const std::invalid_argument&) {
            if (skipped) ++*skipped;
            continue;
        }
        pairs.emplace_back(a, b);
    }
    const auto scored = model::predict_pairs(model, image, boxes, pairs, batch_size);
    std::vector<RelationPrediction> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& sb = boxes[pairs[i].first];
        const auto& ob = boxes[pairs[i].second];
        out.push_back({{sb.category, sb.box}, {ob.category, ob.box}, scored[i].predicate,
                       scored[i].score});
    }
    return out;
}

EvalReport evaluate_dataset(const std::vector<scenes::SceneAnnotation>& scenes,
                            const model::RelationModel& model, const EvalOptions& options) {
    for (auto k : options.ks) {
        if (k == 0) throw std::invalid_argument("evaluate_dataset: K must be positive");
    }
    options.noise.validate();
    const bool want_cls = std::count(options.tasks.begin(), options.tasks.end(),
                                     TaskSetting::kPredicateClassification) > 0;
    const bool want_det = std::any_of(options.tasks.begin(), options.tasks.end(), [](auto t) {
        return t != TaskSetting::kPredicateClassification;
    });

    struct SceneResult {
        std::vector<GroundTruthRelation> gt;
        std::vector<RelationPrediction> cls;
        std::vector<RelationPrediction> det;
        std::vector<geo::ScoredBox> detections;
        std::size_t skipped = 0;
    };
    std::vector<SceneResult> results(scenes.size());
    const std::size_t num_categories = model.config().num_categories;
    auto run = [&](std::size_t i) {
        const auto& scene = scenes[i];
        SceneResult& r = results[i];
        r.gt = ground_truth_relations(scene);
        if (want_cls) {
            std::vector<geo::ScoredBox> boxes;
            for (const auto& o : scene.objects) boxes.push_back({o.box, o.category, 1.0});
            r.cls = predict_relations(model, scene.pixels, boxes, options.batch_size, &r.skipped);
        }
        if (want_det) {
            auto noise = options.noise;
            noise.seed = mix_seed(options.noise.seed, i);
            r.detections = scenes::oracle_detect(scene, num_categories, noise);
            r.det = predict_relations(model, scene.pixels, r.detections, options.batch_size,
                                      &r.skipped);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, scenes.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < scenes.size(); ++i) run(i);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < scenes.size(); i += workers) run(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    EvalReport report;
    report.images = scenes.size();
    std::vector<std::vector<GroundTruthRelation>> gts;
    std::vector<std::vector<RelationPrediction>> cls;
    std::vector<std::vector<RelationPrediction>> det;
    std::vector<std::vector<geo::ScoredBox>> detections;
    std::vector<std::vector<scenes::ObjectInstance>> objects;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        auto& r = results[i];
        report.gt_relations += r.gt.size();
        report.detections += r.detections.size();
        report.scored_pairs += r.cls.size() + r.det.size();
        report.skipped_pairs += r.skipped;
        gts.push_back(std::move(r.gt));
        cls.push_back(std::move(r.cls));
        det.push_back(std::move(r.det));
        detections.push_back(std::move(r.detections));
        objects.push_back(scenes[i].objects);
    }
    for (auto task : options.tasks) {
        const auto& preds = task == TaskSetting::kPredicateClassification ? cls : det;
        for (auto k : options.ks) {
            report.recalls[task_key(task) + ".recall@" + std::to_string(k)] =
                recall_at_k(preds, gts, k, task);
        }
    }
    if (want_det) {
        report.detection_run = true;
        report.detector_map = detector_map(detections, objects);
    }
    return report;
}

}  // namespace silrel::eval
