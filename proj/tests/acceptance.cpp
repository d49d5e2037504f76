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

// Acceptance suite: one pass/fail line per criterion. Thresholds are the
// constants below; nothing is read from the environment.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "silrel/autodiff/gradcheck_suite.hpp"
#include "silrel/autodiff/memory.hpp"
#include "silrel/cli/commands.hpp"
#include "silrel/model/model_gradcheck.hpp"
#include "silrel/model/trainer.hpp"
#include "silrel/random.hpp"

using namespace silrel;
namespace fs = std::filesystem;

namespace {

// 1: gradient correctness
constexpr std::size_t kGradSeeds = 10;
constexpr double kGradEps = 1e-5;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 60.0;
// 2: SIL algebra
constexpr std::size_t kAlgebraTrials = 20;
constexpr double kGateProportionality = 1e-12;
// 3: evaluator oracle
constexpr int kOracleInstances = 200;
constexpr std::uint64_t kOracleSeed = 2024;
constexpr double kOracleBudgetSeconds = 10.0;
// 4: geometry
constexpr int kGeometryCases = 1000;
// 5, 6, 8: frozen benchmark (default RunConfig: 8 categories, 6 predicates,
// 2000 train / 500 test scenes, 30 epochs, batch 32, default ModelConfig)
constexpr std::uint64_t kBenchmarkSeed = 1;
constexpr double kAblationMargin = 0.03;
constexpr double kChance = 1.0 / 6.0;
// 7: training sanity
constexpr std::size_t kInitialLossSeeds = 10;
constexpr double kInitialLossTolerance = 0.10;
constexpr std::size_t kMemorizeBatch = 32;
constexpr std::size_t kMemorizeSteps = 200;
constexpr double kMemorizeLoss = 0.1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome gradient_correctness() {
    const auto start = std::chrono::steady_clock::now();
    auto cases = ad::op_gradcheck_cases();
    const std::size_t op_cases = cases.size();
    for (auto& c : model::model_gradcheck_cases()) cases.push_back(std::move(c));
    double worst = 0.0;
    std::string worst_name;
    std::size_t failures = 0;
    for (const auto& c : cases) {
        for (std::size_t i = 0; i < kGradSeeds; ++i) {
            auto [fn, inputs] = c.make(mix_seed(kBenchmarkSeed, i));
            ad::GradCheckOptions options = c.options;
            options.eps = kGradEps;
            const auto r = ad::finite_difference_check(fn, std::move(inputs), options);
            const double err = std::isnan(r.max_rel_error) ? INFINITY : r.max_rel_error;
            failures += !(err < kGradTolerance);
            if (err >= worst) {
                worst = err;
                worst_name = c.name;
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {failures == 0 && elapsed < kGradBudgetSeconds,
            fmt("%zu op + %zu model cases x %zu seeds, %zu failures, max rel err %.2e (%s) < %.0e; "
                "%.1f s < %.0f s",
                op_cases, cases.size() - op_cases, kGradSeeds, failures, worst, worst_name.c_str(),
                kGradTolerance, elapsed, kGradBudgetSeconds)};
}

ad::Tensor random_tensor(ad::Shape shape, std::mt19937_64& rng, double lo, double hi) {
    return ad::random_tensor(std::move(shape), rng, lo, hi, false);
}

Outcome sil_algebra() {
    const model::ModelConfig c;
    const std::size_t side = c.feature_size(), ci = c.visual_channels(), cs = c.semantic_width;
    std::map<std::string, std::size_t> violations{
        {"ones kernel", 0}, {"zero kernel", 0}, {"tiling", 0}, {"concat", 0}, {"gate range", 0}};
    std::mt19937_64 rng(kBenchmarkSeed);
    for (std::size_t t = 0; t < kAlgebraTrials; ++t) {
        ad::Tape tape(false);
        const auto params = model::init_params(c, model::Variant::kFull, t);
        const auto fv = random_tensor({side, side, ci}, rng, -2.0, 2.0);

        const auto same = model::dynamic_conv(tape, ad::Tensor::filled({ci}, 1.0), fv);
        violations["ones kernel"] += !std::equal(same.values().begin(), same.values().end(),
                                                 fv.values().begin());
        const auto none = model::dynamic_conv(tape, ad::Tensor::zeros({ci}), fv);
        violations["zero kernel"] += !std::all_of(none.values().begin(), none.values().end(),
                                                  [](double v) { return v == 0.0; });

        const auto fs = random_tensor({cs}, rng, -1.0, 1.0);
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto tiled = model::extend(tape, fs, n);
            bool ok = tiled.size() == n * cs;
            for (std::size_t j = 0; ok && j < tiled.size(); ++j) ok = tiled[j] == fs[j % cs];
            violations["tiling"] += !ok;
        }

        const auto f = model::sil_forward(tape, fv, fs, params, c);
        const auto kernels = model::extend(tape, fs, c.extension_count());
        const auto attended = model::dynamic_conv(tape, kernels, fv);
        bool concat_ok = std::equal(kernels.values().begin(), kernels.values().end(),
                                    f.kernels.values().begin()) &&
                         std::equal(attended.values().begin(), attended.values().end(),
                                    f.attended.values().begin());
        for (std::size_t p = 0; p < side * side; ++p) {
            for (std::size_t ch = 0; ch < ci; ++ch) {
                concat_ok = concat_ok && f.concatenated[p * 2 * ci + ch] == attended[p * ci + ch] &&
                            f.concatenated[p * 2 * ci + ci + ch] == fv[p * ci + ch];
            }
        }
        violations["concat"] += !concat_ok;

        // Gate in (0, 1) per channel: signs kept, magnitudes strictly shrink,
        // zeros stay zero, one factor per channel.
        bool gate_ok = true;
        const std::size_t cu = 2 * ci;
        for (std::size_t ch = 0; ch < cu; ++ch) {
            std::optional<double> gate;
            for (std::size_t p = 0; p < side * side; ++p) {
                const double in = f.concatenated[p * cu + ch], out = f.recalibrated[p * cu + ch];
                if (in == 0.0) {
                    gate_ok = gate_ok && out == 0.0;
                    continue;
                }
                gate_ok = gate_ok && (out > 0.0) == (in > 0.0) && std::abs(out) < std::abs(in);
                if (!gate) gate = out / in;
                gate_ok = gate_ok && std::abs(out - *gate * in) <= kGateProportionality * std::abs(in);
            }
        }
        violations["gate range"] += !gate_ok;
    }
    std::size_t total = 0;
    std::string detail;
    for (const auto& [name, v] : violations) {
        total += v;
        detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(v);
    }
    return {total == 0, fmt("%zu trials, violations: %s", kAlgebraTrials, detail.c_str())};
}

Outcome evaluator_oracle() {
    const auto start = std::chrono::steady_clock::now();
    const auto r = oracles::compare_recall_with_exhaustive(kOracleSeed, kOracleInstances);
    const double elapsed = seconds_since(start);
    return {r.discrepancies == 0 && r.checks > 0 && elapsed < kOracleBudgetSeconds,
            fmt("%d instances, %zu (K, setting) checks, %zu discrepancies; %.2f s < %.0f s",
                kOracleInstances, r.checks, r.discrepancies, elapsed, kOracleBudgetSeconds)};
}

geo::BBox random_box(std::mt19937_64& rng, double max_side = 60.0) {
    const double x = uniform01(rng) * 100.0, y = uniform01(rng) * 100.0;
    return geo::BBox(x, y, x + 0.5 + uniform01(rng) * max_side, y + 0.5 + uniform01(rng) * max_side);
}

Outcome geometry_properties() {
    std::mt19937_64 rng(kBenchmarkSeed);
    std::size_t iou_bad = 0, nms_bad = 0, union_bad = 0;
    const geo::Bounds huge{1e9, 1e9};
    for (int i = 0; i < kGeometryCases; ++i) {
        const auto a = random_box(rng), b = random_box(rng);
        const double ab = geo::iou(a, b);
        iou_bad += !(ab == geo::iou(b, a) && ab >= 0.0 && ab <= 1.0 && geo::iou(a, a) == 1.0);

        const auto u = geo::union_box(a, b, 0.0, huge);
        union_bad += !(u.contains(a) && u.contains(b) && u.x1() == std::min(a.x1(), b.x1()) &&
                       u.y1() == std::min(a.y1(), b.y1()) && u.x2() == std::max(a.x2(), b.x2()) &&
                       u.y2() == std::max(a.y2(), b.y2()));
    }
    for (int i = 0; i < kGeometryCases; ++i) {
        std::vector<geo::ScoredBox> cands;
        const std::size_t n = 1 + uniform_index(rng, 10);
        for (std::size_t k = 0; k < n; ++k) cands.push_back({random_box(rng, 30.0), 0, uniform01(rng)});
        const double thr = 0.1 + 0.8 * uniform01(rng);
        const auto kept = geo::nms(cands, thr);
        std::set<std::size_t> kept_set(kept.begin(), kept.end());
        bool ok = kept_set.size() == kept.size() && !kept.empty() &&
                  std::all_of(kept.begin(), kept.end(), [&](std::size_t k) { return k < n; });
        std::vector<geo::ScoredBox> kept_boxes;
        for (std::size_t k : kept) kept_boxes.push_back(cands[std::min(k, n - 1)]);
        ok = ok && geo::nms(kept_boxes, thr).size() == kept_boxes.size();
        for (std::size_t p = 0; ok && p < kept_boxes.size(); ++p) {
            for (std::size_t q = p + 1; q < kept_boxes.size(); ++q) {
                ok = ok && geo::iou(kept_boxes[p].box, kept_boxes[q].box) <= thr;
            }
        }
        // Every suppressed box overlaps a kept box of at least its score.
        for (std::size_t k = 0; ok && k < n; ++k) {
            if (kept_set.count(k)) continue;
            ok = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
                return cands[j].score >= cands[k].score && geo::iou(cands[j].box, cands[k].box) > thr;
            });
        }
        nms_bad += !ok;
    }
    const std::size_t total = iou_bad + nms_bad + union_bad;
    return {total == 0, fmt("%d cases each, violations: iou %zu, nms %zu, union box %zu",
                            kGeometryCases, iou_bad, nms_bad, union_bad)};
}

struct Benchmark {
    cli::RunConfig config;
    scenes::CategoryVocab vocab;
    std::vector<scenes::SceneAnnotation> train;
    std::vector<scenes::SceneAnnotation> test;
};

const Benchmark& benchmark() {
    static const Benchmark b = [] {
        Benchmark out;
        out.config.seed = kBenchmarkSeed;
        out.config.eval.tasks = {eval::TaskSetting::kPredicateClassification};
        out.config.eval.ks = {50, 100};
        out.vocab = cli::dataset_vocab(out.config);
        out.train = cli::generate_split(out.config, "train");
        out.test = cli::generate_split(out.config, "test");
        return out;
    }();
    return b;
}

struct AblationRun {
    eval::EvalReport full;
    eval::EvalReport controlled;
    std::vector<ad::Tensor> full_params;
    std::vector<ad::Tensor> controlled_params;
    std::optional<model::RelationModel> full_model;
    double seconds = 0.0;
};

AblationRun run_ablation(const std::string& tag) {
    const auto& b = benchmark();
    const auto start = std::chrono::steady_clock::now();
    AblationRun run;
    for (bool ablate : {false, true}) {
        cli::RunConfig config = b.config;
        config.train.ablate_sil = ablate;
        const std::string name = ablate ? "controlled" : "full";
        const auto trained = cli::train_model(config, b.train, b.vocab, [&](const model::EpochStats& s) {
            std::cerr << fmt("  [%s %s] epoch %2zu/%zu  mean loss %.5f  (%.0f s)\n", tag.c_str(),
                             name.c_str(), s.epoch, config.train.schedule.epochs, s.mean_loss,
                             seconds_since(start));
        });
        auto report = eval::evaluate_dataset(b.test, trained, cli::eval_options(config));
        auto params = trained.parameter_list();
        if (!ablate) run.full_model.emplace(trained);
        (ablate ? run.controlled : run.full) = std::move(report);
        (ablate ? run.controlled_params : run.full_params) = std::move(params);
    }
    run.seconds = seconds_since(start);
    return run;
}

double recall50(const eval::EvalReport& r) {
    const auto& v = r.recalls.at("predicate_cls.recall@50");
    return v ? *v : NAN;
}

Outcome ablation(const AblationRun& run) {
    const double full = recall50(run.full), cf = recall50(run.controlled);
    const bool pass = full - cf >= kAblationMargin && full > kChance && cf > kChance;
    return {pass, fmt("predicate_cls R@50: SIL %.2f%%, CF %.2f%%, margin %+.2f pp (need >= %.0f), "
                      "chance %.2f%%; %zu test images, %zu relations; %.1f min",
                      100 * full, 100 * cf, 100 * (full - cf), 100 * kAblationMargin, 100 * kChance,
                      run.full.images, run.full.gt_relations, run.seconds / 60.0)};
}

Outcome lossless_detector(const std::optional<model::RelationModel>& trained) {
    const auto& b = benchmark();
    const auto start = std::chrono::steady_clock::now();
    const model::RelationModel fresh(cli::model_config_for(b.config, b.vocab), model::Variant::kFull,
                                     cli::derive_seed(kBenchmarkSeed, cli::SeedStream::kInit));
    const auto& m = trained ? *trained : fresh;
    eval::EvalOptions opt = cli::eval_options(b.config);
    opt.tasks = {eval::TaskSetting::kPredicateClassification, eval::TaskSetting::kTwoBoxesDetection};
    opt.noise = scenes::noise_profile("zero");
    const auto r = eval::evaluate_dataset(b.test, m, opt);
    bool pass = true;
    std::string detail;
    for (std::size_t k : opt.ks) {
        const auto pc = r.recalls.at("predicate_cls.recall@" + std::to_string(k));
        const auto tb = r.recalls.at("two_boxes.recall@" + std::to_string(k));
        const bool same = pc.has_value() && tb.has_value() && *pc == *tb;
        pass = pass && same;
        detail += fmt("R@%zu %.17g vs %.17g %s; ", k, pc.value_or(NAN), tb.value_or(NAN),
                      same ? "equal" : "DIFFER");
    }
    return {pass, detail + fmt("%s model, %zu test images, %.1f s", trained ? "trained" : "initial",
                               r.images, seconds_since(start))};
}

Outcome training_sanity() {
    const auto& b = benchmark();
    const auto mc = cli::model_config_for(b.config, b.vocab);
    auto pairs = model::collect_training_pairs(b.train);
    pairs.resize(kMemorizeBatch);
    const auto batch = model::make_batch(b.train, pairs, mc);
    const double target = std::log(static_cast<double>(mc.num_predicates));

    double worst_dev = 0.0;
    for (std::size_t s = 0; s < kInitialLossSeeds; ++s) {
        for (auto v : {model::Variant::kFull, model::Variant::kControlled}) {
            const model::RelationModel m(mc, v, cli::derive_seed(s, cli::SeedStream::kInit));
            const double loss = model::batch_loss(m, batch, model::Mode::kTrain, s);
            worst_dev = std::max(worst_dev, std::abs(loss - target) / target);
        }
    }

    model::RelationModel m(mc, model::Variant::kFull, cli::derive_seed(kBenchmarkSeed, cli::SeedStream::kInit));
    ad::Optimizer opt(b.config.train.schedule.optimizer);
    double loss = INFINITY;
    std::size_t steps = 0;
    while (steps < kMemorizeSteps && !(loss < kMemorizeLoss)) {
        loss = model::train_step(m, opt, batch, mix_seed(kBenchmarkSeed, steps));
        ++steps;
    }
    const bool pass = worst_dev < kInitialLossTolerance && loss < kMemorizeLoss;
    return {pass, fmt("initial loss within %.1f%% of ln %zu over %zu seeds x 2 variants (need < %.0f%%); "
                      "batch of %zu memorised to loss %.4f in %zu steps (need < %.1f within %zu)",
                      100 * worst_dev, mc.num_predicates, kInitialLossSeeds, 100 * kInitialLossTolerance,
                      kMemorizeBatch, loss, steps, kMemorizeLoss, kMemorizeSteps)};
}

bool same_params(const std::vector<ad::Tensor>& a, const std::vector<ad::Tensor>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].shape() != b[i].shape() ||
            !std::equal(a[i].values().begin(), a[i].values().end(), b[i].values().begin())) {
            return false;
        }
    }
    return true;
}

Outcome determinism(const AblationRun& first, const AblationRun& second) {
    const bool reports = first.full.to_text() == second.full.to_text() &&
                         first.controlled.to_text() == second.controlled.to_text();
    const bool params = same_params(first.full_params, second.full_params) &&
                        same_params(first.controlled_params, second.controlled_params);
    return {reports && params, fmt("reports %s, trained parameters %s; rerun %.1f min",
                                   reports ? "bit-identical" : "DIFFER",
                                   params ? "bit-identical" : "DIFFER", second.seconds / 60.0)};
}

}  // namespace

int main(int argc, char** argv) {
    ad::configure_allocator();
    CLI::App app{"Acceptance suite: prints one PASS/FAIL line per criterion", "silrel_acceptance"};
    std::string criteria_list = "1,2,3,4,5,6,7,8";
    std::string out_dir;
    app.add_option("--criteria", criteria_list, "Comma list of criteria to run (default all)");
    app.add_option("--out", out_dir, "Directory for the summary and benchmark reports");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected;
    try {
        std::stringstream in(criteria_list);
        for (std::string item; std::getline(in, item, ',');) {
            const int c = std::stoi(item);
            if (c < 1 || c > 8) throw std::out_of_range(item);
            selected.insert(c);
        }
    } catch (const std::exception&) {
        std::cerr << "error: --criteria takes numbers 1 to 8\n";
        return 1;
    }

    const std::map<int, std::string> names{
        {1, "gradient correctness"}, {2, "SIL algebra"},       {3, "evaluator oracle"},
        {4, "geometry properties"},  {5, "ablation direction"}, {6, "lossless detector"},
        {7, "training sanity"},      {8, "determinism"}};
    std::vector<std::string> lines;
    bool all_pass = true;
    auto report = [&](int c, const Outcome& o) {
        const std::string line = fmt("criterion %d %-22s %s  %s", c, ("[" + names.at(c) + "]").c_str(),
                                     o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::cout << line << std::endl;
        lines.push_back(line);
        all_pass = all_pass && o.pass;
    };

    if (selected.count(1)) report(1, gradient_correctness());
    if (selected.count(2)) report(2, sil_algebra());
    if (selected.count(3)) report(3, evaluator_oracle());
    if (selected.count(4)) report(4, geometry_properties());
    if (selected.count(7)) report(7, training_sanity());

    std::optional<AblationRun> first;
    if (selected.count(5) || selected.count(8)) {
        first = run_ablation("run 1");
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ofstream(fs::path(out_dir) / "benchmark_full.txt") << first->full.to_text();
            std::ofstream(fs::path(out_dir) / "benchmark_controlled.txt") << first->controlled.to_text();
        }
    }
    if (selected.count(5)) report(5, ablation(*first));
    if (selected.count(6)) report(6, lossless_detector(first ? first->full_model : std::nullopt));
    if (selected.count(8)) report(8, determinism(*first, run_ablation("run 2")));

    std::sort(lines.begin(), lines.end());
    const std::string summary = fmt("%zu criteria run, %s", lines.size(), all_pass ? "all passed" : "FAILURES");
    std::cout << summary << std::endl;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "acceptance.txt");
        for (const auto& l : lines) out << l << "\n";
        out << summary << "\n";
    }
    return all_pass ? 0 : 1;
}
