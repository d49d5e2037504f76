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

#include "silrel/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "silrel/autodiff/gradcheck_suite.hpp"
#include "silrel/model/model_gradcheck.hpp"
#include "silrel/random.hpp"
#include "silrel/scenes/scene_io.hpp"

namespace silrel::cli {
namespace fs = std::filesystem;

std::uint64_t derive_seed(std::uint64_t run_seed, SeedStream stream) {
    return mix_seed(run_seed, static_cast<std::uint64_t>(stream));
}

scenes::CategoryVocab dataset_vocab(const RunConfig& config) {
    auto vocab = scenes::default_vocab();
    vocab.object_categories.resize(config.data.generator.num_categories);
    return vocab;
}

std::vector<scenes::SceneAnnotation> generate_split(const RunConfig& config,
                                                    const std::string& split) {
    const bool train = split == "train";
    if (!train && split != "test") throw UsageError("unknown split '" + split + "'");
    const std::size_t n = train ? config.data.train_scenes : config.data.test_scenes;
    const std::uint64_t base =
        derive_seed(config.seed, train ? SeedStream::kTrainScenes : SeedStream::kTestScenes);
    std::vector<scenes::SceneAnnotation> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(scenes::generate_synthetic_scene(config.data.generator, mix_seed(base, i)));
    }
    return out;
}

std::vector<scenes::SceneAnnotation> load_split(const fs::path& data_dir, const std::string& split,
                                                const scenes::CategoryVocab& vocab) {
    const fs::path dir = data_dir / split;
    if (!fs::is_directory(dir)) {
        throw UsageError("dataset split directory " + dir.string() + " does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<scenes::SceneAnnotation> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(scenes::load_scene_file(f, vocab));
    return out;
}

model::ModelConfig model_config_for(const RunConfig& config, const scenes::CategoryVocab& vocab) {
    model::ModelConfig m = config.model;
    m.num_categories = vocab.num_categories();
    m.num_predicates = vocab.num_predicates();
    return m;
}

model::RelationModel train_model(const RunConfig& config,
                                 const std::vector<scenes::SceneAnnotation>& data,
                                 const scenes::CategoryVocab& vocab,
                                 const model::EpochCallback& on_epoch,
                                 const model::StepCallback& on_step) {
    model::RelationModel m(model_config_for(config, vocab),
                           config.train.ablate_sil ? model::Variant::kControlled
                                                   : model::Variant::kFull,
                           derive_seed(config.seed, SeedStream::kInit));
    model::TrainConfig schedule = config.train.schedule;
    schedule.seed = derive_seed(config.seed, SeedStream::kShuffle);
    model::train(m, data, schedule, on_epoch, on_step);
    return m;
}

eval::EvalOptions eval_options(const RunConfig& config) {
    eval::EvalOptions opt;
    opt.tasks = config.eval.tasks;
    opt.ks = config.eval.ks;
    opt.noise = config.eval.noise;
    opt.noise.seed = derive_seed(config.seed, SeedStream::kDetector);
    opt.workers = config.eval.workers;
    opt.batch_size = config.eval.batch_size;
    return opt;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + path.string());
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
}

scenes::CategoryVocab load_dataset_vocab(const fs::path& data_dir) {
    if (!fs::is_directory(data_dir)) {
        throw UsageError("data directory " + data_dir.string() + " does not exist");
    }
    const fs::path path = data_dir / "vocab.json";
    if (!fs::exists(path)) throw UsageError("no vocab.json in " + data_dir.string());
    return scenes::load_vocab_file(path);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int cmd_gen_data(const RunConfig& config, const fs::path& out_dir, std::ostream& out) {
    prepare_out_dir(out_dir);
    const auto vocab = dataset_vocab(config);
    for (const std::string split : {"train", "test"}) {
        const fs::path dir = out_dir / split;
        if (fs::exists(dir) && !fs::is_empty(dir)) {
            throw UsageError(dir.string() + " is not empty; choose a fresh output directory");
        }
    }
    scenes::save_vocab_file(vocab, out_dir / "vocab.json");
    write_text(out_dir / "config.ini", to_ini(config));

    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::size_t> scene_counts;
    for (const std::string split : {"train", "test"}) {
        const fs::path dir = out_dir / split;
        fs::create_directories(dir);
        const auto data = generate_split(config, split);
        std::vector<std::size_t> per_predicate(vocab.num_predicates(), 0);
        for (std::size_t i = 0; i < data.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "%06zu.json", i);
            scenes::save_scene_file(data[i], vocab, dir / name);
            for (const auto& r : data[i].relations) ++per_predicate[r.predicate];
        }
        counts.push_back(per_predicate);
        scene_counts.push_back(data.size());
    }

    char line[128];
    out << "scenes: train " << scene_counts[0] << ", test " << scene_counts[1] << "\n";
    std::snprintf(line, sizeof line, "%-12s %8s %8s\n", "predicate", "train", "test");
    out << line;
    for (std::size_t p = 0; p < vocab.num_predicates(); ++p) {
        std::snprintf(line, sizeof line, "%-12s %8zu %8zu\n", vocab.predicates[p].c_str(),
                      counts[0][p], counts[1][p]);
        out << line;
    }
    return 0;
}

int cmd_train(const RunConfig& config, const fs::path& data_dir, const fs::path& out_dir,
              std::ostream& out) {
    const auto vocab = load_dataset_vocab(data_dir);
    if (vocab.num_categories() != config.data.generator.num_categories) {
        throw UsageError("config has [data] num_categories = " +
                         std::to_string(config.data.generator.num_categories) +
                         " but the dataset vocabulary has " +
                         std::to_string(vocab.num_categories()) + " categories");
    }
    const auto data = load_split(data_dir, "train", vocab);
    const auto pairs = model::collect_training_pairs(data);
    if (pairs.empty()) throw UsageError("training split of " + data_dir.string() + " has no relations");

    prepare_out_dir(out_dir);
    write_text(out_dir / "config.ini", to_ini(config));
    std::ofstream log(out_dir / "train_log.jsonl", std::ios::binary);
    if (!log) throw std::runtime_error("cannot write training log");
    const std::string variant = config.train.ablate_sil ? "controlled" : "full";
    log << nlohmann::json{{"event", "start"},
                          {"timestamp", utc_timestamp()},
                          {"variant", variant},
                          {"scenes", data.size()},
                          {"pairs", pairs.size()}}
                   .dump()
        << "\n"
        << std::flush;

    auto on_step = [&](std::size_t epoch, std::uint64_t step, double loss) {
        if (!std::isfinite(loss)) throw std::runtime_error("training diverged: non-finite loss");
        if (config.train.log_steps) {
            log << nlohmann::json{{"event", "step"}, {"epoch", epoch}, {"step", step}, {"loss", loss}}
                       .dump()
                << "\n";
        }
    };
    auto on_epoch = [&](const model::EpochStats& s) {
        log << nlohmann::json{{"event", "epoch"},
                              {"epoch", s.epoch},
                              {"steps", s.steps},
                              {"samples", s.samples},
                              {"mean_loss", s.mean_loss}}
                       .dump()
            << "\n"
            << std::flush;
        char line[96];
        std::snprintf(line, sizeof line, "epoch %zu/%zu  mean loss %.6f\n", s.epoch,
                      config.train.schedule.epochs, s.mean_loss);
        out << line << std::flush;
    };
    const auto trained = train_model(config, data, vocab, on_epoch, on_step);
    trained.save(out_dir / "checkpoint.bin");
    out << "wrote " << (out_dir / "checkpoint.bin").string() << " (" << variant << ")\n";
    return 0;
}

int cmd_eval(const RunConfig& config, const fs::path& checkpoint, const fs::path& data_dir,
             const fs::path& out_dir, std::ostream& out) {
    if (!fs::exists(checkpoint)) throw UsageError("checkpoint " + checkpoint.string() + " not found");
    const auto vocab = load_dataset_vocab(data_dir);
    const auto trained = model::RelationModel::load(checkpoint);
    if (trained.config().num_categories != vocab.num_categories() ||
        trained.config().num_predicates != vocab.num_predicates()) {
        throw UsageError("checkpoint expects " + std::to_string(trained.config().num_categories) +
                         " categories and " + std::to_string(trained.config().num_predicates) +
                         " predicates; dataset has " + std::to_string(vocab.num_categories()) +
                         " and " + std::to_string(vocab.num_predicates()));
    }
    const auto data = load_split(data_dir, config.eval.split, vocab);
    const auto report = eval::evaluate_dataset(data, trained, eval_options(config));
    prepare_out_dir(out_dir);
    write_text(out_dir / "config.ini", to_ini(config));
    write_text(out_dir / "report.txt", report.to_text());
    out << report.to_text();
    return 0;
}

int cmd_gradcheck(const RunConfig& config, bool inject_fault, const std::optional<fs::path>& out_dir,
                  std::ostream& out) {
    auto cases = config.gradcheck.scope == "op" ? ad::op_gradcheck_cases()
                                                : model::model_gradcheck_cases();
    if (inject_fault) cases.push_back(ad::corrupted_gradient_case());

    std::string table;
    char line[160];
    std::snprintf(line, sizeof line, "%-32s %6s %14s  %s\n", "case", "seeds", "max rel err",
                  "result");
    table += line;
    std::size_t failed = 0;
    for (const auto& c : cases) {
        double worst = 0.0;
        for (std::size_t i = 0; i < config.gradcheck.seeds; ++i) {
            auto [fn, inputs] = c.make(mix_seed(config.seed, i));
            ad::GradCheckOptions options = c.options;
            options.eps = config.gradcheck.eps;
            const auto r = ad::finite_difference_check(fn, std::move(inputs), options);
            worst = std::max(worst, std::isnan(r.max_rel_error) ? INFINITY : r.max_rel_error);
        }
        const bool ok = worst < config.gradcheck.tolerance;
        failed += !ok;
        std::snprintf(line, sizeof line, "%-32s %6zu %14.3e  %s\n", c.name.c_str(),
                      config.gradcheck.seeds, worst, ok ? "PASS" : "FAIL");
        table += line;
    }
    std::snprintf(line, sizeof line, "%zu of %zu cases passed (tolerance %.1e)\n",
                  cases.size() - failed, cases.size(), config.gradcheck.tolerance);
    table += line;
    out << table;
    if (out_dir) {
        prepare_out_dir(*out_dir);
        write_text(*out_dir / "config.ini", to_ini(config));
        write_text(*out_dir / "gradcheck.txt", table);
    }
    return failed == 0 ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Semantics-induced relation model: data, training, evaluation, gradient checks",
                 "silrel"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    auto common = [&](CLI::App* sub, bool out_required) {
        sub->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Run seed (overrides [run] seed)");
        auto* o = sub->add_option("--out", out_path, "Output directory");
        if (out_required) o->required();
    };

    auto* gen = app.add_subcommand("gen-data", "Generate train and test scenes plus vocabulary");
    common(gen, true);

    std::string data_dir;
    bool ablate = false;
    auto* train = app.add_subcommand("train", "Train the full model or, with --ablate-sil, CF");
    common(train, true);
    train->add_option("--data", data_dir, "Dataset directory from gen-data")->required();
    train->add_flag("--ablate-sil", ablate, "Remove the SIL block (controlled framework)");

    std::string checkpoint, noise, tasks, ks, split;
    std::optional<std::size_t> workers;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    common(ev, true);
    ev->add_option("--checkpoint", checkpoint, "Checkpoint from train")->required();
    ev->add_option("--data", data_dir, "Dataset directory from gen-data")->required();
    ev->add_option("--noise", noise, "Detector noise profile: zero, light, default, heavy");
    ev->add_option("--tasks", tasks, "Comma list of predicate_cls, union_box, two_boxes");
    ev->add_option("--k", ks, "Comma list of K values");
    ev->add_option("--split", split, "train or test");
    ev->add_option("--workers", workers, "Evaluation threads");

    std::string scope;
    std::optional<std::size_t> seeds;
    bool inject_fault = false;
    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
    common(gc, false);
    gc->add_option("--scope", scope, "op or model");
    gc->add_option("--seeds", seeds, "Random points per case");
    gc->add_flag("--inject-fault", inject_fault, "Add a case with a deliberately wrong gradient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\nrun with --help for usage\n";
        return 1;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed) config.seed = *seed;
        if (ablate) config.train.ablate_sil = true;
        if (!noise.empty()) set_noise_profile(config, noise);
        if (!tasks.empty()) config.eval.tasks = parse_tasks(tasks);
        if (!ks.empty()) config.eval.ks = parse_ks(ks);
        if (!split.empty()) config.eval.split = split;
        if (workers) config.eval.workers = *workers;
        if (!scope.empty()) config.gradcheck.scope = scope;
        if (seeds) config.gradcheck.seeds = *seeds;
        config.validate();

        if (gen->parsed()) return cmd_gen_data(config, out_path, out);
        if (train->parsed()) return cmd_train(config, data_dir, out_path, out);
        if (ev->parsed()) return cmd_eval(config, checkpoint, data_dir, out_path, out);
        return cmd_gradcheck(config, inject_fault,
                             out_path.empty() ? std::nullopt : std::optional<fs::path>(out_path),
                             out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace silrel::cli
