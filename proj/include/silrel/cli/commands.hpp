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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "silrel/cli/run_config.hpp"
#include "silrel/model/sil_model.hpp"

namespace silrel::cli {

/// Derived seed streams of one run seed.
enum class SeedStream : std::uint64_t {
    kTrainScenes = 1,
    kTestScenes = 2,
    kInit = 3,
    kShuffle = 4,
    kDetector = 5,
};
std::uint64_t derive_seed(std::uint64_t run_seed, SeedStream stream);

/// The first `num_categories` default categories and all predicates.
scenes::CategoryVocab dataset_vocab(const RunConfig& config);

/// Scenes of one split ("train" or "test"); scene i uses
/// mix_seed(derive_seed(run seed, split stream), i).
std::vector<scenes::SceneAnnotation> generate_split(const RunConfig& config,
                                                    const std::string& split);

/// Dataset directory layout:
///   vocab.json, config.ini, train/NNNNNN.{json,ppm}, test/NNNNNN.{json,ppm}
std::vector<scenes::SceneAnnotation> load_split(const std::filesystem::path& data_dir,
                                                const std::string& split,
                                                const scenes::CategoryVocab& vocab);

/// Model config of `config` sized for `vocab`.
model::ModelConfig model_config_for(const RunConfig& config, const scenes::CategoryVocab& vocab);

/// Initialises and trains one variant, as the train command does.
model::RelationModel train_model(const RunConfig& config,
                                 const std::vector<scenes::SceneAnnotation>& data,
                                 const scenes::CategoryVocab& vocab,
                                 const model::EpochCallback& on_epoch = {},
                                 const model::StepCallback& on_step = {});

/// Evaluation options of `config` with the derived detector seed.
eval::EvalOptions eval_options(const RunConfig& config);

/// Entry point of the `silrel` tool: parses argv, runs one command and
/// returns the exit status (0 success, 1 usage or config error, 2 runtime
/// failure). Normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace silrel::cli
