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
#include <stdexcept>
#include <string>
#include <vector>

#include "silrel/eval/evaluation.hpp"
#include "silrel/model/config.hpp"
#include "silrel/model/trainer.hpp"
#include "silrel/scenes/generator.hpp"

namespace silrel::cli {

/// Bad flags, unreadable or invalid config, inputs that do not fit together.
/// Maps to exit status 1; every other failure maps to 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataSettings {
    std::size_t train_scenes = 2000;
    std::size_t test_scenes = 500;
    scenes::GeneratorConfig generator;
};

struct TrainSettings {
    model::TrainConfig schedule;  // seed is derived from the run seed
    bool ablate_sil = false;
    bool log_steps = true;
};

struct EvalSettings {
    std::string split = "test";
    std::string noise_profile = "default";
    scenes::DetectorNoiseConfig noise = scenes::noise_profile("default");  // seed derived
    std::vector<eval::TaskSetting> tasks{eval::TaskSetting::kPredicateClassification,
                                         eval::TaskSetting::kUnionBoxDetection,
                                         eval::TaskSetting::kTwoBoxesDetection};
    std::vector<std::size_t> ks{50, 100};
    std::size_t workers = 1;
    std::size_t batch_size = 32;
};

struct GradcheckSettings {
    std::string scope = "op";
    std::size_t seeds = 10;
    double eps = 1e-5;
    double tolerance = 1e-4;
};

/// Every setting of every command. Defaults are the frozen benchmark.
struct RunConfig {
    std::uint64_t seed = 0;
    DataSettings data;
    model::ModelConfig model;
    TrainSettings train;
    EvalSettings eval;
    GradcheckSettings gradcheck;

    /// Throws UsageError naming the offending setting.
    void validate() const;
};

/// INI text: `[section]` headers, `key = value` lines, `;` or `#` comments.
/// Lists are comma separated, booleans are true/false. Unknown sections or
/// keys, malformed values and duplicates raise UsageError. Keys in [noise]
/// override the profile named by `[eval] noise`.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value; parse_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& config);

/// Resets every [noise] value to the named profile.
void set_noise_profile(RunConfig& config, const std::string& profile);

std::vector<eval::TaskSetting> parse_tasks(const std::string& list);
std::vector<std::size_t> parse_ks(const std::string& list);

}  // namespace silrel::cli
