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

#include "silrel/cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace silrel::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) out.push_back(trim(item));
    if (out.empty() || std::any_of(out.begin(), out.end(), [](auto& s) { return s.empty(); })) {
        throw UsageError("empty entry in list '" + text + "'");
    }
    return out;
}

template <class T>
T parse_number(const std::string& raw) {
    const std::string text = trim(raw);
    T value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        throw UsageError("'" + text + "' is not a valid number");
    }
    return value;
}

bool parse_bool(const std::string& raw) {
    const std::string text = trim(raw);
    if (text == "true") return true;
    if (text == "false") return false;
    throw UsageError("'" + text + "' is not a boolean (true or false)");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f) {
    std::string out;
    for (const auto& item : items) out += (out.empty() ? "" : ",") + f(item);
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;
};

Field size_field(std::string s, std::string k, std::size_t& v) {
    return {std::move(s), std::move(k), [&v](const std::string& t) { v = parse_number<std::size_t>(t); },
            [&v] { return std::to_string(v); }};
}

Field double_field(std::string s, std::string k, double& v) {
    return {std::move(s), std::move(k), [&v](const std::string& t) { v = parse_number<double>(t); },
            [&v] { return format_double(v); }};
}

Field bool_field(std::string s, std::string k, bool& v) {
    return {std::move(s), std::move(k), [&v](const std::string& t) { v = parse_bool(t); },
            [&v] { return std::string(v ? "true" : "false"); }};
}

Field sizes_field(std::string s, std::string k, std::vector<std::size_t>& v) {
    return {std::move(s), std::move(k),
            [&v](const std::string& t) {
                v.clear();
                for (const auto& item : split_list(t)) v.push_back(parse_number<std::size_t>(item));
            },
            [&v] {
                return join<std::size_t>(v, [](const std::size_t& x) { return std::to_string(x); });
            }};
}

// The schema: the single list of sections and keys, in output order.
std::vector<Field> schema(RunConfig& c) {
    auto& g = c.data.generator;
    auto& m = c.model;
    auto& t = c.train.schedule;
    auto& o = t.optimizer;
    auto& e = c.eval;
    auto& n = c.eval.noise;
    auto& q = c.gradcheck;
    return {
        {"run", "seed", [&c](const std::string& v) { c.seed = parse_number<std::uint64_t>(v); },
         [&c] { return std::to_string(c.seed); }},
        size_field("data", "train_scenes", c.data.train_scenes),
        size_field("data", "test_scenes", c.data.test_scenes),
        size_field("data", "width", g.width),
        size_field("data", "height", g.height),
        size_field("data", "min_objects", g.min_objects),
        size_field("data", "max_objects", g.max_objects),
        size_field("data", "num_categories", g.num_categories),
        double_field("data", "min_side", g.min_side),
        double_field("data", "max_side", g.max_side),
        double_field("data", "p_nested", g.p_nested),
        double_field("data", "p_straddle", g.p_straddle),
        double_field("data", "max_pair_iou", g.max_pair_iou),
        size_field("data", "max_attempts", g.max_attempts),
        size_field("model", "input_size", m.input_size),
        sizes_field("model", "vin_channels", m.vin_channels),
        size_field("model", "oln_hidden", m.oln_hidden),
        size_field("model", "semantic_width", m.semantic_width),
        size_field("model", "channel_reduction", m.channel_reduction),
        sizes_field("model", "classifier_hidden", m.classifier_hidden),
        double_field("model", "dropout", m.dropout),
        size_field("train", "epochs", t.epochs),
        size_field("train", "batch_size", t.batch_size),
        {"train", "optimizer",
         [&o](const std::string& v) {
             const auto s = trim(v);
             if (s == "adam") o.kind = ad::OptimizerKind::kAdam;
             else if (s == "momentum") o.kind = ad::OptimizerKind::kMomentum;
             else throw UsageError("optimizer must be adam or momentum, got '" + s + "'");
         },
         [&o] { return std::string(o.kind == ad::OptimizerKind::kAdam ? "adam" : "momentum"); }},
        double_field("train", "learning_rate", o.learning_rate),
        double_field("train", "beta1", o.beta1),
        double_field("train", "beta2", o.beta2),
        double_field("train", "epsilon", o.epsilon),
        double_field("train", "momentum", o.momentum),
        bool_field("train", "ablate_sil", c.train.ablate_sil),
        bool_field("train", "log_steps", c.train.log_steps),
        {"eval", "split", [&e](const std::string& v) { e.split = trim(v); },
         [&e] { return e.split; }},
        {"eval", "noise", [&c](const std::string& v) { set_noise_profile(c, trim(v)); },
         [&e] { return e.noise_profile; }},
        {"eval", "tasks", [&e](const std::string& v) { e.tasks = parse_tasks(v); },
         [&e] { return join<eval::TaskSetting>(e.tasks, eval::task_key); }},
        {"eval", "k", [&e](const std::string& v) { e.ks = parse_ks(v); },
         [&e] { return join<std::size_t>(e.ks, [](const std::size_t& x) { return std::to_string(x); }); }},
        size_field("eval", "workers", e.workers),
        size_field("eval", "batch_size", e.batch_size),
        double_field("noise", "box_sigma", n.box_sigma),
        double_field("noise", "flip_probability", n.flip_probability),
        double_field("noise", "drop_probability", n.drop_probability),
        double_field("noise", "false_positive_rate", n.false_positive_rate),
        double_field("noise", "score_sigma", n.score_sigma),
        double_field("noise", "false_positive_max_score", n.false_positive_max_score),
        double_field("noise", "nms_threshold", n.nms_threshold),
        double_field("noise", "min_score", n.min_score),
        {"gradcheck", "scope", [&q](const std::string& v) { q.scope = trim(v); },
         [&q] { return q.scope; }},
        size_field("gradcheck", "seeds", q.seeds),
        double_field("gradcheck", "eps", q.eps),
        double_field("gradcheck", "tolerance", q.tolerance),
    };
}

}  // namespace

std::vector<eval::TaskSetting> parse_tasks(const std::string& list) {
    std::vector<eval::TaskSetting> out;
    for (const auto& item : split_list(list)) {
        try {
            out.push_back(eval::task_from_key(item));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (std::count(out.begin(), out.end(), out.back()) > 1) {
            throw UsageError("task '" + item + "' listed twice");
        }
    }
    return out;
}

std::vector<std::size_t> parse_ks(const std::string& list) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(list)) {
        out.push_back(parse_number<std::size_t>(item));
        if (out.back() == 0) throw UsageError("K must be positive");
        if (std::count(out.begin(), out.end(), out.back()) > 1) {
            throw UsageError("K=" + item + " listed twice");
        }
    }
    return out;
}

void set_noise_profile(RunConfig& config, const std::string& profile) {
    try {
        config.eval.noise = scenes::noise_profile(profile);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    config.eval.noise_profile = profile;
}

void RunConfig::validate() const {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) throw UsageError("invalid config: " + what);
    };
    const auto& g = data.generator;
    check(g.width > 0 && g.height > 0, "[data] width and height must be positive");
    check(g.min_objects >= 2 && g.min_objects <= g.max_objects,
          "[data] need 2 <= min_objects <= max_objects");
    check(g.num_categories >= 1 && g.num_categories <= scenes::default_vocab().num_categories(),
          "[data] num_categories must lie in [1, " +
              std::to_string(scenes::default_vocab().num_categories()) + "]");
    check(g.min_side > 0.0 && g.min_side <= g.max_side, "[data] need 0 < min_side <= max_side");
    check(train.schedule.batch_size > 0, "[train] batch_size must be positive");
    check(train.schedule.optimizer.learning_rate >= 0.0, "[train] learning_rate must be >= 0");
    check(eval.split == "train" || eval.split == "test", "[eval] split must be train or test");
    check(!eval.tasks.empty() && !eval.ks.empty(), "[eval] tasks and k must be non-empty");
    check(eval.workers >= 1 && eval.batch_size >= 1, "[eval] workers and batch_size must be >= 1");
    check(gradcheck.scope == "op" || gradcheck.scope == "model",
          "[gradcheck] scope must be op or model");
    check(gradcheck.seeds >= 1 && gradcheck.eps > 0.0 && gradcheck.tolerance > 0.0,
          "[gradcheck] seeds, eps and tolerance must be positive");
    try {
        model::ModelConfig m = model;
        m.num_categories = g.num_categories;
        m.validate();
        eval.noise.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
    }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig config;
    auto fields = schema(config);
    auto find = [&](const std::string& section, const std::string& key) -> Field* {
        for (auto& f : fields) {
            if (f.section == section && f.key == key) return &f;
        }
        return nullptr;
    };
    std::set<std::string> sections;
    for (const auto& f : fields) sections.insert(f.section);
    for (const auto& [section, body] : tree) {
        if (!body.data().empty() || !sections.count(section)) {
            throw UsageError(origin + ": unknown section or top-level key '" + section + "'");
        }
        for (const auto& [key, value] : body) {
            if (!find(section, key)) {
                throw UsageError(origin + ": unknown key '" + key + "' in [" + section + "]");
            }
        }
    }
    auto apply = [&](const std::string& section, const std::string& key, const std::string& value) {
        try {
            find(section, key)->set(value);
        } catch (const UsageError& e) {
            throw UsageError(origin + ": [" + section + "] " + key + ": " + e.what());
        }
    };
    // The noise profile first, so [noise] keys refine it.
    if (auto eval = tree.get_child_optional("eval")) {
        if (auto noise = eval->get_optional<std::string>("noise")) apply("eval", "noise", *noise);
    }
    for (const auto& [section, body] : tree) {
        for (const auto& [key, value] : body) {
            if (section == "eval" && key == "noise") continue;
            apply(section, key, value.data());
        }
    }
    config.validate();
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string to_ini(const RunConfig& config) {
    RunConfig copy = config;
    std::string out;
    std::string section;
    for (const auto& f : schema(copy)) {
        if (f.section != section) {
            out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
            section = f.section;
        }
        out += f.key + " = " + f.get() + "\n";
    }
    return out;
}

}  // namespace silrel::cli
