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

#include "silrel/model/sil_model.hpp"

#include <stdexcept>

#include "json.hpp"
#include "silrel/autodiff/init.hpp"
#include "silrel/random.hpp"

namespace silrel::model {

namespace {

using ad::Shape;

std::string conv_name(std::size_t block, const char* field) {
    return "vin.conv" + std::to_string(block + 1) + "." + field;
}

std::string fc_name(const std::string& prefix, std::size_t layer, const char* field) {
    return prefix + ".fc" + std::to_string(layer + 1) + "." + field;
}

// Every parameter the variant owns, with its shape and Xavier fans.
struct ParamSpec {
    std::string name;
    Shape shape;
    std::size_t fan_in;
    std::size_t fan_out;
    bool bias;
};

void add_fc(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t layer,
            std::size_t in, std::size_t out) {
    specs.push_back({fc_name(prefix, layer, "weights"), {in, out}, in, out, false});
    specs.push_back({fc_name(prefix, layer, "bias"), {out}, in, out, true});
}

std::size_t classifier_input(const ModelConfig& c, Variant v) {
    const std::size_t hw = c.feature_size() * c.feature_size();
    return hw * c.visual_channels() * (v == Variant::kFull ? 2 : 1);
}

std::vector<ParamSpec> param_specs(const ModelConfig& c, Variant v) {
    c.validate();
    std::vector<ParamSpec> specs;
    std::size_t in_ch = 5;
    for (std::size_t b = 0; b < c.vin_channels.size(); ++b) {
        const std::size_t out_ch = c.vin_channels[b];
        specs.push_back({conv_name(b, "kernels"), {3, 3, in_ch, out_ch}, 9 * in_ch, 9 * out_ch,
                         false});
        specs.push_back({conv_name(b, "bias"), {out_ch}, 0, 0, true});
        in_ch = out_ch;
    }
    if (v == Variant::kFull) {
        add_fc(specs, "oln", 0, c.num_categories, c.oln_hidden);
        add_fc(specs, "oln", 1, c.oln_hidden, c.semantic_width);
        const std::size_t u = 2 * c.visual_channels();
        add_fc(specs, "sil.cw", 0, u, u / c.channel_reduction);
        add_fc(specs, "sil.cw", 1, u / c.channel_reduction, u);
    }
    std::size_t width = classifier_input(c, v);
    for (std::size_t l = 0; l < c.classifier_hidden.size(); ++l) {
        add_fc(specs, "cls", l, width, c.classifier_hidden[l]);
        width = c.classifier_hidden[l];
    }
    add_fc(specs, "cls", c.classifier_hidden.size(), width, c.num_predicates);
    return specs;
}

const Tensor& get(const ModelParams& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("missing parameter " + name);
    return it->second;
}

Tensor fc_stack(Tape& tape, Tensor x, const ModelParams& params, const std::string& prefix,
                std::size_t layers, double rate, Mode mode, std::uint64_t seed) {
    for (std::size_t l = 0; l < layers; ++l) {
        x = ad::fully_connected(tape, x, get(params, fc_name(prefix, l, "weights")),
                                get(params, fc_name(prefix, l, "bias")));
        if (l + 1 == layers) break;
        x = ad::relu(tape, x);
        if (rate > 0.0) x = ad::dropout(tape, x, rate, mode, mix_seed(seed, l));
    }
    return x;
}

Tensor flatten(Tape& tape, const Tensor& x) {
    if (x.rank() == 3) return ad::reshape(tape, x, {x.size()});
    if (x.rank() == 4) return ad::reshape(tape, x, {x.dim(0), x.size() / x.dim(0)});
    throw std::invalid_argument("flatten: expected a feature map, got " +
                                ad::shape_to_string(x.shape()));
}

void check_last_dim(const Tensor& x, std::size_t expected, const char* what) {
    if (x.rank() == 0 || x.shape().back() != expected) {
        throw std::invalid_argument(std::string(what) + ": expected trailing extent " +
                                    std::to_string(expected) + ", got " +
                                    ad::shape_to_string(x.shape()));
    }
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::kFull ? "full" : "controlled"; }

Variant variant_from_string(const std::string& name) {
    if (name == "full") return Variant::kFull;
    if (name == "controlled") return Variant::kControlled;
    throw std::invalid_argument("unknown model variant '" + name + "'");
}

void ModelConfig::validate() const {
    auto positive = [](std::size_t v, const char* what) {
        if (v == 0) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    positive(input_size, "input_size");
    if (vin_channels.empty()) throw std::invalid_argument("vin_channels must not be empty");
    for (auto c : vin_channels) positive(c, "vin channel width");
    positive(oln_hidden, "oln_hidden");
    positive(semantic_width, "semantic_width");
    positive(channel_reduction, "channel_reduction");
    for (auto h : classifier_hidden) positive(h, "classifier hidden width");
    positive(num_predicates, "num_predicates");
    positive(num_categories, "num_categories");
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw std::invalid_argument("dropout must be in [0, 1)");
    }
    if (visual_channels() % semantic_width != 0) {
        throw std::invalid_argument("semantic_width " + std::to_string(semantic_width) +
                                    " does not divide c_i " +
                                    std::to_string(visual_channels()));
    }
    if ((2 * visual_channels()) % channel_reduction != 0) {
        throw std::invalid_argument("channel_reduction must divide 2 * c_i");
    }
    if (vin_channels.size() >= 64 || input_size % (std::size_t{1} << vin_channels.size()) != 0) {
        throw std::invalid_argument("input_size " + std::to_string(input_size) +
                                    " is not divisible by 2^" +
                                    std::to_string(vin_channels.size()));
    }
}

ModelConfig full_scale_config() {
    ModelConfig c;
    c.input_size = 224;
    c.vin_channels = {128, 256, 512};
    c.oln_hidden = 300;
    c.semantic_width = 256;
    return c;
}

ModelParams init_params(const ModelConfig& config, Variant variant, std::uint64_t seed) {
    ModelParams params;
    std::uint64_t stream = 0;
    for (const auto& spec : param_specs(config, variant)) {
        if (spec.bias) {
            params.emplace(spec.name, Tensor::zeros(spec.shape, true));
        } else {
            params.emplace(spec.name, ad::xavier_init(spec.shape, spec.fan_in, spec.fan_out,
                                                      mix_seed(seed, stream++)));
        }
    }
    return params;
}

void check_params(const ModelParams& params, const ModelConfig& config, Variant variant) {
    const auto specs = param_specs(config, variant);
    for (const auto& spec : specs) {
        const Tensor& t = get(params, spec.name);
        if (!t.defined() || t.shape() != spec.shape) {
            throw std::invalid_argument("parameter " + spec.name + " has shape " +
                                        (t.defined() ? ad::shape_to_string(t.shape()) : "[]") +
                                        ", expected " + ad::shape_to_string(spec.shape));
        }
        if (!ad::all_finite(t.values())) {
            throw std::invalid_argument("parameter " + spec.name + " is not finite");
        }
    }
    if (params.size() != specs.size()) {
        for (const auto& [name, t] : params) {
            bool known = false;
            for (const auto& spec : specs) known = known || spec.name == name;
            if (!known) throw std::invalid_argument("unexpected parameter " + name);
        }
    }
}

std::size_t parameter_count(const ModelParams& params) {
    std::size_t n = 0;
    for (const auto& [name, t] : params) n += t.size();
    return n;
}

Tensor vin_forward(Tape& tape, const Tensor& input, const ModelParams& params,
                   const ModelConfig& config) {
    const std::size_t s = config.input_size;
    const std::size_t r = input.rank();
    if ((r != 3 && r != 4) || input.dim(r - 3) != s || input.dim(r - 2) != s ||
        input.dim(r - 1) != 5) {
        throw std::invalid_argument("vin_forward: expected " + std::to_string(s) + "x" +
                                    std::to_string(s) + "x5 input, got " +
                                    ad::shape_to_string(input.shape()));
    }
    Tensor x = input;
    for (std::size_t b = 0; b < config.vin_channels.size(); ++b) {
        x = ad::conv2d(tape, x, get(params, conv_name(b, "kernels")),
                       get(params, conv_name(b, "bias")), 1, 1);
        x = ad::relu(tape, x);
        x = ad::maxpool2(tape, x);
    }
    return x;
}

Tensor oln_forward(Tape& tape, const Tensor& diff, const ModelParams& params,
                   const ModelConfig& config) {
    check_last_dim(diff, config.num_categories, "oln_forward");
    return fc_stack(tape, diff, params, "oln", 2, 0.0, Mode::kEval, 0);
}

Tensor extend(Tape& tape, const Tensor& semantic, std::size_t n) {
    if (n == 0) throw std::invalid_argument("extend: n must be positive");
    return ad::tile_channels(tape, semantic, n);
}

Tensor dynamic_conv(Tape& tape, const Tensor& kernels, const Tensor& visual) {
    check_last_dim(visual, kernels.shape().back(), "dynamic_conv");
    return ad::multiply_channels(tape, visual, kernels);
}

Tensor channel_weight(Tape& tape, const Tensor& concatenated, const ModelParams& params) {
    check_last_dim(concatenated, get(params, "sil.cw.fc1.weights").dim(0), "channel_weight");
    Tensor squeezed = ad::global_avg_pool(tape, concatenated);
    Tensor gate = fc_stack(tape, squeezed, params, "sil.cw", 2, 0.0, Mode::kEval, 0);
    gate = ad::sigmoid(tape, gate);
    return ad::multiply_channels(tape, concatenated, gate);
}

PairFeatures sil_forward(Tape& tape, const Tensor& visual, const Tensor& semantic,
                         const ModelParams& params, const ModelConfig& config) {
    check_last_dim(visual, config.visual_channels(), "sil_forward");
    check_last_dim(semantic, config.semantic_width, "sil_forward");
    PairFeatures f;
    f.visual = visual;
    f.semantic = semantic;
    f.kernels = extend(tape, semantic, config.extension_count());
    f.attended = dynamic_conv(tape, f.kernels, visual);
    f.concatenated = ad::concat_channels(tape, f.attended, visual);
    f.recalibrated = channel_weight(tape, f.concatenated, params);
    return f;
}

Tensor classifier_forward(Tape& tape, const Tensor& features, const ModelParams& params,
                          const ModelConfig& config, Mode mode, std::uint64_t dropout_seed) {
    Tensor x = flatten(tape, features);
    check_last_dim(x, get(params, "cls.fc1.weights").dim(0), "classifier_forward");
    return fc_stack(tape, x, params, "cls", config.classifier_hidden.size() + 1, config.dropout,
                    mode, dropout_seed);
}

Tensor cf_forward(Tape& tape, const Tensor& visual, const ModelParams& params,
                  const ModelConfig& config, Mode mode, std::uint64_t dropout_seed) {
    return classifier_forward(tape, visual, params, config, mode, dropout_seed);
}

RelationModel::RelationModel(ModelConfig config, Variant variant, std::uint64_t seed)
    : config_(std::move(config)), variant_(variant),
      params_(init_params(config_, variant_, seed)) {}

RelationModel::RelationModel(ModelConfig config, Variant variant, ModelParams params)
    : config_(std::move(config)), variant_(variant), params_(std::move(params)) {
    check_params(params_, config_, variant_);
    for (auto& [name, t] : params_) t.set_requires_grad(true);
}

std::vector<Tensor> RelationModel::parameter_list() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& [name, t] : params_) out.push_back(t);
    return out;
}

Tensor RelationModel::forward(Tape& tape, const Tensor& inputs, const Tensor& diffs, Mode mode,
                              std::uint64_t dropout_seed) const {
    Tensor visual = vin_forward(tape, inputs, params_, config_);
    if (variant_ == Variant::kControlled) {
        return cf_forward(tape, visual, params_, config_, mode, dropout_seed);
    }
    if (diffs.rank() + 2 != inputs.rank() ||
        (inputs.rank() == 4 && diffs.dim(0) != inputs.dim(0))) {
        throw std::invalid_argument("forward: category vectors " +
                                    ad::shape_to_string(diffs.shape()) +
                                    " do not match inputs " +
                                    ad::shape_to_string(inputs.shape()));
    }
    Tensor semantic = oln_forward(tape, diffs, params_, config_);
    PairFeatures f = sil_forward(tape, visual, semantic, params_, config_);
    return classifier_forward(tape, f.recalibrated, params_, config_, mode, dropout_seed);
}

PairFeatures RelationModel::features(Tape& tape, const Tensor& inputs,
                                     const Tensor& diffs) const {
    if (variant_ != Variant::kFull) {
        throw std::logic_error("features: the controlled variant has no SIL block");
    }
    Tensor visual = vin_forward(tape, inputs, params_, config_);
    Tensor semantic = oln_forward(tape, diffs, params_, config_);
    return sil_forward(tape, visual, semantic, params_, config_);
}

std::string config_to_json(const ModelConfig& c, Variant variant) {
    nlohmann::json j;
    j["variant"] = to_string(variant);
    j["input_size"] = c.input_size;
    j["vin_channels"] = c.vin_channels;
    j["oln_hidden"] = c.oln_hidden;
    j["semantic_width"] = c.semantic_width;
    j["channel_reduction"] = c.channel_reduction;
    j["classifier_hidden"] = c.classifier_hidden;
    j["dropout"] = c.dropout;
    j["num_predicates"] = c.num_predicates;
    j["num_categories"] = c.num_categories;
    return j.dump(2);
}

std::pair<ModelConfig, Variant> config_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        ModelConfig c;
        c.input_size = j.at("input_size").get<std::size_t>();
        c.vin_channels = j.at("vin_channels").get<std::vector<std::size_t>>();
        c.oln_hidden = j.at("oln_hidden").get<std::size_t>();
        c.semantic_width = j.at("semantic_width").get<std::size_t>();
        c.channel_reduction = j.at("channel_reduction").get<std::size_t>();
        c.classifier_hidden = j.at("classifier_hidden").get<std::vector<std::size_t>>();
        c.dropout = j.at("dropout").get<double>();
        c.num_predicates = j.at("num_predicates").get<std::size_t>();
        c.num_categories = j.at("num_categories").get<std::size_t>();
        c.validate();
        return {c, variant_from_string(j.at("variant").get<std::string>())};
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad model manifest: ") + e.what());
    }
}

void RelationModel::save(const std::filesystem::path& path) const {
    ad::write_checkpoint(path, ad::Checkpoint{config_to_json(config_, variant_), params_});
}

RelationModel RelationModel::load(const std::filesystem::path& path) {
    ad::Checkpoint ckpt = ad::read_checkpoint(path);
    auto [config, variant] = config_from_json(ckpt.manifest);
    try {
        return RelationModel(config, variant, std::move(ckpt.tensors));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": checkpoint does not match its manifest: " +
                                    e.what());
    }
}

}  // namespace silrel::model
