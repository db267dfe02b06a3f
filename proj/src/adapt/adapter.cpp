// Copyright 2026 the driftbench authors
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

#include "driftbench/adapt/adapter.hpp"

#include <array>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {

std::vector<int> argmax_labels(const Matrix& probs) {
    std::vector<int> labels(probs.rows());
    for (std::size_t r = 0; r < probs.rows(); ++r) labels[r] = static_cast<int>(argmax(probs.row(r)));
    return labels;
}

Prediction prediction_from_probs(Matrix probs) {
    Prediction p;
    p.labels = argmax_labels(probs);
    p.probs = std::move(probs);
    return p;
}

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 8> kNames{{
    {Method::kSource, "source"},
    {Method::kTent, "tent"},
    {Method::kEata, "eata"},
    {Method::kSam, "sam"},
    {Method::kPl, "pl"},
    {Method::kT3a, "t3a"},
    {Method::kLame, "lame"},
    {Method::kFoa, "foa"},
}};

std::string ParamSetText(ParamSet s) {
    std::string out;
    for (auto g : {ParamGroup::kNormScale, ParamGroup::kNormShift, ParamGroup::kWeight, ParamGroup::kBias,
                   ParamGroup::kPrompt}) {
        if (!s.contains(g)) continue;
        if (!out.empty()) out += ",";
        out += param_group_name(g);
    }
    return out;
}

nlohmann::json EmJson(const EmConfig& c) {
    nlohmann::json j;
    j["lr"] = c.lr;
    j["steps_per_batch"] = c.steps_per_batch;
    j["filter_threshold"] = c.filter_threshold ? nlohmann::json(*c.filter_threshold) : nlohmann::json();
    j["filter_weighting"] = c.filter_weighting;
    j["sharpness_rho"] = c.sharpness_rho ? nlohmann::json(*c.sharpness_rho) : nlohmann::json();
    j["params"] = ParamSetText(c.params_to_update);
    j["norm_mode"] = norm_mode_name(NormMode::kBatchStats);
    return j;
}

class SourceAdapter final : public Adapter {
public:
    explicit SourceAdapter(const SourceModel& model) : model_(model) {}
    Method method() const override { return Method::kSource; }
    NormMode norm_mode() const override { return NormMode::kSourceStats; }
    void reset() override {}
    Prediction adapt(const UnlabeledBatch& batch) override {
        return prediction_from_probs(
            forward(model_.params, model_.stats, batch.embeddings, NormMode::kSourceStats).probs);
    }

private:
    SourceModel model_;
};

class EmAdapter final : public Adapter {
public:
    EmAdapter(Method m, const EmConfig& cfg, const SourceModel& model)
        : method_(m), cfg_(cfg), model_(model), state_(EmState::create(model.params, cfg)) {
        cfg_.validate(model.params.classes());
    }
    Method method() const override { return method_; }
    NormMode norm_mode() const override { return NormMode::kBatchStats; }
    void reset() override { state_ = EmState::create(model_.params, cfg_); }
    Prediction adapt(const UnlabeledBatch& batch) override {
        if (cfg_.sharpness_rho) return sam_adapt_batch(state_, cfg_, model_.stats, batch, *cfg_.sharpness_rho);
        return tent_adapt_batch(state_, cfg_, model_.stats, batch);
    }

private:
    Method method_;
    EmConfig cfg_;
    SourceModel model_;
    EmState state_;
};

class PlAdapter final : public Adapter {
public:
    PlAdapter(const PlConfig& cfg, const SourceModel& model)
        : cfg_(cfg), model_(model), state_(PlState::create(model.params, cfg)) {}
    Method method() const override { return Method::kPl; }
    NormMode norm_mode() const override { return cfg_.norm_mode; }
    void reset() override { state_ = PlState::create(model_.params, cfg_); }
    Prediction adapt(const UnlabeledBatch& batch) override {
        return pl_adapt_batch(state_, cfg_, model_.stats, batch);
    }

private:
    PlConfig cfg_;
    SourceModel model_;
    PlState state_;
};

class T3aAdapter final : public Adapter {
public:
    T3aAdapter(const T3aConfig& cfg, const SourceModel& model)
        : cfg_(cfg), model_(model), support_(SupportSet::from_classifier(model.params, cfg.support_size)) {}
    Method method() const override { return Method::kT3a; }
    NormMode norm_mode() const override { return NormMode::kSourceStats; }
    void reset() override { support_ = SupportSet::from_classifier(model_.params, cfg_.support_size); }
    Prediction adapt(const UnlabeledBatch& batch) override {
        const auto fwd = forward(model_.params, model_.stats, batch.embeddings, NormMode::kSourceStats);
        support_.update(fwd.cache.features, fwd.probs);
        return t3a_classify(support_, fwd.cache.features);
    }

private:
    T3aConfig cfg_;
    SourceModel model_;
    SupportSet support_;
};

class LameAdapter final : public Adapter {
public:
    LameAdapter(const LameConfig& cfg, const SourceModel& model) : cfg_(cfg), model_(model) {
        cfg_.validate();
    }
    Method method() const override { return Method::kLame; }
    NormMode norm_mode() const override { return NormMode::kSourceStats; }
    void reset() override {}
    Prediction adapt(const UnlabeledBatch& batch) override {
        const auto fwd = forward(model_.params, model_.stats, batch.embeddings, NormMode::kSourceStats);
        LameResult r = lame_adjust(fwd.probs, fwd.cache.features, cfg_);
        Prediction out = prediction_from_probs(std::move(r.probs));
        out.loss = r.objective.back();
        if (!r.converged) {
            out.warning = "lame: not converged after " + std::to_string(r.iterations) + " iterations";
        }
        return out;
    }

private:
    LameConfig cfg_;
    SourceModel model_;
};

class FoaAdapter final : public Adapter {
public:
    FoaAdapter(const FoaConfig& cfg, const SourceModel& model)
        : cfg_(cfg), model_(model), state_(FoaState::create(model.params.dim())) {}
    Method method() const override { return Method::kFoa; }
    NormMode norm_mode() const override { return NormMode::kSourceStats; }
    void reset() override { state_ = FoaState::create(model_.params.dim()); }
    Prediction adapt(const UnlabeledBatch& batch) override {
        return foa_adapt_batch(state_, model_.params, model_.stats, batch, cfg_);
    }

private:
    FoaConfig cfg_;
    SourceModel model_;
    FoaState state_;
};

}  // namespace

std::string_view method_name(Method m) {
    for (const auto& [method, name] : kNames) {
        if (method == m) return name;
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (const auto& [method, n] : kNames) {
        if (n == name) return method;
    }
    throw UsageError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view comma_list) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= comma_list.size()) {
        const std::size_t end = std::min(comma_list.find(',', start), comma_list.size());
        const auto tok = comma_list.substr(start, end - start);
        if (tok == "all") {
            out.insert(out.end(), all_methods().begin(), all_methods().end());
        } else if (!tok.empty()) {
            out.push_back(parse_method(tok));
        }
        start = end + 1;
    }
    if (out.empty()) throw UsageError("empty method list");
    return out;
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> kAll{Method::kSource, Method::kTent, Method::kEata, Method::kSam,
                                          Method::kPl,     Method::kT3a,  Method::kLame, Method::kFoa};
    return kAll;
}

AdapterConfig AdapterConfig::defaults(Method method, std::size_t classes) {
    AdapterConfig c;
    c.method = method;
    c.eata.filter_threshold = default_filter_threshold(classes);
    c.eata.filter_weighting = true;
    c.sam.filter_threshold = default_filter_threshold(classes);
    c.sam.sharpness_rho = 0.05;
    return c;
}

AdapterConfig& AdapterConfig::reseed(std::uint64_t s) {
    seed = s;
    pl.seed = s;
    foa.seed = s;
    return *this;
}

nlohmann::json AdapterConfig::to_json() const {
    nlohmann::json j;
    j["method"] = method_name(method);
    j["seed"] = seed;
    switch (method) {
        case Method::kSource:
            j["norm_mode"] = norm_mode_name(NormMode::kSourceStats);
            break;
        case Method::kTent:
            j["em"] = EmJson(tent);
            break;
        case Method::kEata:
            j["em"] = EmJson(eata);
            break;
        case Method::kSam:
            j["em"] = EmJson(sam);
            break;
        case Method::kPl:
            j["pl"] = {{"lr", pl.lr},
                       {"gamma", pl.gamma},
                       {"soft_targets", pl.soft_targets},
                       {"restore_rate", pl.restore_rate ? nlohmann::json(*pl.restore_rate) : nlohmann::json()},
                       {"predict_from_anchor", pl.predict_from_anchor},
                       {"norm_mode", norm_mode_name(pl.norm_mode)},
                       {"params", ParamSetText(pl.params_to_update)},
                       {"seed", pl.seed}};
            break;
        case Method::kT3a:
            j["t3a"] = {{"support_size", t3a.support_size}};
            break;
        case Method::kLame:
            j["lame"] = {{"knn", lame.knn},
                         {"fidelity", lame.fidelity},
                         {"max_iterations", lame.max_iterations},
                         {"tolerance", lame.tolerance}};
            break;
        case Method::kFoa:
            j["foa"] = {{"generations_per_batch", foa.generations_per_batch},
                        {"sigma0", foa.sigma0},
                        {"population", foa.population},
                        {"seed", foa.seed}};
            break;
    }
    return j;
}

std::unique_ptr<Adapter> make_adapter(const AdapterConfig& cfg, const SourceModel& model) {
    model.params.validate();
    model.stats.validate();
    switch (cfg.method) {
        case Method::kSource:
            return std::make_unique<SourceAdapter>(model);
        case Method::kTent:
            return std::make_unique<EmAdapter>(Method::kTent, cfg.tent, model);
        case Method::kEata:
            return std::make_unique<EmAdapter>(Method::kEata, cfg.eata, model);
        case Method::kSam:
            return std::make_unique<EmAdapter>(Method::kSam, cfg.sam, model);
        case Method::kPl: {
            PlConfig pl = cfg.pl;
            return std::make_unique<PlAdapter>(pl, model);
        }
        case Method::kT3a:
            return std::make_unique<T3aAdapter>(cfg.t3a, model);
        case Method::kLame:
            return std::make_unique<LameAdapter>(cfg.lame, model);
        case Method::kFoa:
            return std::make_unique<FoaAdapter>(cfg.foa, model);
    }
    throw UsageError("unsupported method");
}

}  // namespace driftbench
