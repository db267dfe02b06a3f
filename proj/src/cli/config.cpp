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

#include "driftbench/cli/config.hpp"

#include <charconv>
#include <functional>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "driftbench/errors.hpp"

namespace driftbench::cli {
namespace {

using nlohmann::json;

std::string Trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string tok = Trim(text.substr(start, end - start));
        if (!tok.empty()) out.push_back(tok);
        start = end + 1;
    }
    return out;
}

template <typename T>
T ParseNumber(const std::string& text, const std::string& what) {
    T value{};
    const std::string t = Trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw UsageError(what + ": cannot parse '" + text + "'");
    }
    return value;
}

double ParseDouble(const std::string& text, const std::string& what) { return ParseNumber<double>(text, what); }
std::size_t ParseSize(const std::string& text, const std::string& what) {
    return ParseNumber<std::size_t>(text, what);
}
std::uint64_t ParseU64(const std::string& text, const std::string& what) {
    return ParseNumber<std::uint64_t>(text, what);
}

bool ParseBool(const std::string& text, const std::string& what) {
    const std::string t = Trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw UsageError(what + ": expected a boolean, got '" + text + "'");
}

// "none" clears an optional.
std::optional<double> ParseOptionalDouble(const std::string& text, const std::string& what) {
    if (Trim(text) == "none") return std::nullopt;
    return ParseDouble(text, what);
}

NormMode ParseNormMode(const std::string& text, const std::string& what) {
    const std::string t = Trim(text);
    if (t == "source-stats") return NormMode::kSourceStats;
    if (t == "batch-stats") return NormMode::kBatchStats;
    throw UsageError(what + ": expected source-stats or batch-stats, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using SectionTable = std::map<std::string, Setter>;

const std::map<std::string, SectionTable>& Tables() {
    static const std::map<std::string, SectionTable> kTables = {
        {"run",
         {
             {"seed", [](RunConfig& c, const std::string& v, const std::string&) { c.seeds = parse_seed_list(v); }},
             {"seeds", [](RunConfig& c, const std::string& v, const std::string&) { c.seeds = parse_seed_list(v); }},
             {"protocol", [](RunConfig& c, const std::string& v, const std::string&) { c.protocol = parse_protocol(Trim(v)); }},
             {"methods", [](RunConfig& c, const std::string& v, const std::string&) { c.methods = parse_methods(v); }},
             {"batch_size", [](RunConfig& c, const std::string& v, const std::string& w) { c.batch_size = ParseSize(v, w); }},
             {"sweep_sizes", [](RunConfig& c, const std::string& v, const std::string&) { c.sweep_sizes = parse_size_list(v); }},
             {"out", [](RunConfig& c, const std::string& v, const std::string&) { c.out = Trim(v); }},
             {"format", [](RunConfig& c, const std::string& v, const std::string&) { c.format = parse_report_format(Trim(v)); }},
             {"jobs", [](RunConfig& c, const std::string& v, const std::string& w) { c.jobs = ParseSize(v, w); }},
             {"weighted_aggregate", [](RunConfig& c, const std::string& v, const std::string& w) { c.weighted_aggregate = ParseBool(v, w); }},
             {"reset",
              [](RunConfig& c, const std::string& v, const std::string& w) {
                  const std::string t = Trim(v);
                  if (t == "episodic") {
                      c.reset = ResetPolicy::kEpisodic;
                  } else if (t == "continual") {
                      c.reset = ResetPolicy::kContinual;
                  } else {
                      throw UsageError(w + ": expected episodic or continual, got '" + v + "'");
                  }
              }},
             {"style_holdout", [](RunConfig& c, const std::string& v, const std::string& w) { c.style_holdout_fraction = ParseDouble(v, w); }},
         }},
        {"world",
         {
             {"dim", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.dim = ParseSize(v, w); }},
             {"classes", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.classes = ParseSize(v, w); }},
             {"radius", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.radius = ParseDouble(v, w); }},
             {"within_std", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.within_std = ParseDouble(v, w); }},
             {"groups", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.groups = ParseSize(v, w); }},
             {"group_offset_std", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.group_offset_std = ParseDouble(v, w); }},
             {"per_class_per_group", [](RunConfig& c, const std::string& v, const std::string& w) { c.world.per_class_per_group = ParseSize(v, w); }},
         }},
        {"shift",
         {
             {"severity", [](RunConfig& c, const std::string& v, const std::string& w) { c.severity = ParseNumber<int>(v, w); }},
             {"offset_scale", [](RunConfig& c, const std::string& v, const std::string& w) { c.shift.offset_scale = ParseDouble(v, w); }},
             {"covariance_scale", [](RunConfig& c, const std::string& v, const std::string& w) { c.shift.covariance_scale = ParseDouble(v, w); }},
             {"contraction", [](RunConfig& c, const std::string& v, const std::string& w) { c.shift.contraction = ParseDouble(v, w); }},
             {"affine_eps", [](RunConfig& c, const std::string& v, const std::string& w) { c.shift.affine_eps = ParseOptionalDouble(v, w); }},
             {"bias_norm", [](RunConfig& c, const std::string& v, const std::string& w) { c.shift.bias_norm = ParseDouble(v, w); }},
         }},
        {"train",
         {
             {"epochs", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.epochs = ParseSize(v, w); }},
             {"lr", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.lr = ParseDouble(v, w); }},
             {"warmup", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.warmup_fraction = ParseDouble(v, w); }},
             {"weight_decay", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.weight_decay = ParseDouble(v, w); }},
             {"batch_size", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.batch_size = ParseSize(v, w); }},
             {"init_std", [](RunConfig& c, const std::string& v, const std::string& w) { c.train.init_std = ParseDouble(v, w); }},
         }},
    };
    return kTables;
}

EmConfig& EmBlock(AdapterConfig& a, const std::string& section) {
    if (section == "tent") return a.tent;
    if (section == "eata") return a.eata;
    return a.sam;
}

void ApplyAdapterKey(AdapterConfig& a, const std::string& section, const std::string& key, const std::string& value) {
    const std::string what = "[" + section + "] " + key;
    if (section == "tent" || section == "eata" || section == "sam") {
        EmConfig& em = EmBlock(a, section);
        if (key == "lr") {
            em.lr = ParseDouble(value, what);
        } else if (key == "steps") {
            em.steps_per_batch = ParseSize(value, what);
        } else if (key == "filter_threshold") {
            em.filter_threshold = ParseOptionalDouble(value, what);
        } else if (key == "filter_weighting") {
            em.filter_weighting = ParseBool(value, what);
        } else if (key == "sharpness_rho") {
            em.sharpness_rho = ParseOptionalDouble(value, what);
        } else if (key == "params") {
            em.params_to_update = ParamSet::parse(value);
        } else {
            throw UsageError(what + ": unknown key");
        }
    } else if (section == "pl") {
        if (key == "lr") {
            a.pl.lr = ParseDouble(value, what);
        } else if (key == "gamma") {
            a.pl.gamma = ParseDouble(value, what);
        } else if (key == "soft_targets") {
            a.pl.soft_targets = ParseBool(value, what);
        } else if (key == "restore_rate") {
            a.pl.restore_rate = ParseOptionalDouble(value, what);
        } else if (key == "predict_from_anchor") {
            a.pl.predict_from_anchor = ParseBool(value, what);
        } else if (key == "norm_mode") {
            a.pl.norm_mode = ParseNormMode(value, what);
        } else if (key == "params") {
            a.pl.params_to_update = ParamSet::parse(value);
        } else {
            throw UsageError(what + ": unknown key");
        }
    } else if (section == "t3a") {
        if (key != "support_size") throw UsageError(what + ": unknown key");
        a.t3a.support_size = ParseSize(value, what);
    } else if (section == "lame") {
        if (key == "knn") {
            a.lame.knn = ParseSize(value, what);
        } else if (key == "fidelity") {
            a.lame.fidelity = ParseDouble(value, what);
        } else if (key == "max_iterations") {
            a.lame.max_iterations = ParseSize(value, what);
        } else if (key == "tolerance") {
            a.lame.tolerance = ParseDouble(value, what);
        } else {
            throw UsageError(what + ": unknown key");
        }
    } else if (section == "foa") {
        if (key == "generations") {
            a.foa.generations_per_batch = ParseSize(value, what);
        } else if (key == "sigma0") {
            a.foa.sigma0 = ParseDouble(value, what);
        } else if (key == "population") {
            a.foa.population = ParseSize(value, what);
        } else {
            throw UsageError(what + ": unknown key");
        }
    } else {
        throw UsageError("unknown config section [" + section + "]");
    }
}

bool IsAdapterSection(const std::string& s) {
    return s == "tent" || s == "eata" || s == "sam" || s == "pl" || s == "t3a" || s == "lame" || s == "foa";
}

json EmptyOr(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& tok : SplitList(text)) out.push_back(ParseU64(tok, "seed"));
    if (out.empty()) throw UsageError("seed list is empty");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& tok : SplitList(text)) {
        const std::size_t v = ParseSize(tok, "batch size");
        if (v == 0) throw UsageError("batch size must be positive");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("batch size list is empty");
    return out;
}

void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
    if (IsAdapterSection(section)) {
        AdapterConfig scratch = AdapterConfig::defaults(Method::kSource, cfg.world.classes);
        ApplyAdapterKey(scratch, section, key, value);
        cfg.adapter_overrides[section][key] = value;
        return;
    }
    const auto& tables = Tables();
    const auto sec = tables.find(section);
    if (sec == tables.end()) throw UsageError("unknown config section [" + section + "]");
    const auto setter = sec->second.find(key);
    if (setter == sec->second.end()) throw UsageError("[" + section + "] " + key + ": unknown key");
    setter->second(cfg, value, "[" + section + "] " + key);
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw UsageError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw UsageError(path + ": setting '" + section + "' lies outside any [section]");
        for (const auto& [key, value] : body) {
            try {
                apply_setting(cfg, section, key, value.data());
            } catch (const UsageError& e) {
                throw UsageError(path + ": " + e.what());
            }
        }
    }
}

ProtocolConfig RunConfig::protocol_config(std::uint64_t seed) const {
    ProtocolConfig p = ProtocolConfig::defaults(protocol, seed);
    const int default_severity = p.shift.severity;
    p.world = world;
    p.world.seed = seed;
    p.shift = shift;
    p.shift.kind = protocol_shift_kind(protocol);
    p.shift.severity = severity.value_or(default_severity);
    p.train = train;
    p.batch_size = batch_size;
    p.weighted_aggregate = weighted_aggregate;
    p.style_holdout_fraction = style_holdout_fraction;
    p.jobs = jobs;
    return p;
}

AdapterConfig RunConfig::adapter_config(Method method, std::uint64_t seed) const {
    AdapterConfig a = AdapterConfig::defaults(method, world.classes);
    for (const auto& [section, keys] : adapter_overrides) {
        for (const auto& [key, value] : keys) ApplyAdapterKey(a, section, key, value);
    }
    a.reseed(seed);
    return a;
}

AdapterHandle RunConfig::adapter_handle(Method method, std::uint64_t seed) const {
    return AdapterHandle{adapter_config(method, seed), reset};
}

json RunConfig::to_json() const {
    json methods_json = json::array();
    json adapters = json::object();
    for (Method m : methods) {
        methods_json.push_back(method_name(m));
        adapters[std::string(method_name(m))] = adapter_config(m, 0).to_json();
    }
    const ProtocolConfig p = protocol_config(seeds.front());
    json j;
    j["command"] = command;
    j["seeds"] = seeds;
    j["protocol"] = protocol_name(protocol);
    j["methods"] = methods_json;
    j["batch_size"] = batch_size;
    j["sweep_sizes"] = sweep_sizes;
    j["weighted_aggregate"] = weighted_aggregate;
    j["reset"] = reset == ResetPolicy::kEpisodic ? "episodic" : "continual";
    j["style_holdout"] = style_holdout_fraction;
    j["world"] = {{"dim", world.dim},
                  {"classes", world.classes},
                  {"radius", world.radius},
                  {"within_std", world.within_std},
                  {"groups", world.groups},
                  {"group_offset_std", world.group_offset_std},
                  {"per_class_per_group", world.per_class_per_group}};
    j["shift"] = {{"kind", shift_kind_name(p.shift.kind)},
                  {"severity", p.shift.severity},
                  {"offset_scale", shift.offset_scale},
                  {"covariance_scale", shift.covariance_scale},
                  {"contraction", shift.contraction},
                  {"affine_eps", EmptyOr(shift.affine_eps)},
                  {"bias_norm", shift.bias_norm}};
    j["train"] = {{"epochs", train.epochs},
                  {"lr", train.lr},
                  {"warmup", train.warmup_fraction},
                  {"weight_decay", train.weight_decay},
                  {"batch_size", train.batch_size},
                  {"init_std", train.init_std}};
    j["adapters"] = adapters;
    if (data) j["data"] = *data;
    if (checkpoint) j["checkpoint"] = *checkpoint;
    if (!inputs.empty()) j["inputs"] = inputs;
    return j;
}

}  // namespace driftbench::cli
