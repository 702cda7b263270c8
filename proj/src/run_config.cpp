/*
 * Copyright 2026 The jumpgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "jgp/harness.hpp"

namespace jgp {

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys = {
    "surrogate", "criterion", "d", "n_local", "seed_design_size", "stages", "n_candidates",
    "n_star", "trunc_order", "batch_size", "reps", "master_seed", "source", "test_size",
    "eval_every", "nlpd_latent", "record_timing", "boundary_test_size", "bias_pairing",
    "final_restarts", "refit_final_restarts"};

const std::set<std::string> kSourceKeys = {"kind", "path"};

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config: key '") + key + "' has the wrong type");
    }
}

int get_int(const json& j, const char* key) {
    if (!j.at(key).is_number_integer()) {
        throw std::invalid_argument(std::string("config: key '") + key + "' must be an integer");
    }
    return get<int>(j, key);
}

SourceKind parse_source_kind(const std::string& s) {
    for (auto k : {SourceKind::kBgp, SourceKind::kTwoRegion, SourceKind::kFourRegion, SourceKind::kCsv}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("config: unknown source kind '" + s + "'");
}

}  // namespace

std::string to_string(Surrogate s) { return s == Surrogate::kJgp ? "JGP" : "GP"; }

std::string to_string(SourceKind s) {
    switch (s) {
        case SourceKind::kBgp: return "bgp";
        case SourceKind::kTwoRegion: return "two_region";
        case SourceKind::kFourRegion: return "four_region";
        case SourceKind::kCsv: return "csv";
    }
    return "?";
}

void RunConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw std::invalid_argument(std::string("config: ") + name + " must be positive");
    };
    auto nonneg = [](int v, const char* name) {
        if (v < 0) throw std::invalid_argument(std::string("config: ") + name + " must be nonnegative");
    };
    positive(d, "d");
    positive(n_local, "n_local");
    nonneg(seed_design_size, "seed_design_size");
    nonneg(stages, "stages");
    nonneg(n_candidates, "n_candidates");
    nonneg(n_star, "n_star");
    nonneg(trunc_order, "trunc_order");
    positive(batch_size, "batch_size");
    positive(reps, "reps");
    positive(test_size, "test_size");
    positive(eval_every, "eval_every");
    nonneg(boundary_test_size, "boundary_test_size");
    positive(final_restarts, "final_restarts");
    positive(refit_final_restarts, "refit_final_restarts");
    if (n_local < 4) throw std::invalid_argument("config: n_local must be at least 4");
    if (trunc_order > n_local) throw std::invalid_argument("config: trunc_order exceeds n_local");
    if (batch_size > resolved_candidates()) {
        throw std::invalid_argument("config: batch_size exceeds the candidate count");
    }
    if (source.kind == SourceKind::kBgp && (d < 2 || d > 5)) {
        throw std::invalid_argument("config: the bgp source needs d in 2..5");
    }
    if ((source.kind == SourceKind::kTwoRegion || source.kind == SourceKind::kFourRegion) && d != 2) {
        throw std::invalid_argument("config: fixed surfaces are two-dimensional");
    }
    if (source.kind == SourceKind::kCsv && source.csv_path.empty()) {
        throw std::invalid_argument("config: csv source needs a path");
    }
    if (surrogate == Surrogate::kGp && (criterion == Criterion::kMspe || criterion == Criterion::kImspe)) {
        throw std::invalid_argument("config: the GP surrogate supports VAR, ALC and LHD only");
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!kKeys.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    RunConfig c;
    if (j.contains("surrogate")) {
        const auto s = get<std::string>(j, "surrogate");
        if (s == "JGP") {
            c.surrogate = Surrogate::kJgp;
        } else if (s == "GP") {
            c.surrogate = Surrogate::kGp;
        } else {
            throw std::invalid_argument("config: surrogate must be JGP or GP");
        }
    }
    if (j.contains("criterion")) c.criterion = parse_criterion(get<std::string>(j, "criterion"));
    const std::pair<const char*, int*> ints[] = {
        {"d", &c.d}, {"n_local", &c.n_local}, {"seed_design_size", &c.seed_design_size},
        {"stages", &c.stages}, {"n_candidates", &c.n_candidates}, {"n_star", &c.n_star},
        {"trunc_order", &c.trunc_order}, {"batch_size", &c.batch_size}, {"reps", &c.reps},
        {"test_size", &c.test_size}, {"eval_every", &c.eval_every},
        {"boundary_test_size", &c.boundary_test_size}, {"final_restarts", &c.final_restarts},
        {"refit_final_restarts", &c.refit_final_restarts}};
    for (const auto& [key, dst] : ints) {
        if (j.contains(key)) *dst = get_int(j, key);
    }
    if (j.contains("master_seed")) {
        if (!j.at("master_seed").is_number_unsigned()) {
            throw std::invalid_argument("config: master_seed must be a nonnegative integer");
        }
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("nlpd_latent")) c.nlpd_latent = get<bool>(j, "nlpd_latent");
    if (j.contains("record_timing")) c.record_timing = get<bool>(j, "record_timing");
    if (j.contains("bias_pairing")) {
        const auto s = get<std::string>(j, "bias_pairing");
        if (s == "as_printed") {
            c.bias_pairing = BiasPairing::kAsPrinted;
        } else if (s == "transposed") {
            c.bias_pairing = BiasPairing::kTransposed;
        } else {
            throw std::invalid_argument("config: bias_pairing must be as_printed or transposed");
        }
    }
    if (j.contains("source")) {
        const auto& s = j.at("source");
        if (!s.is_object()) throw std::invalid_argument("config: source must be an object");
        for (const auto& [key, value] : s.items()) {
            if (!kSourceKeys.count(key)) throw std::invalid_argument("config: unknown source key '" + key + "'");
        }
        if (s.contains("kind")) c.source.kind = parse_source_kind(get<std::string>(s, "kind"));
        if (s.contains("path")) c.source.csv_path = get<std::string>(s, "path");
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_to_json(const RunConfig& c) {
    json j;
    j["surrogate"] = to_string(c.surrogate);
    j["criterion"] = to_string(c.criterion);
    j["d"] = c.d;
    j["n_local"] = c.n_local;
    j["seed_design_size"] = c.seed_design_size;
    j["stages"] = c.stages;
    j["n_candidates"] = c.n_candidates;
    j["n_star"] = c.n_star;
    j["trunc_order"] = c.trunc_order;
    j["batch_size"] = c.batch_size;
    j["reps"] = c.reps;
    j["master_seed"] = c.master_seed;
    j["source"] = {{"kind", to_string(c.source.kind)}, {"path", c.source.csv_path}};
    j["test_size"] = c.test_size;
    j["eval_every"] = c.eval_every;
    j["nlpd_latent"] = c.nlpd_latent;
    j["record_timing"] = c.record_timing;
    j["boundary_test_size"] = c.boundary_test_size;
    j["bias_pairing"] = c.bias_pairing == BiasPairing::kAsPrinted ? "as_printed" : "transposed";
    j["final_restarts"] = c.final_restarts;
    j["refit_final_restarts"] = c.refit_final_restarts;
    return j.dump(2);
}

}  // namespace jgp
