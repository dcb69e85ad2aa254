// Copyright (C) 2026 The Lion Retrieval Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include <cmath>
#include <fstream>
#include <sstream>

#include "lion/errors.hpp"
#include "lion/hash.hpp"
#include "lion/io.hpp"
#include "lion/train_config.hpp"

namespace lion {

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError(path.string(), lineno, "expected 'key = value'");
        const std::string key(trim(text.substr(0, eq)));
        const std::string value(trim(text.substr(eq + 1)));
        if (key.empty()) throw ParseError(path.string(), lineno, "empty key");
        if (!kv.emplace(key, value).second) throw ParseError(path.string(), lineno, "duplicate key '" + key + "'");
    }
    return kv;
}

std::string key_values_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    write_file_atomically(path, [&](std::ostream& out) { out << key_values_text(kv); });
}

std::string to_string(Objective o) {
    switch (o) {
        case Objective::kCl: return "cl";
        case Objective::kKdMarginMse: return "kd_margin_mse";
        case Objective::kClPlusKd: return "cl_plus_kd";
        case Objective::kMntp: return "mntp";
    }
    return "?";
}

Objective parse_objective(const std::string& text) {
    if (text == "cl") return Objective::kCl;
    if (text == "kd_margin_mse") return Objective::kKdMarginMse;
    if (text == "cl_plus_kd") return Objective::kClPlusKd;
    if (text == "mntp") return Objective::kMntp;
    throw ConfigError("unknown objective '" + text + "' (cl, kd_margin_mse, cl_plus_kd, mntp)");
}

bool needs_teacher(Objective o) { return o == Objective::kKdMarginMse || o == Objective::kClPlusKd; }

namespace {

std::string corruption_name(MaskCorruption c) { return c == MaskCorruption::kBert ? "bert" : "mask"; }

MaskCorruption parse_corruption(const std::string& text) {
    if (text == "mask") return MaskCorruption::kMaskOnly;
    if (text == "bert") return MaskCorruption::kBert;
    throw ConfigError("unknown mask_corruption '" + text + "' (mask, bert)");
}

std::size_t count_value(const std::string& key, const std::string& value) {
    try {
        const long long v = parse_int(value);
        if (v < 0) throw ConfigError(key + " must be >= 0, got " + value);
        return static_cast<std::size_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
}

double real_value(const std::string& key, const std::string& value) {
    try {
        return parse_double(value);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

void require_count(const char* key, std::size_t v) {
    if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
}

void require_open_unit(const char* key, double v) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(key) + " must lie in (0, 1)");
}

void require_non_negative(const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be a finite value >= 0");
}

}  // namespace

void TrainConfig::validate() const {
    require_count("epochs", epochs);
    require_count("batch_size", batch_size);
    require_count("grad_accum_steps", grad_accum_steps);
    require_count("num_negatives", num_negatives);
    require_count("max_query_len", max_query_len);
    require_count("max_doc_len", max_doc_len);
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    require_non_negative("flop_lambda_query", flop_lambda_query);
    require_non_negative("flop_lambda_doc", flop_lambda_doc);
    require_open_unit("mask_rate", mask_rate);
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw ConfigError("warmup_ratio must lie in [0, 1)");
    if (!(kl_temperature > 0.0) || !std::isfinite(kl_temperature)) throw ConfigError("kl_temperature must be > 0");
}

const std::vector<std::string>& TrainConfig::keys() {
    static const std::vector<std::string> k{
        "objective",     "paradigm",          "epochs",          "batch_size",     "grad_accum_steps",
        "num_negatives", "learning_rate",     "flop_lambda_query", "flop_lambda_doc", "mask_rate",
        "seed",          "max_query_len",     "max_doc_len",     "max_steps",      "warmup_ratio",
        "kl_temperature", "mask_corruption",  "checkpoint_every"};
    return k;
}

KeyValues TrainConfig::to_key_values() const {
    return {
        {"objective", to_string(objective)},
        {"paradigm", to_string(paradigm)},
        {"epochs", std::to_string(epochs)},
        {"batch_size", std::to_string(batch_size)},
        {"grad_accum_steps", std::to_string(grad_accum_steps)},
        {"num_negatives", std::to_string(num_negatives)},
        {"learning_rate", format_double(learning_rate)},
        {"flop_lambda_query", format_double(flop_lambda_query)},
        {"flop_lambda_doc", format_double(flop_lambda_doc)},
        {"mask_rate", format_double(mask_rate)},
        {"seed", std::to_string(seed)},
        {"max_query_len", std::to_string(max_query_len)},
        {"max_doc_len", std::to_string(max_doc_len)},
        {"max_steps", std::to_string(max_steps)},
        {"warmup_ratio", format_double(warmup_ratio)},
        {"kl_temperature", format_double(kl_temperature)},
        {"mask_corruption", corruption_name(mask_corruption)},
        {"checkpoint_every", std::to_string(checkpoint_every)},
    };
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv, TrainConfig c) {
    for (const auto& [key, value] : kv) {
        if (key == "objective") c.objective = parse_objective(value);
        else if (key == "paradigm") {
            try {
                c.paradigm = parse_paradigm(value);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
        }
        else if (key == "epochs") c.epochs = count_value(key, value);
        else if (key == "batch_size") c.batch_size = count_value(key, value);
        else if (key == "grad_accum_steps") c.grad_accum_steps = count_value(key, value);
        else if (key == "num_negatives") c.num_negatives = count_value(key, value);
        else if (key == "learning_rate") c.learning_rate = real_value(key, value);
        else if (key == "flop_lambda_query") c.flop_lambda_query = real_value(key, value);
        else if (key == "flop_lambda_doc") c.flop_lambda_doc = real_value(key, value);
        else if (key == "mask_rate") c.mask_rate = real_value(key, value);
        else if (key == "seed") c.seed = count_value(key, value);
        else if (key == "max_query_len") c.max_query_len = count_value(key, value);
        else if (key == "max_doc_len") c.max_doc_len = count_value(key, value);
        else if (key == "max_steps") c.max_steps = count_value(key, value);
        else if (key == "warmup_ratio") c.warmup_ratio = real_value(key, value);
        else if (key == "kl_temperature") c.kl_temperature = real_value(key, value);
        else if (key == "mask_corruption") c.mask_corruption = parse_corruption(value);
        else if (key == "checkpoint_every") c.checkpoint_every = count_value(key, value);
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv) { return from_key_values(kv, TrainConfig{}); }

std::uint64_t TrainConfig::hash() const { return fnv1a64(key_values_text(to_key_values())); }

}  // namespace lion
