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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lion/mntp.hpp"
#include "lion/representation.hpp"

namespace lion {

// Flat `key = value` text, `#` starts a comment. Keys are unique.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
std::string key_values_text(const KeyValues& kv);

enum class Objective { kCl, kKdMarginMse, kClPlusKd, kMntp };

std::string to_string(Objective o);
Objective parse_objective(const std::string& text);
bool needs_teacher(Objective o);

struct TrainConfig {
    Objective objective = Objective::kCl;
    Paradigm paradigm = Paradigm::kSparse;
    std::size_t epochs = 1;
    std::size_t batch_size = 8;
    std::size_t grad_accum_steps = 1;
    std::size_t num_negatives = 1;
    double learning_rate = 1e-4;
    double flop_lambda_query = 0.05;
    double flop_lambda_doc = 0.04;
    double mask_rate = 0.2;
    std::uint64_t seed = 0;
    std::size_t max_query_len = 64;
    std::size_t max_doc_len = 128;

    // 0 = no cap beyond epochs.
    std::size_t max_steps = 0;
    double warmup_ratio = 0.04;
    double kl_temperature = 1.0;
    MaskCorruption mask_corruption = MaskCorruption::kMaskOnly;
    // Periodic checkpoint interval in optimizer steps; 0 = final only.
    std::size_t checkpoint_every = 0;

    // Throws ConfigError naming the offending key.
    void validate() const;

    KeyValues to_key_values() const;
    // Reads the keys it knows and leaves the rest alone; validates the result.
    static TrainConfig from_key_values(const KeyValues& kv);
    static TrainConfig from_key_values(const KeyValues& kv, TrainConfig defaults);
    static const std::vector<std::string>& keys();

    // Stable hash of the canonical key/value text.
    std::uint64_t hash() const;
};

}  // namespace lion
