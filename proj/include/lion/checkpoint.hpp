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

// Self-describing binary container for a trained encoder: encoder config,
// vocabulary tokens, named parameter tensors, optimizer moments, step counter
// and the hash plus text of the training config. Doubles are stored bit-exact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lion/encoder.hpp"
#include "lion/optimizer.hpp"
#include "lion/representation.hpp"
#include "lion/vocabulary.hpp"

namespace lion {

struct StoredTensor {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> data;  // row-major

    friend bool operator==(const StoredTensor&, const StoredTensor&) = default;
};

struct Checkpoint {
    EncoderConfig encoder;
    std::vector<std::string> vocabulary;
    std::optional<Paradigm> paradigm;  // unset after pretraining
    std::vector<StoredTensor> parameters;
    std::vector<StoredTensor> adam_m;
    std::vector<StoredTensor> adam_v;
    std::uint64_t adam_steps = 0;
    std::uint64_t step = 0;
    std::uint64_t config_hash = 0;
    std::string config_text;

    static Checkpoint capture(const EncoderModel& model, const Vocabulary& vocab, std::optional<Paradigm> paradigm,
                              const Adam* optimizer = nullptr);

    // Rebuilds the encoder with these exact parameter values.
    EncoderModel model() const;
    Vocabulary vocab() const;
    // Loads the stored moments into an optimizer bound to `model`'s parameters.
    void restore_optimizer(Adam& optimizer) const;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Atomic: a failed write leaves any previous file at `path` untouched.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lion
