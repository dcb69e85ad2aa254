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
#include <string>
#include <vector>

#include "lion/tensor.hpp"
#include "lion/vocabulary.hpp"

namespace lion {

enum class AttentionMode { kCausal, kBidirectional };

std::string to_string(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& text);

struct EncoderConfig {
    std::size_t dim = 32;
    std::size_t layers = 2;
    std::size_t heads = 2;
    std::size_t vocab_size = 0;
    std::size_t max_len = 128;
    AttentionMode attention = AttentionMode::kBidirectional;
    double init_std = 0.02;

    // Throws ConfigError on a broken invariant.
    void validate() const;
    // Short size label used in run tags, e.g. "d32l2".
    std::string size_label() const;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Token ids plus a per-position flag (true = real token). Padding positions hold PAD.
struct TokenSequence {
    std::vector<TokenId> ids;
    std::vector<bool> real;

    // Truncates to max_len, then right-pads with PAD up to pad_to (if larger).
    static TokenSequence from_ids(std::vector<TokenId> ids, std::size_t max_len, std::size_t pad_to = 0);

    std::size_t length() const { return ids.size(); }
    std::size_t real_count() const;
    std::vector<std::size_t> real_positions() const;
    void validate() const;
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Small pre-norm transformer encoder. Column j of every activation matrix is
// position j; the embedding table E (D x V) doubles as the output projection.
class EncoderModel {
 public:
    EncoderModel(EncoderConfig config, std::uint64_t seed);

    // Copies are deep: parameter values are duplicated, not shared.
    EncoderModel(const EncoderModel& other);
    EncoderModel& operator=(const EncoderModel& other);
    EncoderModel(EncoderModel&&) noexcept = default;
    EncoderModel& operator=(EncoderModel&&) noexcept = default;

    const EncoderConfig& config() const { return config_; }
    void set_attention_mode(AttentionMode mode) { config_.attention = mode; }

    const Tensor& embedding() const { return embedding_; }
    Tensor& embedding() { return embedding_; }

    // Stable order; handles alias the model's own parameters.
    std::vector<NamedTensor> parameters() const;
    std::size_t parameter_count() const;

    // H_T: D x L contextual encoding. Padding columns are zero and never
    // influence real columns. With zero layers H_T is the raw embedding columns.
    Tensor encode(const TokenSequence& seq) const;

    bool all_finite() const;

 private:
    struct Layer {
        Tensor attn_norm, wq, wk, wv, wo, ffn_norm, w_in, w_out;
    };

    Tensor attention(const Layer& layer, const Tensor& x) const;

    EncoderConfig config_;
    Tensor embedding_;
    Tensor positions_;
    Tensor final_norm_;
    std::vector<Layer> layers_;
};

inline Tensor encode_sequence(const EncoderModel& model, const TokenSequence& seq) { return model.encode(seq); }

}  // namespace lion
