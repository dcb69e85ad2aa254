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

#include "lion/encoder.hpp"

#include <cmath>
#include <random>

#include "lion/errors.hpp"
#include "lion/ops.hpp"

namespace lion {

std::string to_string(AttentionMode mode) { return mode == AttentionMode::kCausal ? "causal" : "bidirectional"; }

AttentionMode parse_attention_mode(const std::string& text) {
    if (text == "causal") return AttentionMode::kCausal;
    if (text == "bidirectional") return AttentionMode::kBidirectional;
    throw ConfigError("unknown attention mode '" + text + "' (expected causal or bidirectional)");
}

void EncoderConfig::validate() const {
    if (dim == 0) throw ConfigError("encoder dim must be >= 1");
    if (heads == 0 || dim % heads != 0) throw ConfigError("encoder dim must be divisible by heads");
    if (max_len == 0) throw ConfigError("encoder max_len must be >= 1");
    if (vocab_size <= Vocabulary::kReserved) throw ConfigError("encoder vocab_size must exceed the reserved tokens");
    if (!(init_std > 0)) throw ConfigError("encoder init_std must be positive");
}

std::string EncoderConfig::size_label() const { return "d" + std::to_string(dim) + "l" + std::to_string(layers); }

TokenSequence TokenSequence::from_ids(std::vector<TokenId> ids, std::size_t max_len, std::size_t pad_to) {
    if (ids.size() > max_len) ids.resize(max_len);
    TokenSequence seq;
    seq.real.assign(ids.size(), true);
    seq.ids = std::move(ids);
    while (seq.ids.size() < pad_to) {
        seq.ids.push_back(Vocabulary::kPad);
        seq.real.push_back(false);
    }
    seq.validate();
    return seq;
}

std::size_t TokenSequence::real_count() const {
    std::size_t n = 0;
    for (const bool r : real) n += r ? 1 : 0;
    return n;
}

std::vector<std::size_t> TokenSequence::real_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < real.size(); ++i) {
        if (real[i]) out.push_back(i);
    }
    return out;
}

void TokenSequence::validate() const {
    if (ids.size() != real.size()) throw ContractError("token sequence: mask length differs from id count");
    if (real_count() == 0) throw InputError("token sequence has no real tokens");
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!real[i] && ids[i] != Vocabulary::kPad) throw ContractError("token sequence: padding position without PAD id");
    }
}

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    MatrixX<double> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return Tensor::matrix(std::move(m), true);
}

Tensor ones_vector(std::size_t n) { return Tensor::vector(std::vector<double>(n, 1.0), true); }

Tensor clone(const Tensor& t) { return t.detach().set_requires_grad(t.requires_grad()); }

}  // namespace

EncoderModel::EncoderModel(EncoderConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(seed);
    const std::size_t d = config_.dim;
    const double s = config_.init_std;
    embedding_ = random_matrix(d, config_.vocab_size, s, rng);
    positions_ = random_matrix(d, config_.max_len, s, rng);
    final_norm_ = ones_vector(d);
    const double out_s = s / std::sqrt(2.0 * static_cast<double>(std::max<std::size_t>(1, config_.layers)));
    for (std::size_t l = 0; l < config_.layers; ++l) {
        Layer layer;
        layer.attn_norm = ones_vector(d);
        layer.wq = random_matrix(d, d, s, rng);
        layer.wk = random_matrix(d, d, s, rng);
        layer.wv = random_matrix(d, d, s, rng);
        layer.wo = random_matrix(d, d, out_s, rng);
        layer.ffn_norm = ones_vector(d);
        layer.w_in = random_matrix(4 * d, d, s, rng);
        layer.w_out = random_matrix(d, 4 * d, out_s, rng);
        layers_.push_back(std::move(layer));
    }
}

EncoderModel::EncoderModel(const EncoderModel& other)
    : config_(other.config_),
      embedding_(clone(other.embedding_)),
      positions_(clone(other.positions_)),
      final_norm_(clone(other.final_norm_)) {
    for (const auto& l : other.layers_) {
        layers_.push_back(Layer{clone(l.attn_norm), clone(l.wq), clone(l.wk), clone(l.wv), clone(l.wo),
                                clone(l.ffn_norm), clone(l.w_in), clone(l.w_out)});
    }
}

EncoderModel& EncoderModel::operator=(const EncoderModel& other) {
    if (this != &other) *this = EncoderModel(other);
    return *this;
}

std::vector<NamedTensor> EncoderModel::parameters() const {
    std::vector<NamedTensor> out{{"embedding", embedding_}, {"position", positions_}};
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const std::string p = "layers." + std::to_string(l) + ".";
        const auto& layer = layers_[l];
        out.push_back({p + "attn_norm", layer.attn_norm});
        out.push_back({p + "wq", layer.wq});
        out.push_back({p + "wk", layer.wk});
        out.push_back({p + "wv", layer.wv});
        out.push_back({p + "wo", layer.wo});
        out.push_back({p + "ffn_norm", layer.ffn_norm});
        out.push_back({p + "w_in", layer.w_in});
        out.push_back({p + "w_out", layer.w_out});
    }
    out.push_back({"final_norm", final_norm_});
    return out;
}

std::size_t EncoderModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.tensor.numel();
    return n;
}

bool EncoderModel::all_finite() const {
    for (const auto& p : parameters()) {
        if (!p.tensor.value().allFinite()) return false;
    }
    return true;
}

Tensor EncoderModel::attention(const Layer& layer, const Tensor& x) const {
    const std::size_t head_dim = config_.dim / config_.heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const bool causal = config_.attention == AttentionMode::kCausal;
    const Tensor q = matmul(layer.wq, x);
    const Tensor k = matmul(layer.wk, x);
    const Tensor v = matmul(layer.wv, x);
    std::vector<Tensor> heads;
    heads.reserve(config_.heads);
    for (std::size_t h = 0; h < config_.heads; ++h) {
        const Tensor qh = slice_rows(q, h * head_dim, head_dim);
        const Tensor kh = slice_rows(k, h * head_dim, head_dim);
        const Tensor vh = slice_rows(v, h * head_dim, head_dim);
        // scores(i, j): query position i against key position j.
        const Tensor scores = scale(matmul(transpose(qh), kh), inv_sqrt);
        const Tensor weights = softmax_rows(scores, causal);
        heads.push_back(matmul(vh, transpose(weights)));
    }
    const Tensor merged = heads.size() == 1 ? heads.front() : concat_rows(heads);
    return matmul(layer.wo, merged);
}

Tensor EncoderModel::encode(const TokenSequence& seq) const {
    seq.validate();
    if (seq.length() > config_.max_len) {
        throw InputError("sequence length " + std::to_string(seq.length()) + " exceeds max_len " +
                         std::to_string(config_.max_len));
    }
    for (const TokenId id : seq.ids) {
        if (id >= config_.vocab_size) {
            throw InputError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                             std::to_string(config_.vocab_size));
        }
    }
    // Only real positions are computed; padding columns are filled with zeros at the end.
    const std::vector<std::size_t> real = seq.real_positions();
    std::vector<std::size_t> ids;
    ids.reserve(real.size());
    for (const auto p : real) ids.push_back(seq.ids[p]);

    Tensor x = gather_columns(embedding_, ids);
    if (!layers_.empty()) {
        x = x + gather_columns(positions_, real);
        for (const auto& layer : layers_) {
            x = x + attention(layer, rms_norm_columns(x, layer.attn_norm));
            const Tensor h = rms_norm_columns(x, layer.ffn_norm);
            x = x + matmul(layer.w_out, relu(matmul(layer.w_in, h)));
        }
        x = rms_norm_columns(x, final_norm_);
    }
    if (real.size() == seq.length()) return x;
    return scatter_columns(x, real, seq.length());
}

}  // namespace lion
