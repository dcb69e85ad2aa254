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

#include "lion/mntp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lion/errors.hpp"
#include "lion/ops.hpp"

namespace lion {

std::vector<std::size_t> select_mask_positions(const TokenSequence& seq, double rate, std::uint64_t seed) {
    if (!(rate > 0.0 && rate < 1.0)) throw ContractError("mask rate must lie in (0, 1)");
    seq.validate();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i < seq.length(); ++i) {
        if (seq.real[i]) candidates.push_back(i);
    }
    if (candidates.empty()) throw InputError("sequence has no maskable position (only one real token)");
    const auto wanted = static_cast<std::size_t>(std::llround(rate * static_cast<double>(seq.real_count())));
    const std::size_t count = std::min(std::max<std::size_t>(1, wanted), candidates.size());

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

MaskedExample apply_mask(const TokenSequence& seq, const std::vector<std::size_t>& positions, std::size_t vocab_size,
                         MaskCorruption corruption, std::uint64_t seed) {
    MaskedExample out;
    out.input = seq;
    out.positions = positions;
    std::sort(out.positions.begin(), out.positions.end());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<TokenId> any_token(static_cast<TokenId>(Vocabulary::kReserved),
                                                     static_cast<TokenId>(vocab_size - 1));
    for (const auto p : out.positions) {
        if (p == 0) throw ContractError("position 0 cannot be masked: it has no previous position");
        if (p >= seq.length() || !seq.real[p]) throw ContractError("masked position must be a real token");
        out.targets.push_back(seq.ids[p]);
        TokenId replacement = Vocabulary::kMask;
        if (corruption == MaskCorruption::kBert) {
            const double u = coin(rng);
            if (u >= 0.9) {
                replacement = seq.ids[p];
            } else if (u >= 0.8) {
                replacement = any_token(rng);
            }
        }
        out.input.ids[p] = replacement;
    }
    return out;
}

namespace {

// Summed (not averaged) cross-entropy of one masked example.
Tensor masked_example_loss(const EncoderModel& model, const MaskedExample& ex) {
    if (ex.positions.empty()) throw ContractError("mntp loss needs at least one masked position");
    if (model.config().attention != AttentionMode::kBidirectional) {
        throw ContractError("mntp loss expects a bidirectional encoder");
    }
    std::vector<std::size_t> sources;
    for (const auto p : ex.positions) {
        if (p == 0) throw ContractError("position 0 cannot be masked: it has no previous position");
        if (!ex.input.real[p - 1]) throw ContractError("position before a masked token must be real");
        sources.push_back(p - 1);
    }
    const Tensor h = model.encode(ex.input);
    const Tensor logits = matmul(transpose(model.embedding()), gather_columns(h, sources));
    return scale(cross_entropy_columns(logits, std::vector<std::size_t>(ex.targets.begin(), ex.targets.end())),
                 static_cast<double>(ex.positions.size()));
}

}  // namespace

Tensor mntp_loss(const EncoderModel& model, const TokenSequence& seq, const std::vector<std::size_t>& masked_positions) {
    if (masked_positions.empty()) throw ContractError("mntp loss needs at least one masked position");
    const MaskedExample ex = apply_mask(seq, masked_positions, model.config().vocab_size);
    return mntp_loss(model, std::span<const MaskedExample>(&ex, 1));
}

Tensor mntp_loss(const EncoderModel& model, std::span<const MaskedExample> batch) {
    if (batch.empty()) throw ContractError("mntp loss on an empty batch");
    std::size_t total = 0;
    std::vector<Tensor> parts;
    for (const auto& ex : batch) {
        parts.push_back(masked_example_loss(model, ex));
        total += ex.positions.size();
    }
    Tensor sum_loss = parts.size() == 1 ? parts.front() : sum(stack(parts));
    return scale(sum_loss, 1.0 / static_cast<double>(total));
}

}  // namespace lion
