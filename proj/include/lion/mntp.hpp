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

// Masked next-token prediction: a masked token at position i is predicted
// from the contextual vector at position i - 1, through the tied embedding table.

#include <cstdint>
#include <span>
#include <vector>

#include "lion/encoder.hpp"

namespace lion {

// max(1, round(rate * real_count)) distinct real positions, never position 0,
// drawn uniformly and returned in ascending order. The count is capped by the
// number of eligible positions.
std::vector<std::size_t> select_mask_positions(const TokenSequence& seq, double rate, std::uint64_t seed);

enum class MaskCorruption {
    kMaskOnly,  // every selected position becomes [MASK]
    kBert,      // 80% [MASK], 10% random token, 10% unchanged
};

struct MaskedExample {
    TokenSequence input;                 // corrupted sequence fed to the encoder
    std::vector<std::size_t> positions;  // ascending
    std::vector<TokenId> targets;        // original ids at `positions`
};

MaskedExample apply_mask(const TokenSequence& seq, const std::vector<std::size_t>& positions, std::size_t vocab_size,
                         MaskCorruption corruption = MaskCorruption::kMaskOnly, std::uint64_t seed = 0);

// Mean cross-entropy over the masked positions of one sequence.
Tensor mntp_loss(const EncoderModel& model, const TokenSequence& seq, const std::vector<std::size_t>& masked_positions);

// Mean cross-entropy over every masked token of the batch (not per sequence).
Tensor mntp_loss(const EncoderModel& model, std::span<const MaskedExample> batch);

}  // namespace lion
