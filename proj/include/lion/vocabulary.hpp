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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lion {

using TokenId = std::uint32_t;

// Lowercased tokens split on every ASCII character that is not a letter or digit.
std::vector<std::string> tokenize(std::string_view text);

// Token <-> id mapping. Ids 0..2 are the reserved PAD, MASK and UNK entries;
// the remaining ids are ordered by corpus frequency (descending), then token.
class Vocabulary {
 public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kMask = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr std::size_t kReserved = 3;
    static constexpr std::string_view kPadToken = "[PAD]";
    static constexpr std::string_view kMaskToken = "[MASK]";
    static constexpr std::string_view kUnkToken = "[UNK]";

    // Keeps the max_terms most frequent tokens of `texts`.
    static Vocabulary build(std::span<const std::string> texts, std::size_t max_terms);
    // Full token list, reserved entries first.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    static Vocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return tokens_.size(); }
    TokenId id(std::string_view token) const;
    const std::string& token(TokenId id) const;
    bool contains(std::string_view token) const { return ids_.find(std::string(token)) != ids_.end(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<TokenId> encode(std::string_view text) const;

    // Order-sensitive hash of the token list; checkpoints and indexes built
    // from different vocabularies never share a fingerprint in practice.
    std::uint64_t fingerprint() const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
    explicit Vocabulary(std::vector<std::string> tokens);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace lion
