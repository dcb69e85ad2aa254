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

#include "lion/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "lion/errors.hpp"
#include "lion/hash.hpp"
#include "lion/io.hpp"

namespace lion {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    for (const char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (u >= 0x80 || std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    ids_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
            throw InputError("vocabulary: duplicate token '" + tokens_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t max_terms) {
    std::map<std::string, std::size_t> counts;
    for (const auto& text : texts) {
        for (auto& tok : tokenize(text)) ++counts[tok];
    }
    if (counts.empty()) throw InputError("vocabulary: corpus contains no tokens");

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    // counts is already lexicographic, so a stable sort by count gives the tie order.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens{std::string(kPadToken), std::string(kMaskToken), std::string(kUnkToken)};
    for (std::size_t i = 0; i < ranked.size() && i < max_terms; ++i) {
        if (ranked[i].first == kPadToken || ranked[i].first == kMaskToken || ranked[i].first == kUnkToken) continue;
        tokens.push_back(std::move(ranked[i].first));
    }
    return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.size() < kReserved || tokens[kPad] != kPadToken || tokens[kMask] != kMaskToken ||
        tokens[kUnk] != kUnkToken) {
        throw InputError("vocabulary: reserved tokens [PAD] [MASK] [UNK] must occupy ids 0, 1, 2");
    }
    return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open vocabulary file " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& t : tokens_) out << t << '\n';
    });
}

TokenId Vocabulary::id(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
    if (id >= tokens_.size()) throw InputError("vocabulary: id " + std::to_string(id) + " out of range");
    return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
    std::vector<TokenId> out;
    for (const auto& tok : tokenize(text)) out.push_back(id(tok));
    return out;
}

std::uint64_t Vocabulary::fingerprint() const {
    std::uint64_t h = fnv1a64("lion-vocab");
    for (const auto& t : tokens_) {
        h = fnv1a64(t, h);
        h = fnv1a64(std::string_view("\n", 1), h);
    }
    return h;
}

}  // namespace lion
