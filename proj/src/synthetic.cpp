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

#include <random>

#include "lion/errors.hpp"
#include "lion/hash.hpp"
#include "lion/synthetic.hpp"

namespace lion {

void SyntheticSpec::validate() const {
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (doc_count < 1) throw ConfigError("doc_count must be >= 1");
    if (doc_length < 1) throw ConfigError("doc_length must be >= 1");
    if (query_length < 1 || query_length > doc_length) throw ConfigError("query_length must lie in [1, doc_length]");
    if (train_queries + test_queries > doc_count) {
        throw ConfigError("train_queries + test_queries must not exceed doc_count (one source document each)");
    }
    if (!(successor_prob >= 0.0 && successor_prob <= 1.0)) throw ConfigError("successor_prob must lie in [0, 1]");
}

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto word = [](std::size_t t) { return "t" + std::to_string(t); };
    const auto successor = seeded_permutation(spec.vocab_size, derive_seed(spec.seed, "successor"));
    std::mt19937_64 rng(derive_seed(spec.seed, "documents"));
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    SyntheticData data;
    std::vector<std::vector<std::size_t>> doc_tokens;
    for (std::size_t d = 0; d < spec.doc_count; ++d) {
        std::vector<std::size_t> tokens;
        std::string text;
        for (std::size_t i = 0; i < spec.doc_length; ++i) {
            std::size_t t = static_cast<std::size_t>(rng() % spec.vocab_size);
            if (i > 0 && coin(rng) < spec.successor_prob) t = successor[tokens.back()];
            tokens.push_back(t);
            text += (i ? " " : "") + word(t);
        }
        data.docs.push_back({"d" + std::to_string(d), text});
        doc_tokens.push_back(std::move(tokens));
    }

    const auto sources = seeded_permutation(spec.doc_count, derive_seed(spec.seed, "sources"));
    std::mt19937_64 qrng(derive_seed(spec.seed, "queries"));
    for (std::size_t q = 0; q < spec.train_queries + spec.test_queries; ++q) {
        const std::size_t src = sources[q];
        auto positions = seeded_permutation(spec.doc_length, qrng());
        positions.resize(spec.query_length);
        std::string text;
        for (std::size_t i = 0; i < positions.size(); ++i) text += (i ? " " : "") + word(doc_tokens[src][positions[i]]);
        const bool train = q < spec.train_queries;
        const std::string id = (train ? "train" : "test") + std::to_string(train ? q : q - spec.train_queries);
        (train ? data.train_queries : data.test_queries).push_back({id, text});
        (train ? data.train_qrels : data.test_qrels).add(id, data.docs[src].id, 1);
    }
    return data;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
    std::filesystem::create_directories(dir);
    write_corpus(dir / "corpus.jsonl", data.docs);
    write_corpus(dir / "train_queries.jsonl", data.train_queries);
    write_qrels(dir / "train_qrels.txt", data.train_qrels);
    write_corpus(dir / "test_queries.jsonl", data.test_queries);
    write_qrels(dir / "test_qrels.txt", data.test_qrels);
}

}  // namespace lion
