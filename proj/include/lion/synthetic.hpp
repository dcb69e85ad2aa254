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

// Planted-relevance synthetic data: documents are random token strings,
// each query is a subset of the tokens of one source document, and that
// document is the query's only relevant one (grade 1).

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lion/data.hpp"
#include "lion/evaluation.hpp"

namespace lion {

struct SyntheticSpec {
    std::size_t vocab_size = 200;
    std::size_t doc_count = 1000;
    std::size_t doc_length = 16;
    std::size_t query_length = 4;
    std::size_t train_queries = 200;
    std::size_t test_queries = 50;
    // Probability that a token is the fixed successor of the previous one
    // instead of a uniform draw. 0 gives i.i.d. tokens.
    double successor_prob = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    std::vector<CorpusRecord> docs;
    std::vector<CorpusRecord> train_queries;
    std::vector<CorpusRecord> test_queries;
    Qrels train_qrels;
    Qrels test_qrels;
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

// corpus.jsonl, train_queries.jsonl, train_qrels.txt, test_queries.jsonl, test_qrels.txt
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data);

}  // namespace lion
