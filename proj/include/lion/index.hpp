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

// Impact-weighted inverted index for sparse vectors and an exact dot-product
// store for dense vectors. Both are immutable once built.
//
// Documents get ordinals from the lexicographic order of their ids, so the
// layout and every tie-break are independent of ingestion order.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lion/representation.hpp"

namespace lion {

struct ScoredDoc {
    std::string doc_id;
    double score;
    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

// Descending score, ties by ascending doc id.
using RankedList = std::vector<ScoredDoc>;

struct Posting {
    std::uint32_t doc;  // ordinal
    float weight;
};

struct TermPostings {
    TokenId term;
    std::vector<Posting> postings;  // strictly ascending doc ordinal
};

struct IndexStats {
    std::size_t docs = 0;
    std::size_t terms = 0;
    std::size_t postings = 0;
    double mean_nonzeros = 0.0;
    friend bool operator==(const IndexStats&, const IndexStats&) = default;
};

class InvertedIndex {
 public:
    InvertedIndex() = default;

    // Duplicate doc ids throw InputError. `threads` > 1 shards the build; the
    // result is identical for any thread count.
    static InvertedIndex build(std::vector<std::pair<std::string, SparseVector>> docs, unsigned threads = 1);

    // Term-at-a-time top-k; documents sharing no term with `q` never appear.
    RankedList search(const SparseVector& q, std::size_t k) const;

    IndexStats stats() const;
    std::size_t doc_count() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::vector<TermPostings>& terms() const { return terms_; }
    // Stored (float-quantized) vector of one document.
    SparseVector document(const std::string& doc_id) const;
    // Every stored vector, in doc_ids() order.
    std::vector<SparseVector> documents() const;
    // Brute force over documents(); the oracle for search().
    RankedList exhaustive_search(const SparseVector& q, std::size_t k) const;

    std::uint64_t vocab_fingerprint = 0;

    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

 private:
    std::vector<std::string> doc_ids_;
    std::vector<TermPostings> terms_;  // ascending term id, never empty lists
};

class DenseStore {
 public:
    DenseStore() = default;

    // All vectors must share one dimension (ContractError otherwise) and be finite.
    static DenseStore build(std::vector<std::pair<std::string, std::vector<double>>> docs);

    // Exact top-k by dot product; dim(q) != dim() is a ContractError.
    RankedList search(std::span<const double> q, std::size_t k) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

    std::uint64_t vocab_fingerprint = 0;

    void save(const std::filesystem::path& path) const;
    static DenseStore load(const std::filesystem::path& path);

 private:
    std::vector<std::string> doc_ids_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vectors_;
};

enum class IndexKind : std::uint8_t { kSparse = 1, kDense = 2 };

// Reads only the header to tell the two file kinds apart.
IndexKind peek_index_kind(const std::filesystem::path& path);

// Top-k selection over (ordinal, score) candidates with the shared tie-break.
RankedList select_top_k(std::vector<std::pair<std::uint32_t, double>> candidates, std::size_t k,
                        const std::vector<std::string>& doc_ids);

}  // namespace lion
