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


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "lion/errors.hpp"
#include "lion/index.hpp"

using namespace lion;

namespace {

using SparseDocs = std::vector<std::pair<std::string, SparseVector>>;

// Weights are float-representable so quantization at index time is lossless.
SparseVector random_sparse(std::mt19937_64& rng, std::size_t vocab, std::size_t max_terms) {
    std::vector<SparseEntry> entries;
    const std::size_t n = rng() % (max_terms + 1);
    std::vector<TokenId> terms;
    for (std::size_t i = 0; i < n; ++i) terms.push_back(static_cast<TokenId>(rng() % vocab));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    std::uniform_real_distribution<float> w(0.01f, 3.0f);
    for (const auto t : terms) entries.push_back({t, static_cast<double>(w(rng))});
    return SparseVector(std::move(entries));
}

SparseDocs random_corpus(std::mt19937_64& rng, std::size_t docs, std::size_t vocab, std::size_t max_terms) {
    SparseDocs out;
    for (std::size_t i = 0; i < docs; ++i) out.emplace_back("d" + std::to_string(i), random_sparse(rng, vocab, max_terms));
    return out;
}

// Scores every document by expanded dot product and sorts with the shared tie-break.
RankedList brute_force(const SparseDocs& docs, const SparseVector& q, std::size_t vocab, std::size_t k) {
    const auto qe = q.expand(vocab);
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [id, v] : docs) {
        const auto de = v.expand(vocab);
        double s = 0.0;
        bool overlap = false;
        for (std::size_t t = 0; t < vocab; ++t) {
            if (qe[t] != 0.0 && de[t] != 0.0) {
                overlap = true;
                s += qe[t] * de[t];
            }
        }
        if (overlap) scored.emplace_back(id, s);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    RankedList out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back({scored[i].first, scored[i].second});
    return out;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lion_index_" + name);
}

}  // namespace

TEST(InvertedIndex, SharedTermPostingsAscending) {
    SparseDocs docs{{"b", SparseVector({{5, 1.0}})}, {"a", SparseVector({{5, 2.0}, {7, 1.0}})}};
    const auto index = InvertedIndex::build(docs);
    ASSERT_EQ(index.terms().size(), 2u);
    const auto& p5 = index.terms()[0];
    EXPECT_EQ(p5.term, 5u);
    ASSERT_EQ(p5.postings.size(), 2u);
    EXPECT_EQ(index.doc_ids()[p5.postings[0].doc], "a");
    EXPECT_EQ(index.doc_ids()[p5.postings[1].doc], "b");
}

TEST(InvertedIndex, EmptyDocumentCountsButHasNoPostings) {
    const auto index = InvertedIndex::build({{"a", SparseVector()}, {"b", SparseVector({{1, 1.0}})}});
    const auto s = index.stats();
    EXPECT_EQ(s.docs, 2u);
    EXPECT_EQ(s.postings, 1u);
    EXPECT_EQ(s.terms, 1u);
}

TEST(InvertedIndex, DuplicateDocIdRejected) {
    EXPECT_THROW(InvertedIndex::build({{"a", SparseVector()}, {"a", SparseVector()}}), InputError);
}

TEST(InvertedIndex, ReconstructionRoundTrip) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto docs = random_corpus(rng, 200, 300, 20);
        const auto index = InvertedIndex::build(docs, 1 + trial % 4);
        for (const auto& [id, v] : docs) EXPECT_EQ(index.document(id), v);
    }
}

TEST(InvertedIndex, BuildIndependentOfThreadsAndOrder) {
    std::mt19937_64 rng(8);
    auto docs = random_corpus(rng, 500, 200, 12);
    const auto serial = InvertedIndex::build(docs, 1);
    std::shuffle(docs.begin(), docs.end(), rng);
    const auto parallel = InvertedIndex::build(docs, 4);
    EXPECT_EQ(serial.doc_ids(), parallel.doc_ids());
    ASSERT_EQ(serial.terms().size(), parallel.terms().size());
    for (std::size_t t = 0; t < serial.terms().size(); ++t) {
        const auto& a = serial.terms()[t];
        const auto& b = parallel.terms()[t];
        ASSERT_EQ(a.term, b.term);
        ASSERT_EQ(a.postings.size(), b.postings.size());
        for (std::size_t i = 0; i < a.postings.size(); ++i) {
            EXPECT_EQ(a.postings[i].doc, b.postings[i].doc);
            EXPECT_EQ(a.postings[i].weight, b.postings[i].weight);
        }
    }
    EXPECT_EQ(serial.stats(), parallel.stats());
}

TEST(SearchSparse, HandScores) {
    const auto index = InvertedIndex::build({{"d1", SparseVector({{1, 2.0}})}, {"d2", SparseVector({{1, 3.0}})}});
    const auto result = index.search(SparseVector({{1, 1.0}}), 2);
    EXPECT_EQ(result, (RankedList{{"d2", 3.0}, {"d1", 2.0}}));
}

TEST(SearchSparse, DisjointAndEmptyQueries) {
    const auto index = InvertedIndex::build({{"d1", SparseVector({{1, 2.0}})}});
    EXPECT_TRUE(index.search(SparseVector({{4, 1.0}}), 5).empty());
    EXPECT_TRUE(index.search(SparseVector(), 5).empty());
    EXPECT_THROW(index.search(SparseVector({{1, 1.0}}), 0), ContractError);
}

TEST(SearchSparse, TiesBrokenByDocId) {
    const auto index = InvertedIndex::build(
        {{"c", SparseVector({{1, 1.0}})}, {"a", SparseVector({{1, 1.0}})}, {"b", SparseVector({{1, 1.0}})}});
    const auto result = index.search(SparseVector({{1, 2.0}}), 2);
    EXPECT_EQ(result, (RankedList{{"a", 2.0}, {"b", 2.0}}));
}

TEST(SearchSparse, MatchesBruteForceOn1000Docs) {
    std::mt19937_64 rng(21);
    const std::size_t vocab = 400;
    const auto docs = random_corpus(rng, 1000, vocab, 25);
    const auto index = InvertedIndex::build(docs, 2);
    for (int q = 0; q < 50; ++q) {
        const auto query = random_sparse(rng, vocab, 8);
        const std::size_t k = 1 + rng() % 30;
        const auto got = index.search(query, k);
        EXPECT_EQ(index.exhaustive_search(query, k), got);
        const auto want = brute_force(docs, query, vocab, k);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].doc_id, want[i].doc_id);
            EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
        }
    }
}

TEST(SearchSparse, SerializationRoundTrip) {
    std::mt19937_64 rng(4);
    const auto docs = random_corpus(rng, 300, 500, 15);
    auto index = InvertedIndex::build(docs);
    index.vocab_fingerprint = 0x1234abcdULL;
    const auto path = temp_path("sparse.idx");
    index.save(path);
    const auto loaded = InvertedIndex::load(path);
    EXPECT_EQ(loaded.vocab_fingerprint, index.vocab_fingerprint);
    EXPECT_EQ(loaded.stats(), index.stats());
    EXPECT_EQ(peek_index_kind(path), IndexKind::kSparse);
    for (const auto& [id, v] : docs) EXPECT_EQ(loaded.document(id), v);
    EXPECT_THROW(DenseStore::load(path), InputError);
    std::filesystem::remove(path);
}

TEST(IndexStats, Counts) {
    EXPECT_EQ(InvertedIndex().stats(), IndexStats{});
    const auto index = InvertedIndex::build({{"a", SparseVector({{1, 1.0}, {2, 1.0}})},
                                             {"b", SparseVector({{2, 1.0}, {3, 1.0}})},
                                             {"c", SparseVector({{1, 1.0}, {3, 1.0}})}});
    const auto s = index.stats();
    EXPECT_EQ(s.postings, 6u);
    EXPECT_EQ(s.mean_nonzeros, 2.0);
    EXPECT_EQ(s.terms, 3u);
}

TEST(DenseStore, HandDotProducts) {
    const auto store = DenseStore::build({{"d1", {1.0, 0.0}}, {"d2", {0.0, 1.0}}});
    const std::vector<double> q{2.0, 1.0};
    EXPECT_EQ(store.search(q, 1), (RankedList{{"d1", 2.0}}));
}

TEST(DenseStore, ZeroQueryOrdersByDocIdAndKClamps) {
    const auto store = DenseStore::build({{"c", {1.0, 2.0}}, {"a", {3.0, 1.0}}, {"b", {0.5, 0.5}}});
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_EQ(store.search(zero, 10), (RankedList{{"a", 0.0}, {"b", 0.0}, {"c", 0.0}}));
}

TEST(DenseStore, DimensionErrors) {
    EXPECT_THROW(DenseStore::build({{"a", {1.0}}, {"b", {1.0, 2.0}}}), ContractError);
    const auto store = DenseStore::build({{"a", {1.0, 2.0}}});
    const std::vector<double> q{1.0};
    EXPECT_THROW(store.search(q, 1), ContractError);
}

TEST(DenseStore, SerializationRoundTrip) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    std::vector<std::pair<std::string, std::vector<double>>> docs;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> v(16);
        for (auto& x : v) x = normal(rng);
        docs.emplace_back("doc" + std::to_string(i), v);
    }
    const auto store = DenseStore::build(docs);
    const auto path = temp_path("dense.idx");
    store.save(path);
    const auto loaded = DenseStore::load(path);
    EXPECT_EQ(peek_index_kind(path), IndexKind::kDense);
    std::vector<double> q(16);
    for (auto& x : q) x = normal(rng);
    EXPECT_EQ(loaded.search(q, 50), store.search(q, 50));
    std::filesystem::remove(path);
}
