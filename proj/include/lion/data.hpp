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

// Corpora, training pairs and deterministic batch sampling.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lion/encoder.hpp"
#include "lion/evaluation.hpp"
#include "lion/objectives.hpp"
#include "lion/vocabulary.hpp"

namespace lion {

struct CorpusRecord {
    std::string id;
    std::string text;
    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

// JSON lines with "id" and "text" fields; a line that does not start with '{'
// is read as `id <TAB> text`. Ids must be unique and texts non-empty.
std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);

// `query_id <TAB> doc_id [doc_id ...]`; repeated query lines extend the pool.
using NegativePools = std::map<std::string, std::vector<std::string>>;
NegativePools read_negatives(const std::filesystem::path& path);
void write_negatives(const std::filesystem::path& path, const NegativePools& pools);

// Records with their token ids, addressable by position or id.
class EncodedTexts {
 public:
    EncodedTexts() = default;
    EncodedTexts(const std::vector<CorpusRecord>& records, const Vocabulary& vocab);

    std::size_t size() const { return ids_.size(); }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::string& text(std::size_t i) const { return texts_[i]; }
    const std::vector<TokenId>& tokens(std::size_t i) const { return tokens_[i]; }
    TokenSequence sequence(std::size_t i, std::size_t max_len) const {
        return TokenSequence::from_ids(tokens_[i], max_len);
    }
    // Throws InputError for unknown ids.
    std::size_t index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return lookup_.count(id) != 0; }

 private:
    std::vector<std::string> ids_;
    std::vector<std::string> texts_;
    std::vector<std::vector<TokenId>> tokens_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

// One (query, relevant document) pair. Positions refer to the owning TrainingSet.
struct TrainingPair {
    std::size_t query;
    std::size_t positive;
    std::vector<std::size_t> negative_pool;  // empty: draw uniformly from the corpus
    std::vector<std::size_t> relevant;       // every document judged relevant for the query, sorted
};

struct TrainingGroup {
    std::size_t query;
    std::size_t positive;
    std::vector<std::size_t> negatives;
    // Teacher scores for [positive, negatives...] when a teacher is attached.
    std::vector<double> teacher_scores;
};

class TrainingSet {
 public:
    // Documents only, for MNTP pretraining.
    TrainingSet(Vocabulary vocab, const std::vector<CorpusRecord>& docs);
    // One pair per (query, doc) judgment with grade >= 1 for queries present in
    // `queries`; judgments for other queries are ignored.
    TrainingSet(Vocabulary vocab, const std::vector<CorpusRecord>& docs, const std::vector<CorpusRecord>& queries,
                const Qrels& qrels, const NegativePools* negatives = nullptr,
                std::shared_ptr<const TeacherSource> teacher = nullptr);

    const Vocabulary& vocab() const { return vocab_; }
    const EncodedTexts& docs() const { return docs_; }
    const EncodedTexts& queries() const { return queries_; }
    const std::vector<TrainingPair>& pairs() const { return pairs_; }
    const TeacherSource* teacher() const { return teacher_.get(); }

    // Picks `num_negatives` distinct negatives for one pair: from its pool when it
    // has one, otherwise uniformly from documents not judged relevant.
    TrainingGroup sample_group(std::size_t pair, std::size_t num_negatives, std::uint64_t seed) const;

 private:
    Vocabulary vocab_;
    EncodedTexts docs_;
    EncodedTexts queries_;
    std::vector<TrainingPair> pairs_;
    std::shared_ptr<const TeacherSource> teacher_;
};

// Item order for training: a fresh permutation per epoch; every optimizer step
// consumes grad_accum_steps consecutive micro-batches, and the tail of an epoch
// that cannot fill a whole step is skipped.
class BatchSampler {
 public:
    struct MicroBatch {
        std::size_t epoch;
        std::size_t first_position;  // position of items[0] within the epoch order
        std::vector<std::size_t> items;
    };

    BatchSampler(std::size_t items, std::size_t batch_size, std::size_t grad_accum_steps, std::uint64_t seed);

    std::size_t steps_per_epoch() const { return steps_per_epoch_; }
    // Micro-batch `micro` of global optimizer step `step` (both 0-based).
    MicroBatch micro_batch(std::size_t step, std::size_t micro);

 private:
    std::size_t items_;
    std::size_t batch_size_;
    std::size_t accum_;
    std::uint64_t seed_;
    std::size_t steps_per_epoch_;
    std::size_t cached_epoch_ = static_cast<std::size_t>(-1);
    std::vector<std::size_t> order_;
};

// Negatives for each item come from a seed tied to (epoch, position), so the
// same pair gets the same negatives however the epoch is cut into batches.
std::vector<TrainingGroup> sample_training_batch(const TrainingSet& data, const BatchSampler::MicroBatch& micro,
                                                 std::size_t num_negatives, std::uint64_t seed);

// For every judged query, the relevant documents of all other queries. Used as
// negatives so each training document is seen both as a positive and as a
// negative; uniform corpus negatives let a model rank by "was a training positive".
NegativePools positives_of_other_queries(const Qrels& qrels);

// Vocabulary over the texts of `records`, capped at `max_terms` non-reserved tokens.
Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records, std::size_t max_terms);

// Lexical-overlap teacher over the given texts.
std::shared_ptr<const TeacherSource> make_oracle_teacher(const std::vector<CorpusRecord>& queries,
                                                         const std::vector<CorpusRecord>& docs, double scale = 10.0);

// Deterministic index permutation (Fisher-Yates over splitmix64 draws).
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lion
