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

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>

#include "lion/data.hpp"
#include "lion/errors.hpp"
#include "lion/hash.hpp"
#include "lion/io.hpp"

namespace lion {

namespace {

// Uniform draw in [0, n); the modulo bias is far below anything observable at n < 2^32.
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

}  // namespace

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[draw_index(rng, i)]);
    return order;
}

NegativePools positives_of_other_queries(const Qrels& qrels) {
    std::vector<std::pair<std::string, std::string>> positives;
    for (const auto& [q, docs] : qrels.judgments) {
        for (const auto& [d, grade] : docs) {
            if (grade >= 1) positives.emplace_back(q, d);
        }
    }
    NegativePools pools;
    for (const auto& [q, docs] : qrels.judgments) {
        auto& pool = pools[q];
        for (const auto& [other, d] : positives) {
            if (other != q && qrels.grade(q, d) == 0) pool.push_back(d);
        }
    }
    return pools;
}

Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records, std::size_t max_terms) {
    std::vector<std::string> texts;
    texts.reserve(records.size());
    for (const auto& r : records) texts.push_back(r.text);
    return Vocabulary::build(texts, max_terms);
}

std::shared_ptr<const TeacherSource> make_oracle_teacher(const std::vector<CorpusRecord>& queries,
                                                         const std::vector<CorpusRecord>& docs, double scale) {
    std::unordered_map<std::string, std::string> q;
    std::unordered_map<std::string, std::string> d;
    for (const auto& r : queries) q.emplace(r.id, r.text);
    for (const auto& r : docs) d.emplace(r.id, r.text);
    return std::make_shared<OracleTeacher>(std::move(q), std::move(d), scale);
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file " + path.string());
    std::vector<CorpusRecord> records;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        CorpusRecord r;
        if (trim(line).front() == '{') {
            try {
                const auto j = nlohmann::json::parse(line);
                r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
                r.text = j.at("text").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path.string(), lineno, e.what());
            }
        } else {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected 'id <TAB> text'");
            r.id = line.substr(0, tab);
            r.text = line.substr(tab + 1);
        }
        if (r.id.empty()) throw ParseError(path.string(), lineno, "empty id");
        if (trim(r.text).empty()) throw ParseError(path.string(), lineno, "empty text for " + r.id);
        if (!seen.insert(r.id).second) throw ParseError(path.string(), lineno, "duplicate id " + r.id);
        records.push_back(std::move(r));
    }
    return records;
}

void write_corpus(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& r : records) out << nlohmann::json{{"id", r.id}, {"text", r.text}}.dump() << '\n';
    });
}

NegativePools read_negatives(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open negatives file " + path.string());
    NegativePools pools;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto f = split_whitespace(line);
        if (f.empty()) continue;
        if (f.size() < 2) throw ParseError(path.string(), lineno, "expected 'query_id <TAB> doc_id [doc_id ...]'");
        auto& pool = pools[std::string(f[0])];
        for (std::size_t i = 1; i < f.size(); ++i) pool.emplace_back(f[i]);
    }
    return pools;
}

void write_negatives(const std::filesystem::path& path, const NegativePools& pools) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& [q, docs] : pools) {
            out << q << '\t';
            for (std::size_t i = 0; i < docs.size(); ++i) out << (i ? " " : "") << docs[i];
            out << '\n';
        }
    });
}

EncodedTexts::EncodedTexts(const std::vector<CorpusRecord>& records, const Vocabulary& vocab) {
    for (const auto& r : records) {
        if (!lookup_.emplace(r.id, ids_.size()).second) throw InputError("duplicate id " + r.id);
        ids_.push_back(r.id);
        texts_.push_back(r.text);
        auto tokens = vocab.encode(r.text);
        if (tokens.empty()) throw InputError("text of " + r.id + " has no tokens");
        tokens_.push_back(std::move(tokens));
    }
}

std::size_t EncodedTexts::index_of(const std::string& id) const {
    const auto it = lookup_.find(id);
    if (it == lookup_.end()) throw InputError("unknown id " + id);
    return it->second;
}

TrainingSet::TrainingSet(Vocabulary vocab, const std::vector<CorpusRecord>& docs)
    : vocab_(std::move(vocab)), docs_(docs, vocab_) {
    if (docs_.size() == 0) throw InputError("empty corpus");
}

TrainingSet::TrainingSet(Vocabulary vocab, const std::vector<CorpusRecord>& docs,
                         const std::vector<CorpusRecord>& queries, const Qrels& qrels, const NegativePools* negatives,
                         std::shared_ptr<const TeacherSource> teacher)
    : vocab_(std::move(vocab)), docs_(docs, vocab_), queries_(queries, vocab_), teacher_(std::move(teacher)) {
    if (docs_.size() == 0) throw InputError("empty corpus");
    for (std::size_t q = 0; q < queries_.size(); ++q) {
        const auto judged = qrels.judgments.find(queries_.id(q));
        if (judged == qrels.judgments.end()) continue;
        std::vector<std::size_t> relevant;
        for (const auto& [doc, grade] : judged->second) {
            if (grade >= 1) relevant.push_back(docs_.index_of(doc));
        }
        std::sort(relevant.begin(), relevant.end());
        std::vector<std::size_t> pool;
        if (negatives != nullptr) {
            if (const auto it = negatives->find(queries_.id(q)); it != negatives->end()) {
                for (const auto& doc : it->second) {
                    const auto d = docs_.index_of(doc);
                    if (!std::binary_search(relevant.begin(), relevant.end(), d) &&
                        std::find(pool.begin(), pool.end(), d) == pool.end()) {
                        pool.push_back(d);
                    }
                }
            }
        }
        for (const auto& [doc, grade] : judged->second) {
            if (grade >= 1) pairs_.push_back({q, docs_.index_of(doc), pool, relevant});
        }
    }
    if (pairs_.empty()) throw InputError("no training pairs: no query has a relevant judgment");
}

TrainingGroup TrainingSet::sample_group(std::size_t pair, std::size_t num_negatives, std::uint64_t seed) const {
    const auto& p = pairs_.at(pair);
    TrainingGroup g{p.query, p.positive, {}, {}};
    std::mt19937_64 rng(seed);
    if (!p.negative_pool.empty()) {
        if (p.negative_pool.size() < num_negatives) {
            throw InputError("query " + queries_.id(p.query) + " has " + std::to_string(p.negative_pool.size()) +
                             " negatives, " + std::to_string(num_negatives) + " needed");
        }
        auto pool = p.negative_pool;
        for (std::size_t i = 0; i < num_negatives; ++i) {
            std::swap(pool[i], pool[i + draw_index(rng, pool.size() - i)]);
            g.negatives.push_back(pool[i]);
        }
    } else {
        const std::size_t available = docs_.size() - p.relevant.size();
        if (available < num_negatives) {
            throw InputError("corpus has " + std::to_string(available) + " non-relevant documents for query " +
                             queries_.id(p.query) + ", " + std::to_string(num_negatives) + " needed");
        }
        while (g.negatives.size() < num_negatives) {
            const auto d = draw_index(rng, docs_.size());
            if (std::binary_search(p.relevant.begin(), p.relevant.end(), d)) continue;
            if (std::find(g.negatives.begin(), g.negatives.end(), d) != g.negatives.end()) continue;
            g.negatives.push_back(d);
        }
    }
    if (teacher_) {
        const auto& qid = queries_.id(p.query);
        g.teacher_scores.push_back(teacher_->score(qid, docs_.id(p.positive)));
        for (const auto d : g.negatives) g.teacher_scores.push_back(teacher_->score(qid, docs_.id(d)));
    }
    return g;
}

BatchSampler::BatchSampler(std::size_t items, std::size_t batch_size, std::size_t grad_accum_steps,
                           std::uint64_t seed)
    : items_(items), batch_size_(batch_size), accum_(grad_accum_steps), seed_(seed) {
    if (items == 0) throw InputError("empty training store");
    if (batch_size == 0 || grad_accum_steps == 0) throw ConfigError("batch_size and grad_accum_steps must be >= 1");
    steps_per_epoch_ = items / (batch_size * grad_accum_steps);
    if (steps_per_epoch_ == 0) {
        throw ConfigError("batch_size x grad_accum_steps = " + std::to_string(batch_size * grad_accum_steps) +
                          " exceeds the " + std::to_string(items) + " training items");
    }
}

BatchSampler::MicroBatch BatchSampler::micro_batch(std::size_t step, std::size_t micro) {
    if (micro >= accum_) throw ContractError("micro-batch index out of range");
    const std::size_t epoch = step / steps_per_epoch_;
    if (epoch != cached_epoch_) {
        order_ = seeded_permutation(items_, derive_seed(seed_, epoch));
        cached_epoch_ = epoch;
    }
    MicroBatch mb{epoch, ((step % steps_per_epoch_) * accum_ + micro) * batch_size_, {}};
    mb.items.assign(order_.begin() + static_cast<std::ptrdiff_t>(mb.first_position),
                    order_.begin() + static_cast<std::ptrdiff_t>(mb.first_position + batch_size_));
    return mb;
}

std::vector<TrainingGroup> sample_training_batch(const TrainingSet& data, const BatchSampler::MicroBatch& micro,
                                                 std::size_t num_negatives, std::uint64_t seed) {
    std::vector<TrainingGroup> batch;
    batch.reserve(micro.items.size());
    for (std::size_t i = 0; i < micro.items.size(); ++i) {
        batch.push_back(
            data.sample_group(micro.items[i], num_negatives, derive_seed(seed, micro.epoch, micro.first_position + i)));
    }
    return batch;
}

}  // namespace lion
