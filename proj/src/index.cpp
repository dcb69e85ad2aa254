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
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <thread>

#include "lion/errors.hpp"
#include "lion/index.hpp"
#include "lion/io.hpp"

namespace lion {

namespace {

constexpr char kMagic[8] = {'L', 'I', 'O', 'N', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

// Little-endian hosts only; the header magic catches foreign files.
template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& source) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ParseError(source, 0, "truncated index file");
    return v;
}

void put_varint(std::ostream& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.put(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.put(static_cast<char>(v));
}

std::uint64_t get_varint(std::istream& in, const std::string& source) {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
        const int c = in.get();
        if (c == EOF) throw ParseError(source, 0, "truncated index file");
        v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
        if ((c & 0x80) == 0) return v;
    }
    throw ParseError(source, 0, "malformed varint");
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in, const std::string& source) {
    const auto n = get<std::uint32_t>(in, source);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw ParseError(source, 0, "truncated index file");
    return s;
}

struct Header {
    IndexKind kind;
    std::uint64_t docs;
    std::uint64_t terms_or_dim;
    std::uint64_t vocab_fingerprint;
};

void write_header(std::ostream& out, const Header& h) {
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(h.kind));
    put<std::uint64_t>(out, h.docs);
    put<std::uint64_t>(out, h.terms_or_dim);
    put<std::uint64_t>(out, h.vocab_fingerprint);
}

Header read_header(std::istream& in, const std::string& source) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError(source, 0, "not a lion index file");
    const auto version = get<std::uint32_t>(in, source);
    if (version != kFormatVersion) throw ParseError(source, 0, "unsupported index version " + std::to_string(version));
    Header h{};
    const auto kind = get<std::uint8_t>(in, source);
    if (kind != 1 && kind != 2) throw ParseError(source, 0, "unknown index kind");
    h.kind = static_cast<IndexKind>(kind);
    h.docs = get<std::uint64_t>(in, source);
    h.terms_or_dim = get<std::uint64_t>(in, source);
    h.vocab_fingerprint = get<std::uint64_t>(in, source);
    return h;
}

std::ifstream open_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open index file " + path.string());
    return in;
}

// Sorts by id and rejects duplicates.
template <typename Payload>
void sort_unique_ids(std::vector<std::pair<std::string, Payload>>& docs) {
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].first == docs[i - 1].first) throw InputError("duplicate document id " + docs[i].first);
    }
    if (docs.size() > std::numeric_limits<std::uint32_t>::max()) throw InputError("too many documents");
}

}  // namespace

RankedList select_top_k(std::vector<std::pair<std::uint32_t, double>> candidates, std::size_t k,
                        const std::vector<std::string>& doc_ids) {
    if (k == 0) throw ContractError("k must be >= 1");
    const auto better = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    const std::size_t keep = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better);
    RankedList out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back({doc_ids[candidates[i].first], candidates[i].second});
    return out;
}

// ---------------------------------------------------------------------------

InvertedIndex InvertedIndex::build(std::vector<std::pair<std::string, SparseVector>> docs, unsigned threads) {
    sort_unique_ids(docs);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(docs.size(), 1))));

    // Each shard covers a contiguous ordinal range, so concatenating shard
    // postings in shard order keeps every list ascending.
    using ShardMap = std::map<TokenId, std::vector<Posting>>;
    std::vector<ShardMap> shards(threads);
    const auto run_shard = [&](unsigned s) {
        const std::size_t begin = docs.size() * s / threads;
        const std::size_t end = docs.size() * (s + 1) / threads;
        for (std::size_t d = begin; d < end; ++d) {
            for (const auto& e : docs[d].second.entries()) {
                const auto w = static_cast<float>(e.weight);
                if (!(w > 0.0f) || !std::isfinite(w)) {
                    throw InputError("document " + docs[d].first + " has a weight that is not a positive float");
                }
                shards[s][e.term].push_back({static_cast<std::uint32_t>(d), w});
            }
        }
    };
    if (threads == 1) {
        run_shard(0);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(threads);
        for (unsigned s = 0; s < threads; ++s) {
            workers.emplace_back([&, s] {
                try {
                    run_shard(s);
                } catch (...) {
                    errors[s] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    ShardMap merged;
    for (auto& shard : shards) {
        for (auto& [term, list] : shard) {
            auto& dst = merged[term];
            dst.insert(dst.end(), list.begin(), list.end());
        }
    }
    InvertedIndex index;
    index.doc_ids_.reserve(docs.size());
    for (auto& [id, vec] : docs) index.doc_ids_.push_back(std::move(id));
    index.terms_.reserve(merged.size());
    for (auto& [term, list] : merged) index.terms_.push_back({term, std::move(list)});
    return index;
}

RankedList InvertedIndex::search(const SparseVector& q, std::size_t k) const {
    if (k == 0) throw ContractError("k must be >= 1");
    std::vector<double> acc(doc_ids_.size(), 0.0);
    std::vector<char> seen(doc_ids_.size(), 0);
    std::vector<std::uint32_t> touched;
    auto it = terms_.begin();
    for (const auto& e : q.entries()) {
        it = std::lower_bound(it, terms_.end(), e.term, [](const TermPostings& t, TokenId id) { return t.term < id; });
        if (it == terms_.end()) break;
        if (it->term != e.term) continue;
        for (const auto& p : it->postings) {
            if (!seen[p.doc]) {
                seen[p.doc] = 1;
                touched.push_back(p.doc);
            }
            acc[p.doc] += e.weight * static_cast<double>(p.weight);
        }
    }
    std::vector<std::pair<std::uint32_t, double>> candidates;
    candidates.reserve(touched.size());
    for (const auto d : touched) candidates.emplace_back(d, acc[d]);
    return select_top_k(std::move(candidates), k, doc_ids_);
}

IndexStats InvertedIndex::stats() const {
    IndexStats s;
    s.docs = doc_ids_.size();
    s.terms = terms_.size();
    for (const auto& t : terms_) s.postings += t.postings.size();
    s.mean_nonzeros = s.docs == 0 ? 0.0 : static_cast<double>(s.postings) / static_cast<double>(s.docs);
    return s;
}

SparseVector InvertedIndex::document(const std::string& doc_id) const {
    const auto pos = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
    if (pos == doc_ids_.end() || *pos != doc_id) throw InputError("unknown document " + doc_id);
    const auto ordinal = static_cast<std::uint32_t>(pos - doc_ids_.begin());
    std::vector<SparseEntry> entries;
    for (const auto& t : terms_) {
        const auto p = std::lower_bound(t.postings.begin(), t.postings.end(), ordinal,
                                        [](const Posting& a, std::uint32_t d) { return a.doc < d; });
        if (p != t.postings.end() && p->doc == ordinal) entries.push_back({t.term, static_cast<double>(p->weight)});
    }
    return SparseVector(std::move(entries));
}

std::vector<SparseVector> InvertedIndex::documents() const {
    std::vector<std::vector<SparseEntry>> entries(doc_ids_.size());
    for (const auto& t : terms_) {
        for (const auto& p : t.postings) entries[p.doc].push_back({t.term, static_cast<double>(p.weight)});
    }
    std::vector<SparseVector> out;
    out.reserve(entries.size());
    for (auto& e : entries) out.emplace_back(std::move(e));
    return out;
}

RankedList InvertedIndex::exhaustive_search(const SparseVector& q, std::size_t k) const {
    if (k == 0) throw ContractError("k must be >= 1");
    const auto docs = documents();
    std::vector<std::pair<std::uint32_t, double>> candidates;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        bool overlap = false;
        double score = 0.0;
        auto qi = q.entries().begin();
        auto di = docs[d].entries().begin();
        while (qi != q.entries().end() && di != docs[d].entries().end()) {
            if (qi->term < di->term) {
                ++qi;
            } else if (di->term < qi->term) {
                ++di;
            } else {
                score += qi->weight * di->weight;
                overlap = true;
                ++qi;
                ++di;
            }
        }
        if (overlap) candidates.emplace_back(static_cast<std::uint32_t>(d), score);
    }
    return select_top_k(std::move(candidates), k, doc_ids_);
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    write_file_atomically(
        path,
        [&](std::ostream& out) {
            write_header(out, {IndexKind::kSparse, doc_ids_.size(), terms_.size(), vocab_fingerprint});
            for (const auto& id : doc_ids_) put_string(out, id);
            for (const auto& t : terms_) {
                put<std::uint32_t>(out, t.term);
                put<std::uint64_t>(out, t.postings.size());
                std::uint32_t prev = 0;
                for (const auto& p : t.postings) {
                    put_varint(out, p.doc - prev);
                    prev = p.doc;
                }
                for (const auto& p : t.postings) put<float>(out, p.weight);
            }
        },
        true);
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    auto in = open_index(path);
    const std::string source = path.string();
    const Header h = read_header(in, source);
    if (h.kind != IndexKind::kSparse) throw InputError(source + " holds a dense store, not an inverted index");
    InvertedIndex index;
    index.vocab_fingerprint = h.vocab_fingerprint;
    for (std::uint64_t i = 0; i < h.docs; ++i) index.doc_ids_.push_back(get_string(in, source));
    for (std::uint64_t t = 0; t < h.terms_or_dim; ++t) {
        TermPostings tp;
        tp.term = get<std::uint32_t>(in, source);
        const auto count = get<std::uint64_t>(in, source);
        if (count == 0 || count > h.docs) throw ParseError(source, 0, "bad posting count");
        tp.postings.resize(count);
        std::uint64_t doc = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            doc += get_varint(in, source);
            if (doc >= h.docs || (i > 0 && doc == tp.postings[i - 1].doc)) {
                throw ParseError(source, 0, "posting list is not strictly ascending");
            }
            tp.postings[i].doc = static_cast<std::uint32_t>(doc);
        }
        for (auto& p : tp.postings) p.weight = get<float>(in, source);
        if (!index.terms_.empty() && index.terms_.back().term >= tp.term) {
            throw ParseError(source, 0, "terms are not strictly ascending");
        }
        index.terms_.push_back(std::move(tp));
    }
    return index;
}

// ---------------------------------------------------------------------------

DenseStore DenseStore::build(std::vector<std::pair<std::string, std::vector<double>>> docs) {
    sort_unique_ids(docs);
    DenseStore store;
    const std::size_t dim = docs.empty() ? 0 : docs.front().second.size();
    store.vectors_.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& v = docs[i].second;
        if (v.size() != dim) {
            throw ContractError("document " + docs[i].first + " has dimension " + std::to_string(v.size()) +
                                ", expected " + std::to_string(dim));
        }
        for (std::size_t j = 0; j < dim; ++j) {
            if (!std::isfinite(v[j])) throw InputError("document " + docs[i].first + " has a non-finite value");
            store.vectors_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
        }
        store.doc_ids_.push_back(std::move(docs[i].first));
    }
    return store;
}

RankedList DenseStore::search(std::span<const double> q, std::size_t k) const {
    if (k == 0) throw ContractError("k must be >= 1");
    if (q.size() != dim()) {
        throw ContractError("query dimension " + std::to_string(q.size()) + " != store dimension " +
                            std::to_string(dim()));
    }
    std::vector<std::pair<std::uint32_t, double>> candidates(doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            s += vectors_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * q[j];
        }
        candidates[i] = {static_cast<std::uint32_t>(i), s};
    }
    return select_top_k(std::move(candidates), k, doc_ids_);
}

void DenseStore::save(const std::filesystem::path& path) const {
    write_file_atomically(
        path,
        [&](std::ostream& out) {
            write_header(out, {IndexKind::kDense, doc_ids_.size(), dim(), vocab_fingerprint});
            for (const auto& id : doc_ids_) put_string(out, id);
            out.write(reinterpret_cast<const char*>(vectors_.data()),
                      static_cast<std::streamsize>(vectors_.size() * sizeof(double)));
        },
        true);
}

DenseStore DenseStore::load(const std::filesystem::path& path) {
    auto in = open_index(path);
    const std::string source = path.string();
    const Header h = read_header(in, source);
    if (h.kind != IndexKind::kDense) throw InputError(source + " holds an inverted index, not a dense store");
    DenseStore store;
    store.vocab_fingerprint = h.vocab_fingerprint;
    for (std::uint64_t i = 0; i < h.docs; ++i) store.doc_ids_.push_back(get_string(in, source));
    store.vectors_.resize(static_cast<Eigen::Index>(h.docs), static_cast<Eigen::Index>(h.terms_or_dim));
    in.read(reinterpret_cast<char*>(store.vectors_.data()),
            static_cast<std::streamsize>(store.vectors_.size() * sizeof(double)));
    if (!in) throw ParseError(source, 0, "truncated dense store");
    return store;
}

IndexKind peek_index_kind(const std::filesystem::path& path) {
    auto in = open_index(path);
    return read_header(in, path.string()).kind;
}

}  // namespace lion
