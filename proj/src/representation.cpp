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

#include "lion/representation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lion/errors.hpp"
#include "lion/io.hpp"
#include "lion/ops.hpp"

namespace lion {

std::string to_string(Paradigm p) { return p == Paradigm::kSparse ? "sparse" : "dense"; }

Paradigm parse_paradigm(const std::string& text) {
    if (text == "sparse") return Paradigm::kSparse;
    if (text == "dense") return Paradigm::kDense;
    throw ConfigError("unknown paradigm '" + text + "' (expected sparse or dense)");
}

SparseVector::SparseVector(std::vector<SparseEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i].weight > 0.0) || !std::isfinite(entries_[i].weight)) {
            throw ContractError("sparse vector weights must be finite and > 0");
        }
        if (i > 0 && entries_[i].term <= entries_[i - 1].term) {
            throw ContractError("sparse vector term ids must be strictly increasing");
        }
    }
}

SparseVector SparseVector::from_dense(std::span<const double> values, double threshold) {
    std::vector<SparseEntry> entries;
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (values[v] > 0.0 && values[v] >= threshold) entries.push_back({static_cast<TokenId>(v), values[v]});
    }
    return SparseVector(std::move(entries));
}

std::vector<double> SparseVector::expand(std::size_t dim) const {
    std::vector<double> out(dim, 0.0);
    for (const auto& e : entries_) {
        if (e.term >= dim) throw DimensionError("sparse vector term exceeds expansion dimension");
        out[e.term] = e.weight;
    }
    return out;
}

namespace {

void require_real(const Tensor& encoding, const std::vector<bool>& real) {
    if (encoding.rank() != 2 || encoding.dim(1) != real.size()) {
        throw DimensionError("encoding " + shape_string(encoding.shape()) + " does not match mask of length " +
                             std::to_string(real.size()));
    }
}

std::vector<std::size_t> real_columns(const std::vector<bool>& real) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < real.size(); ++i) {
        if (real[i]) cols.push_back(i);
    }
    if (cols.empty()) throw ContractError("all-padding sequence has no representation");
    return cols;
}

Tensor real_part(const Tensor& encoding, const std::vector<bool>& real) {
    require_real(encoding, real);
    const auto cols = real_columns(real);
    if (cols.size() == real.size()) return encoding;
    return gather_columns(encoding, cols);
}

}  // namespace

Tensor dense_pool(const Tensor& encoding, const std::vector<bool>& real) {
    return mean_axis(real_part(encoding, real), 1);
}

Tensor sparse_activation(const Tensor& encoding, const Tensor& embedding, const std::vector<bool>& real) {
    const Tensor h = real_part(encoding, real);
    if (embedding.rank() != 2 || embedding.dim(0) != h.dim(0)) {
        throw DimensionError("embedding " + shape_string(embedding.shape()) + " does not match encoding " +
                             shape_string(encoding.shape()));
    }
    const Tensor logits = matmul(transpose(embedding), h);  // V x L
    return log1p(relu(max_axis(logits, 1)));
}

SparseProjection sparse_project(const Tensor& encoding, const Tensor& embedding, const std::vector<bool>& real) {
    Tensor activation = sparse_activation(encoding, embedding, real);
    SparseVector vec = SparseVector::from_dense(activation.data());
    return {std::move(activation), std::move(vec)};
}

Tensor flop_penalty(const Tensor& batch_activations, double lambda) {
    if (batch_activations.rank() != 2 || batch_activations.dim(0) == 0) {
        throw DimensionError("flop_penalty expects a non-empty B x V batch, got " +
                             shape_string(batch_activations.shape()));
    }
    if ((batch_activations.value().array() < 0.0).any()) {
        throw ContractError("flop_penalty: activations must be non-negative");
    }
    return scale(sum(square(mean_axis(batch_activations, 0))), lambda);
}

double relevance_score(const SparseVector& q, const SparseVector& d) {
    double score = 0.0;
    auto a = q.entries().begin();
    auto b = d.entries().begin();
    while (a != q.entries().end() && b != d.entries().end()) {
        if (a->term < b->term) {
            ++a;
        } else if (b->term < a->term) {
            ++b;
        } else {
            score += a->weight * b->weight;
            ++a;
            ++b;
        }
    }
    return score;
}

double relevance_score(std::span<const double> q, std::span<const double> d) {
    if (q.size() != d.size()) {
        throw ContractError("relevance_score: vectors of different dimension (" + std::to_string(q.size()) + " vs " +
                            std::to_string(d.size()) + ")");
    }
    double score = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) score += q[i] * d[i];
    return score;
}

Tensor represent(const EncoderModel& model, const TokenSequence& seq, Paradigm paradigm) {
    const Tensor h = model.encode(seq);
    if (paradigm == Paradigm::kDense) return dense_pool(h, seq.real);
    return sparse_activation(h, model.embedding(), seq.real);
}

// ---------------------------------------------------------------------------

void write_sparse_vectors(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, SparseVector>>& rows) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& [id, vec] : rows) {
            out << id << '\t';
            bool first = true;
            for (const auto& e : vec.entries()) {
                if (!first) out << ' ';
                first = false;
                out << e.term << ':' << format_significant(e.weight, 6);
            }
            out << '\n';
        }
    });
}

std::vector<std::pair<std::string, SparseVector>> read_sparse_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::pair<std::string, SparseVector>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected doc_id<TAB>entries");
        std::vector<SparseEntry> entries;
        try {
            for (const auto tok : split_whitespace(std::string_view(line).substr(tab + 1))) {
                const auto colon = tok.find(':');
                if (colon == std::string_view::npos) throw std::invalid_argument("missing ':'");
                entries.push_back({static_cast<TokenId>(parse_int(tok.substr(0, colon))),
                                   parse_double(tok.substr(colon + 1))});
            }
            rows.emplace_back(line.substr(0, tab), SparseVector(std::move(entries)));
        } catch (const std::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return rows;
}

void write_dense_vectors(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& [id, values] : rows) {
            out << id << '\t';
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i) out << ' ';
                out << format_double(values[i]);
            }
            out << '\n';
        }
    });
}

std::vector<std::pair<std::string, std::vector<double>>> read_dense_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected doc_id<TAB>values");
        std::vector<double> values;
        try {
            for (const auto tok : split_whitespace(std::string_view(line).substr(tab + 1))) {
                values.push_back(parse_double(tok));
            }
        } catch (const std::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
        if (!rows.empty() && rows.front().second.size() != values.size()) {
            throw ParseError(path.string(), lineno, "dimension differs from previous rows");
        }
        rows.emplace_back(line.substr(0, tab), std::move(values));
    }
    return rows;
}

}  // namespace lion
