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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lion/encoder.hpp"
#include "lion/tensor.hpp"

namespace lion {

enum class Paradigm { kSparse, kDense };

std::string to_string(Paradigm p);
Paradigm parse_paradigm(const std::string& text);

// Weights below this are dropped when an activation is materialized for indexing.
inline constexpr double kIndexPruneThreshold = 1e-4;

struct SparseEntry {
    TokenId term;
    double weight;
    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Entries sorted by strictly increasing term id; every weight is > 0.
class SparseVector {
 public:
    SparseVector() = default;
    // Validates the ordering and positivity invariants.
    explicit SparseVector(std::vector<SparseEntry> entries);

    // Non-zero (above `threshold`) coordinates of a dense vector.
    static SparseVector from_dense(std::span<const double> values, double threshold = 0.0);

    const std::vector<SparseEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    // Dense expansion of length `dim`.
    std::vector<double> expand(std::size_t dim) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
    std::vector<SparseEntry> entries_;
};

// Mean over the real columns of H_T. Returns a rank-1 tensor of length D.
Tensor dense_pool(const Tensor& encoding, const std::vector<bool>& real);

struct SparseProjection {
    Tensor activation;  // rank-1, length V, differentiable
    SparseVector vector;
};

// log1p(relu(max over real positions of (E^T H_T))).
SparseProjection sparse_project(const Tensor& encoding, const Tensor& embedding, const std::vector<bool>& real);
// Differentiable part only; skips building the SparseVector.
Tensor sparse_activation(const Tensor& encoding, const Tensor& embedding, const std::vector<bool>& real);

// lambda * sum_v (mean_b activations[b][v])^2 over a B x V batch.
Tensor flop_penalty(const Tensor& batch_activations, double lambda);

double relevance_score(const SparseVector& q, const SparseVector& d);
double relevance_score(std::span<const double> q, std::span<const double> d);

// Encodes a sequence and returns its single-vector form for the given paradigm
// (length D for dense, V for sparse). Differentiable when the model's parameters are.
Tensor represent(const EncoderModel& model, const TokenSequence& seq, Paradigm paradigm);

// ---------------------------------------------------------------------------
// Text exchange formats
//   sparse: doc_id <TAB> term:weight term:weight ...   (6 significant digits)
//   dense:  doc_id <TAB> v1 v2 ... vD

void write_sparse_vectors(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, SparseVector>>& rows);
std::vector<std::pair<std::string, SparseVector>> read_sparse_vectors(const std::filesystem::path& path);

void write_dense_vectors(const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::vector<double>>>& rows);
std::vector<std::pair<std::string, std::vector<double>>> read_dense_vectors(const std::filesystem::path& path);

}  // namespace lion
