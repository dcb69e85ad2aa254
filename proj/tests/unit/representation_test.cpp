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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "lion/gradcheck.hpp"
#include "lion/ops.hpp"
#include "lion/representation.hpp"

using namespace lion;

namespace {

Tensor mat(std::size_t r, std::size_t c, std::vector<double> v, bool grad = false) {
    return Tensor::from_data({r, c}, v, grad);
}

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -2, double hi = 2) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(r * c);
    for (auto& x : v) x = u(rng);
    return Tensor::from_data({r, c}, v);
}

SparseVector random_sparse(std::size_t vocab, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(0.05);
    std::uniform_real_distribution<double> w(0.01, 3.0);
    std::vector<SparseEntry> e;
    for (std::size_t v = 0; v < vocab; ++v) {
        if (keep(rng)) e.push_back({static_cast<TokenId>(v), w(rng)});
    }
    return SparseVector(std::move(e));
}

}  // namespace

TEST(DensePool, SingleColumnUnchanged) {
    const Tensor h = mat(3, 1, {1, -2, 5});
    EXPECT_EQ(dense_pool(h, {true}).value(), Tensor::vector({1, -2, 5}).value());
}

TEST(DensePool, MeanOfColumns) {
    const Tensor h = mat(2, 2, {1, 3, 0, 2});  // columns [1,0] and [3,2]
    EXPECT_EQ(dense_pool(h, {true, true}).value(), Tensor::vector({2, 1}).value());
}

TEST(DensePool, PaddingExcluded) {
    const Tensor h = mat(2, 2, {1, 9, 0, 9});  // columns [1,0] real, [9,9] padding
    EXPECT_EQ(dense_pool(h, {true, false}).value(), Tensor::vector({1, 0}).value());
    EXPECT_THROW(dense_pool(h, {false, false}), ContractError);
}

TEST(SparseProject, HandExample) {
    // With E = I, E^T H = H = [[-1, 0.5], [2, -3]].
    const Tensor e = mat(2, 2, {1, 0, 0, 1});
    const Tensor h = mat(2, 2, {-1, 0.5, 2, -3});
    const auto p = sparse_project(h, e, {true, true});
    EXPECT_NEAR(p.activation[0], std::log(1.5), 1e-15);
    EXPECT_NEAR(p.activation[1], std::log(3.0), 1e-15);
    EXPECT_NEAR(p.activation[0], 0.4055, 5e-5);
    EXPECT_NEAR(p.activation[1], 1.0986, 5e-5);
    ASSERT_EQ(p.vector.size(), 2u);
    EXPECT_EQ(p.vector.entries()[1].term, 1u);
}

TEST(SparseProject, NonPositivePreActivationsGiveEmptyVector) {
    const Tensor e = mat(2, 3, {1, 0, -1, 0, 1, -1});
    const Tensor h = mat(2, 2, {-1, -2, -3, -0.5});
    const auto p = sparse_project(h, e, {true, true});
    EXPECT_EQ(p.vector.size(), 1u);  // term 2 sees +1 and +2.5
    const Tensor h2 = mat(2, 1, {0, 0});
    EXPECT_TRUE(sparse_project(h2, e, {true}).vector.empty());
}

TEST(SparseProject, PaddingColumnExcludedFromMax) {
    const Tensor e = mat(1, 1, {1});
    const Tensor h = mat(1, 2, {0.5, 7.0});
    const auto p = sparse_project(h, e, {true, false});
    EXPECT_NEAR(p.activation[0], std::log1p(0.5), 1e-15);
    EXPECT_THROW(sparse_project(h, e, {false, false}), ContractError);
}

TEST(SparseProject, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor e = random_matrix(4, 6, rng);
        const Tensor h = random_matrix(4, 5, rng);
        const std::vector<bool> real{true, true, false, true, true};
        EXPECT_LT(finite_difference_check<double>(
                      [&](const Tensor& x) { return sum(sparse_project(x, e, real).activation); }, h, 1e-5),
                  1e-4);
        EXPECT_LT(finite_difference_check<double>(
                      [&](const Tensor& x) { return sum(sparse_project(h, x, real).activation); }, e, 1e-5),
                  1e-4);
    }
}

TEST(SparseProject, MonotoneInPreActivations) {
    std::mt19937_64 rng(32);
    const Tensor e = mat(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    for (int trial = 0; trial < 200; ++trial) {
        Tensor h = random_matrix(3, 4, rng);
        const auto before = sparse_project(h, e, {true, true, true, true}).activation;
        MatrixX<double> bumped = h.value();
        const auto r = static_cast<Eigen::Index>(rng() % 3);
        const auto c = static_cast<Eigen::Index>(rng() % 4);
        bumped(r, c) += std::uniform_real_distribution<double>(0, 1)(rng);
        const auto after = sparse_project(Tensor::matrix(bumped), e, {true, true, true, true}).activation;
        for (std::size_t v = 0; v < 3; ++v) EXPECT_GE(after[v], before[v]);
    }
}

TEST(Representation, PaddingInvariance) {
    std::mt19937_64 rng(33);
    const Tensor e = random_matrix(4, 10, rng);
    const Tensor h = random_matrix(4, 3, rng);
    MatrixX<double> padded(4, 5);
    padded << h.value(), MatrixX<double>::Constant(4, 2, 50.0);
    const Tensor hp = Tensor::matrix(padded);
    const std::vector<bool> mask{true, true, true, false, false};
    EXPECT_EQ(dense_pool(h, {true, true, true}).value(), dense_pool(hp, mask).value());
    EXPECT_EQ(sparse_project(h, e, {true, true, true}).activation.value(), sparse_project(hp, e, mask).activation.value());
}

TEST(DensePool, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor h = random_matrix(4, 5, rng);
        const Tensor w = Tensor::vector({0.3, -1.2, 2.0, 0.7});
        EXPECT_LT(finite_difference_check<double>(
                      [&](const Tensor& x) { return square(dot(dense_pool(x, {true, false, true, true, false}), w)); },
                      h, 1e-5),
                  1e-4);
    }
}

TEST(FlopPenalty, Examples) {
    EXPECT_EQ(flop_penalty(Tensor::zeros({3, 4}), 0.05).item(), 0.0);
    EXPECT_DOUBLE_EQ(flop_penalty(mat(2, 2, {0, 2, 0, 4}), 1.0).item(), 9.0);
    EXPECT_EQ(flop_penalty(mat(2, 2, {0, 2, 0, 4}), 0.0).item(), 0.0);
}

TEST(FlopPenalty, RejectsNegativeActivations) {
    EXPECT_THROW(flop_penalty(mat(1, 2, {0.5, -0.1}), 1.0), ContractError);
}

TEST(FlopPenalty, GradientAndPermutationInvariance) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor acts = random_matrix(4, 6, rng, 0.0, 2.0);
        EXPECT_LT(finite_difference_check<double>([](const Tensor& x) { return flop_penalty(x, 0.04); }, acts, 1e-5),
                  1e-4);
        MatrixX<double> shuffled = acts.value();
        shuffled.row(0).swap(shuffled.row(3));
        shuffled.row(1).swap(shuffled.row(2));
        EXPECT_NEAR(flop_penalty(Tensor::matrix(shuffled), 0.04).item(), flop_penalty(acts, 0.04).item(), 1e-15);
    }
}

TEST(RelevanceScore, SparseHandExample) {
    const SparseVector q({{1, 1.0}, {3, 2.0}});
    const SparseVector d({{3, 1.5}, {7, 4.0}});
    EXPECT_DOUBLE_EQ(relevance_score(q, d), 3.0);
    EXPECT_EQ(relevance_score(SparseVector({{1, 1.0}}), SparseVector({{2, 1.0}})), 0.0);
}

TEST(RelevanceScore, DenseHandExample) {
    const std::vector<double> q{1, 0, 2};
    const std::vector<double> d{3, 1, 1};
    EXPECT_DOUBLE_EQ(relevance_score(q, d), 5.0);
    const std::vector<double> short_d{3, 1};
    EXPECT_THROW(relevance_score(q, short_d), ContractError);
}

TEST(RelevanceScore, SparseEqualsDenseExpansion) {
    std::mt19937_64 rng(36);
    for (int trial = 0; trial < 500; ++trial) {
        const auto q = random_sparse(200, rng);
        const auto d = random_sparse(200, rng);
        const auto qe = q.expand(200);
        const auto de = d.expand(200);
        EXPECT_EQ(relevance_score(q, d), relevance_score(qe, de));
    }
}

TEST(SparseVector, InvariantsEnforced) {
    EXPECT_THROW(SparseVector({{3, 1.0}, {2, 1.0}}), ContractError);
    EXPECT_THROW(SparseVector({{3, 1.0}, {3, 1.0}}), ContractError);
    EXPECT_THROW(SparseVector({{3, 0.0}}), ContractError);
    const std::vector<double> dense{0.0, 0.5, 0.00005, 2.0};
    const auto pruned = SparseVector::from_dense(dense, kIndexPruneThreshold);
    EXPECT_EQ(pruned, SparseVector({{1, 0.5}, {3, 2.0}}));
}

TEST(VectorFiles, SparseFormat) {
    const auto path = std::filesystem::temp_directory_path() / "lion_sparse_vectors.tsv";
    write_sparse_vectors(path, {{"d1", SparseVector({{2, 0.123456789}, {10, 3.0}})}, {"d2", SparseVector()}});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "d1\t2:0.123457 10:3");
    const auto rows = read_sparse_vectors(path);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].second.entries()[0].weight, 0.123457);
    EXPECT_TRUE(rows[1].second.empty());
    std::filesystem::remove(path);
}

TEST(VectorFiles, DenseFormatRoundTripsExactly) {
    const auto path = std::filesystem::temp_directory_path() / "lion_dense_vectors.tsv";
    std::mt19937_64 rng(37);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> v(7);
        for (auto& x : v) x = std::normal_distribution<double>(0, 10)(rng);
        rows.emplace_back("doc" + std::to_string(i), v);
    }
    write_dense_vectors(path, rows);
    EXPECT_EQ(read_dense_vectors(path), rows);
    std::filesystem::remove(path);
}
