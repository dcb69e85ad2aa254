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
#include "lion/objectives.hpp"
#include "lion/ops.hpp"

using namespace lion;

namespace {

// Plain-double reference: KL(softmax(t) || softmax(s)).
double reference_kl(const std::vector<double>& t, const std::vector<double>& s) {
    auto soft = [](const std::vector<double>& x) {
        const double m = *std::max_element(x.begin(), x.end());
        std::vector<double> p(x.size());
        double z = 0;
        for (std::size_t i = 0; i < x.size(); ++i) z += p[i] = std::exp(x[i] - m);
        for (auto& v : p) v /= z;
        return p;
    };
    const auto p = soft(t);
    const auto q = soft(s);
    double kl = 0;
    for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
    return kl;
}

std::vector<double> random_scores(std::size_t n, std::mt19937_64& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = std::uniform_real_distribution<double>(-2, 2)(rng);
    return v;
}

}  // namespace

TEST(ClLoss, UniformScoresGiveLogOfListSize) {
    const Tensor scores = Tensor::vector(std::vector<double>(17, 0.7));
    EXPECT_NEAR(cl_loss(scores).item(), std::log(17.0), 1e-12);
    EXPECT_NEAR(cl_loss(scores).item(), 2.8332, 5e-5);
}

TEST(ClLoss, SingleNegative) {
    const double loss = cl_loss(Tensor::scalar(1.0), {Tensor::scalar(0.0)}).item();
    EXPECT_NEAR(loss, std::log1p(std::exp(-1.0)), 1e-15);
    EXPECT_NEAR(loss, 0.31326, 5e-6);
}

TEST(ClLoss, DominantPositiveStaysFinite) {
    const double loss = cl_loss(Tensor::vector({1000.0, 0.0, -5.0})).item();
    EXPECT_TRUE(std::isfinite(loss));
    EXPECT_NEAR(loss, 0.0, 1e-300);
    const double far = cl_loss(Tensor::vector({-1e4, 1e4})).item();
    EXPECT_NEAR(far, 2e4, 1e-8);
}

TEST(ClLoss, EmptyNegativesRejected) {
    EXPECT_THROW(cl_loss(Tensor::scalar(1.0), {}), ContractError);
    EXPECT_THROW(cl_loss(Tensor::vector({1.0})), ContractError);
}

TEST(ClLoss, PositiveAndPermutationInvariant) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = random_scores(6, rng);
        const double loss = cl_loss(Tensor::vector(s)).item();
        EXPECT_GT(loss, 0.0);
        std::shuffle(s.begin() + 1, s.end(), rng);
        EXPECT_NEAR(cl_loss(Tensor::vector(s)).item(), loss, 1e-12);
    }
}

TEST(MarginMse, Examples) {
    EXPECT_EQ(margin_mse_loss(Tensor::scalar(5.0), Tensor::scalar(3.0), 9.0, 7.0).item(), 0.0);
    EXPECT_DOUBLE_EQ(margin_mse_loss(Tensor::scalar(2.0), Tensor::scalar(1.0), 3.0, 1.0).item(), 1.0);
    // Negating both margins leaves the squared difference unchanged.
    EXPECT_DOUBLE_EQ(margin_mse_loss(Tensor::scalar(1.0), Tensor::scalar(2.0), 1.0, 3.0).item(), 1.0);
    EXPECT_THROW(margin_mse_loss(Tensor::scalar(std::nan("")), Tensor::scalar(1.0), 0, 0), NumericError);
}

TEST(KlDiv, IdenticalListsGiveZero) {
    const std::vector<double> s{0.3, -1.0, 2.0};
    EXPECT_NEAR(kl_div_loss(Tensor::vector(s), s).item(), 0.0, 1e-15);
}

TEST(KlDiv, HandExample) {
    const std::vector<double> teacher{2.0, 0.0};
    const double loss = kl_div_loss(Tensor::vector({0.0, 2.0}), teacher).item();
    EXPECT_NEAR(loss, reference_kl(teacher, {0.0, 2.0}), 1e-14);
    const double p = std::exp(2.0) / (std::exp(2.0) + 1);
    EXPECT_NEAR(loss, p * 2 + (1 - p) * -2, 1e-14);
    EXPECT_NEAR(loss, 1.5232, 1e-3);
}

TEST(KlDiv, ShiftInvariantAndNonNegative) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_scores(5, rng);
        const auto t = random_scores(5, rng);
        const double base = kl_div_loss(Tensor::vector(s), t).item();
        EXPECT_GE(base, 0.0);
        EXPECT_NEAR(base, reference_kl(t, s), 1e-12);
        auto s2 = s;
        for (auto& x : s2) x += 3.5;
        auto t2 = t;
        for (auto& x : t2) x -= 1.25;
        EXPECT_NEAR(kl_div_loss(Tensor::vector(s2), t2).item(), base, 1e-12);
    }
}

TEST(KlDiv, TemperatureScalesTeacher) {
    const std::vector<double> t{4.0, 0.0, 2.0};
    const std::vector<double> s{1.0, 0.5, 0.0};
    EXPECT_NEAR(kl_div_loss(Tensor::vector(s), t, 2.0).item(), reference_kl({2.0, 0.0, 1.0}, s), 1e-14);
}

TEST(KlDiv, LengthMismatchRejected) {
    const std::vector<double> t{1.0, 2.0, 3.0};
    EXPECT_THROW(kl_div_loss(Tensor::vector({1.0, 2.0}), t), ContractError);
}

TEST(CombinedLoss, Examples) {
    EXPECT_EQ(combined_loss(Tensor::scalar(2.0), Tensor::scalar(0.0)).item(), 1.0);
    EXPECT_EQ(combined_loss(Tensor::scalar(0.0), Tensor::scalar(0.0)).item(), 0.0);
    const double cl = cl_loss(Tensor::vector(std::vector<double>(17, 0.0))).item();
    const std::vector<double> teacher{2.0, 0.0};
    const double kd = kl_div_loss(Tensor::vector({0.0, 2.0}), teacher).item();
    EXPECT_NEAR(combined_loss(Tensor::scalar(cl), Tensor::scalar(kd)).item(), 2.1782, 1e-4);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor s = Tensor::vector(random_scores(5, rng));
        const auto t = random_scores(5, rng);
        EXPECT_LT(finite_difference_check<double>([](const Tensor& x) { return cl_loss(x); }, s, 1e-5), 1e-4);
        EXPECT_LT(finite_difference_check<double>(
                      [&](const Tensor& x) { return margin_mse_loss(element(x, 0), element(x, 1), t[0], t[1]); }, s,
                      1e-5),
                  1e-4);
        EXPECT_LT(finite_difference_check<double>([&](const Tensor& x) { return kl_div_loss(x, t); }, s, 1e-5), 1e-4);
        EXPECT_LT(finite_difference_check<double>(
                      [&](const Tensor& x) { return combined_loss(cl_loss(x), kl_div_loss(x, t)); }, s, 1e-5),
                  1e-4);
    }
}

TEST(OracleTeacher, Examples) {
    EXPECT_DOUBLE_EQ(oracle_teacher_score("a b c", "a b c"), 10.0);
    EXPECT_EQ(oracle_teacher_score("a b", "c d"), 0.0);
    EXPECT_DOUBLE_EQ(oracle_teacher_score("a b", "a c"), 10.0 * 0.5);
    EXPECT_DOUBLE_EQ(oracle_teacher_score("a a b", "a c", 1.0), 1.0 / std::sqrt(6.0));
    EXPECT_THROW(oracle_teacher_score("", "a"), InputError);
}

TEST(TeacherSources, FileAndOracle) {
    const auto path = std::filesystem::temp_directory_path() / "lion_teacher.tsv";
    write_teacher_scores(path, {{"q1", "d1", 3.5}, {"q1", "d2", -1.25}});
    const auto teacher = ScoreFileTeacher::load(path);
    EXPECT_EQ(teacher.score("q1", "d2"), -1.25);
    EXPECT_THROW(teacher.score("q1", "d3"), InputError);
    {
        std::ofstream out(path, std::ios::app);
        out << "q1\td1\t2.0\n";
    }
    EXPECT_THROW(ScoreFileTeacher::load(path), ParseError);
    std::filesystem::remove(path);

    const OracleTeacher oracle({{"q", "red fox"}}, {{"d", "the red fox jumps"}}, 10.0);
    EXPECT_DOUBLE_EQ(oracle.score("q", "d"), 10.0 * 2 / std::sqrt(8.0));
    EXPECT_THROW(oracle.score("q", "x"), InputError);
}
