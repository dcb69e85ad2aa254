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

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lion/errors.hpp"
#include "lion/evaluation.hpp"

using namespace lion;

namespace {

Run make_run(const std::string& query, const std::vector<std::string>& docs) {
    lion::Run run;
    run.tag = "t";
    double score = static_cast<double>(docs.size());
    for (const auto& d : docs) run.rankings[query].push_back({d, score--});
    return run;
}

double boost_two_sided_p(double t, double dof) {
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lion_eval_" + name);
}

}  // namespace

TEST(Mrr, FirstRelevantRank) {
    Qrels qrels;
    qrels.add("q", "a", 1);
    EXPECT_DOUBLE_EQ(mrr_at_k(make_run("q", {"a", "b"}), qrels, 10).mean, 1.0);
    EXPECT_DOUBLE_EQ(mrr_at_k(make_run("q", {"x", "y", "a"}), qrels, 10).mean, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(mrr_at_k(make_run("q", {"x", "y", "a"}), qrels, 2).mean, 0.0);
}

TEST(Mrr, MacroAverage) {
    Qrels qrels;
    qrels.add("q1", "a", 1);
    qrels.add("q2", "b", 2);
    lion::Run run = make_run("q1", {"a"});
    run.rankings["q2"] = {{"z", 2.0}, {"b", 1.0}};
    const auto report = mrr_at_k(run, qrels, 10);
    ASSERT_EQ(report.per_query.size(), 2u);
    EXPECT_DOUBLE_EQ(report.mean, 0.75);
}

TEST(Mrr, MissingQueryScoresZeroAndIsFlagged) {
    Qrels qrels;
    qrels.add("q1", "a", 1);
    qrels.add("q2", "b", 1);
    qrels.add("q3", "c", 0);
    const auto report = mrr_at_k(make_run("q1", {"a"}), qrels, 10);
    EXPECT_DOUBLE_EQ(report.mean, 0.5);
    EXPECT_EQ(report.missing_from_run, std::vector<std::string>{"q2"});
    EXPECT_EQ(report.excluded, std::vector<std::string>{"q3"});
}

TEST(Ndcg, HandFixture) {
    Qrels qrels;
    qrels.add("q", "d1", 3);
    qrels.add("q", "d2", 2);
    const auto report = ndcg_at_k(make_run("q", {"d2", "d1"}), qrels, 10);
    const double dcg = 3.0 / 1.0 + 7.0 / std::log2(3.0);
    const double idcg = 7.0 + 3.0 / std::log2(3.0);
    EXPECT_NEAR(dcg, 7.4164, 2e-4);  // 7.41651, printed truncated
    EXPECT_NEAR(idcg, 8.8928, 1e-4);
    EXPECT_NEAR(report.mean, dcg / idcg, 1e-12);
    EXPECT_NEAR(report.mean, 0.8340, 1e-4);
}

TEST(Ndcg, IdealIsOneAndUngradedIsZero) {
    Qrels qrels;
    qrels.add("q", "d1", 3);
    qrels.add("q", "d2", 2);
    qrels.add("q", "d3", 1);
    EXPECT_EQ(ndcg_at_k(make_run("q", {"d1", "d2", "d3", "x"}), qrels, 10).mean, 1.0);
    EXPECT_EQ(ndcg_at_k(make_run("q", {"x", "y"}), qrels, 10).mean, 0.0);
}

TEST(Ndcg, LinearGain) {
    Qrels qrels;
    qrels.add("q", "d1", 3);
    qrels.add("q", "d2", 2);
    const auto report = ndcg_at_k(make_run("q", {"d2", "d1"}), qrels, 10, Gain::kLinear);
    EXPECT_NEAR(report.mean, (2.0 + 3.0 / std::log2(3.0)) / (3.0 + 2.0 / std::log2(3.0)), 1e-12);
}

TEST(Ndcg, ZeroIdealExcluded) {
    Qrels qrels;
    qrels.add("q1", "a", 0);
    qrels.add("q2", "b", 1);
    const auto report = ndcg_at_k(make_run("q2", {"b"}), qrels, 10);
    EXPECT_EQ(report.per_query.size(), 1u);
    EXPECT_EQ(report.excluded, std::vector<std::string>{"q1"});
    EXPECT_DOUBLE_EQ(report.mean, 1.0);
}

TEST(Metrics, RankSwapMonotonicityAndBounds) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        Qrels qrels;
        std::vector<std::string> docs;
        for (int i = 0; i < 12; ++i) {
            docs.push_back("d" + std::to_string(i));
            const int g = static_cast<int>(rng() % 4);
            if (g > 0 || i == 0) qrels.add("q", docs.back(), g > 0 ? g : 1);
        }
        std::shuffle(docs.begin(), docs.end(), rng);
        const lion::Run before = make_run("q", docs);
        const double n0 = ndcg_at_k(before, qrels, 10).mean;
        const double m0 = mrr_at_k(before, qrels, 10).mean;
        EXPECT_GE(n0, 0.0);
        EXPECT_LE(n0, 1.0);
        for (std::size_t i = 1; i < docs.size(); ++i) {
            if (qrels.grade("q", docs[i]) >= 1 && qrels.grade("q", docs[i - 1]) == 0) {
                auto swapped = docs;
                std::swap(swapped[i], swapped[i - 1]);
                const lion::Run after = make_run("q", swapped);
                EXPECT_GE(ndcg_at_k(after, qrels, 10).mean, n0);
                EXPECT_GE(mrr_at_k(after, qrels, 10).mean, m0);
            }
        }
    }
}

TEST(TTest, IdenticalVectors) {
    const std::vector<double> a{0.1, 0.4, 0.3};
    const auto r = paired_t_test(a, a, 1);
    EXPECT_EQ(r.t, 0.0);
    EXPECT_EQ(r.p, 1.0);
    EXPECT_FALSE(r.significant);
}

TEST(TTest, ZeroVarianceNonzeroMean) {
    const std::vector<double> a{2, 3, 4, 5};
    const std::vector<double> b{1, 2, 3, 4};
    const auto r = paired_t_test(a, b, 3);
    EXPECT_TRUE(std::isinf(r.t));
    EXPECT_EQ(r.p, 0.0);
    EXPECT_TRUE(r.significant);
}

TEST(TTest, MatchesReferenceDistribution) {
    const std::vector<double> diffs{0.1, -0.05, 0.2, 0.15, 0.0};
    const std::vector<double> zeros(diffs.size(), 0.0);
    const auto r = paired_t_test(diffs, zeros, 1);
    EXPECT_NEAR(r.p, boost_two_sided_p(r.t, 4.0), 1e-10);
    // scipy.stats.ttest_rel on the same vectors.
    EXPECT_NEAR(r.t, 1.7253243712550146, 1e-12);
    EXPECT_NEAR(r.p, 0.1595528526983939, 1e-10);
    EXPECT_FALSE(r.significant);
}

TEST(TTest, IncompleteBetaAgainstBoostOverGrid) {
    for (double dof : {1.0, 2.0, 3.0, 4.0, 9.0, 29.0, 49.0, 199.0}) {
        for (double t : {0.0, 0.01, 0.3, 1.0, 1.7, 2.5, 4.0, 8.0, 25.0}) {
            EXPECT_NEAR(student_t_two_sided_p(t, dof), boost_two_sided_p(t, dof), 1e-10) << "t=" << t << " dof=" << dof;
        }
    }
}

TEST(TTest, SymmetryAndBonferroni) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(8), b(8);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = normal(rng) + 0.8;
            b[i] = normal(rng);
        }
        const auto ab = paired_t_test(a, b, 1);
        const auto ba = paired_t_test(b, a, 1);
        EXPECT_EQ(ab.t, -ba.t);
        EXPECT_NEAR(ab.p, ba.p, 1e-15);
        for (std::size_t m : {1u, 2u, 5u, 12u}) {
            const auto r = paired_t_test(a, b, m);
            EXPECT_EQ(r.alpha, 0.01 / static_cast<double>(m));
            EXPECT_EQ(r.significant, ab.p < 0.01 / static_cast<double>(m));
        }
    }
}

TEST(TTest, Preconditions) {
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    EXPECT_THROW(paired_t_test(one, one, 1), ContractError);
    EXPECT_THROW(paired_t_test(two, one, 1), ContractError);
    EXPECT_THROW(paired_t_test(two, two, 0), ContractError);
}

TEST(TrecIo, ParsesRunLine) {
    std::istringstream in("7 Q0 d12 1 5.25 lion\n");
    const lion::Run run = parse_run(in, "mem");
    ASSERT_EQ(run.rankings.at("7").size(), 1u);
    EXPECT_EQ(run.rankings.at("7")[0].doc_id, "d12");
    EXPECT_EQ(run.rankings.at("7")[0].score, 5.25);
    EXPECT_EQ(run.tag, "lion");
}

TEST(TrecIo, RankGapIsParseErrorWithLine) {
    std::istringstream in("q Q0 a 1 2.0 x\nq Q0 b 3 1.0 x\n");
    try {
        parse_run(in, "mem");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(TrecIo, DuplicateDocAndMalformedLine) {
    std::istringstream dup("q Q0 a 1 2.0 x\nq Q0 a 2 1.0 x\n");
    EXPECT_THROW(parse_run(dup, "mem"), ParseError);
    std::istringstream bad("q Q0 a one 2.0 x\n");
    EXPECT_THROW(parse_run(bad, "mem"), ParseError);
    std::istringstream rising("q Q0 a 1 1.0 x\nq Q0 b 2 3.0 x\n");
    EXPECT_THROW(parse_run(rising, "mem"), ParseError);
}

TEST(TrecIo, FuzzedRunRoundTrip) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-50.0, 50.0);
    const auto path = temp_path("run.txt");
    for (int trial = 0; trial < 50; ++trial) {
        lion::Run run;
        run.tag = "lion-sparse-d32l2";
        const int queries = 1 + static_cast<int>(rng() % 6);
        for (int q = 0; q < queries; ++q) {
            std::vector<double> scores(rng() % 12);
            for (auto& s : scores) s = uni(rng);
            std::sort(scores.rbegin(), scores.rend());
            auto& ranking = run.rankings["q" + std::to_string(q)];
            for (std::size_t i = 0; i < scores.size(); ++i) ranking.push_back({"d" + std::to_string(rng() % 1000) + "_" + std::to_string(i), scores[i]});
        }
        std::erase_if(run.rankings, [](const auto& kv) { return kv.second.empty(); });
        write_run(path, run);
        EXPECT_EQ(read_run(path), run);
    }
    std::filesystem::remove(path);
}

TEST(TrecIo, QrelsRoundTripAndDuplicates) {
    Qrels qrels;
    qrels.add("1", "a", 2);
    qrels.add("1", "b", 0);
    qrels.add("2", "c", 1);
    const auto path = temp_path("qrels.txt");
    write_qrels(path, qrels);
    EXPECT_EQ(read_qrels(path).judgments, qrels.judgments);
    {
        std::ofstream out(path);
        out << "1 0 a 1\n1 0 a 2\n";
    }
    EXPECT_THROW(read_qrels(path), ParseError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_qrels(path), InputError);
}

TEST(MetricReport, WritesLines) {
    Qrels qrels;
    qrels.add("q1", "a", 1);
    qrels.add("q2", "b", 1);
    lion::Run run = make_run("q1", {"a"});
    run.rankings["q2"] = {{"z", 2.0}, {"b", 1.0}};
    std::ostringstream out;
    write_metric_report(out, mrr_at_k(run, qrels, 10));
    EXPECT_EQ(out.str(), "q1\t1\nq2\t0.5\nall\t0.75\n");
}
