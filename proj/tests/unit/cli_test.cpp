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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lion/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result lion_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = lion::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

// Value printed on a `key<TAB>value` line of command output.
std::string field(const std::string& out, const std::string& key) {
    std::istringstream in(out);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "\t", 0) == 0) return line.substr(key.size() + 1);
    }
    return {};
}

class CliTest : public ::testing::Test {
 protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("lion_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void make_data() {
        const auto r = lion_cli({"make-synthetic", "--out-dir", dir_.string(), "--vocab-size", "60", "--doc-count", "40",
                                 "--doc-length", "6", "--query-length", "3", "--train-queries", "12",
                                 "--test-queries", "6", "--seed", "5"});
        ASSERT_EQ(r.code, 0) << r.err;
    }

    std::vector<std::string> finetune_args(const std::string& ckpt, const std::string& objective = "cl",
                                           const std::string& paradigm = "sparse") const {
        return {"finetune", "--corpus", path("corpus.jsonl"), "--queries", path("train_queries.jsonl"),
                "--qrels", path("train_qrels.txt"), "--negatives", path("train_negatives.tsv"),
                "--checkpoint", ckpt, "--objective", objective, "--paradigm", paradigm,
                "--dim", "16", "--layers", "1", "--heads", "2", "--max-len", "16",
                "--batch-size", "4", "--num-negatives", "2", "--max-steps", "4", "--learning-rate", "1e-3",
                "--epochs", "2", "--seed", "11"};
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MakeSyntheticWritesEveryFile) {
    make_data();
    for (const char* f : {"corpus.jsonl", "train_queries.jsonl", "train_qrels.txt", "test_queries.jsonl",
                          "test_qrels.txt", "train_negatives.tsv"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
}

TEST_F(CliTest, MissingCorpusNamesThePath) {
    const auto r = lion_cli({"pretrain", "--corpus", path("nope.jsonl"), "--pretrain-checkpoint", path("p.ckpt")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find(path("nope.jsonl")), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(lion_cli({}).code, 2);
    EXPECT_EQ(lion_cli({"frobnicate"}).code, 2);
    EXPECT_EQ(lion_cli({"evaluate", "--bogus", "1"}).code, 2);
    EXPECT_EQ(lion_cli({"evaluate", "--help"}).code, 0);
}

TEST_F(CliTest, KdWithoutTeacherIsAConfigError) {
    make_data();
    const auto r = lion_cli(finetune_args(path("kd.ckpt"), "kd_margin_mse"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("teacher"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("kd.ckpt")));
}

TEST_F(CliTest, PipelineRunsAndExhaustiveMatchesIndex) {
    make_data();
    auto r = lion_cli(finetune_args(path("sp.ckpt")));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(field(r.out, "steps"), "4");
    r = lion_cli({"encode-index", "--checkpoint", path("sp.ckpt"), "--corpus", path("corpus.jsonl"), "--paradigm",
                  "sparse", "--index", path("sp.idx")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(field(r.out, "docs"), "40");

    const std::vector<std::string> search{"search", "--index", path("sp.idx"), "--checkpoint", path("sp.ckpt"),
                                          "--queries", path("test_queries.jsonl")};
    auto with = [&](std::vector<std::string> extra) {
        auto a = search;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    r = lion_cli(with({"--run", path("a.run")}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(field(r.out, "tag").rfind("lion-sparse-", 0), 0u);
    r = lion_cli(with({"--run", path("b.run"), "--exhaustive", "true"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("a.run")), slurp(path("b.run")));

    // Default cutoff is 10 lines per query; --k narrows it.
    std::istringstream lines(slurp(path("a.run")));
    std::map<std::string, int> per_query;
    std::string line;
    while (std::getline(lines, line)) ++per_query[line.substr(0, line.find(' '))];
    ASSERT_EQ(per_query.size(), 6u);
    for (const auto& [q, n] : per_query) EXPECT_EQ(n, 10) << q;
    r = lion_cli(with({"--run", path("c.run"), "--k", "3"}));
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream short_lines(slurp(path("c.run")));
    int count = 0;
    while (std::getline(short_lines, line)) ++count;
    EXPECT_EQ(count, 18);

    r = lion_cli({"evaluate", "--run", path("a.run"), "--qrels", path("test_qrels.txt"), "--report",
                  path("report.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(field(r.out, "all").empty());
    EXPECT_EQ(slurp(path("report.tsv")), r.out);
}

TEST_F(CliTest, DenseCheckpointRejectsSparseIndexing) {
    make_data();
    ASSERT_EQ(lion_cli(finetune_args(path("de.ckpt"), "cl", "dense")).code, 0);
    const auto r = lion_cli({"encode-index", "--checkpoint", path("de.ckpt"), "--corpus", path("corpus.jsonl"),
                             "--paradigm", "sparse", "--index", path("x.idx")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("dense"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmptyCorpusCannotBeIndexed) {
    make_data();
    ASSERT_EQ(lion_cli(finetune_args(path("sp.ckpt"))).code, 0);
    spit(path("empty.jsonl"), "");
    const auto r = lion_cli({"encode-index", "--checkpoint", path("sp.ckpt"), "--corpus", path("empty.jsonl"),
                             "--paradigm", "sparse", "--index", path("x.idx")});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(path("x.idx")));
}

TEST_F(CliTest, SameSeedGivesIdenticalCheckpoints) {
    make_data();
    ASSERT_EQ(lion_cli(finetune_args(path("a.ckpt"))).code, 0);
    ASSERT_EQ(lion_cli(finetune_args(path("b.ckpt"))).code, 0);
    EXPECT_EQ(slurp(path("a.ckpt")), slurp(path("b.ckpt")));
    auto args = finetune_args(path("c.ckpt"));
    args.back() = "12";
    ASSERT_EQ(lion_cli(args).code, 0);
    EXPECT_NE(slurp(path("a.ckpt")), slurp(path("c.ckpt")));
}

TEST_F(CliTest, CombinedObjectiveLogsBothComponents) {
    make_data();
    auto args = finetune_args(path("ck.ckpt"), "cl_plus_kd");
    args.insert(args.end(), {"--oracle-teacher", "true", "--log", path("train.log")});
    const auto r = lion_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream log(slurp(path("train.log")));
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) {
        ++lines;
        EXPECT_NE(line.find("\"cl\":"), std::string::npos) << line;
        EXPECT_NE(line.find("\"kd\":"), std::string::npos) << line;
        EXPECT_NE(line.find("\"mean_nonzeros\":"), std::string::npos) << line;
    }
    EXPECT_EQ(lines, 4);
}

TEST_F(CliTest, PretrainThenFinetune) {
    make_data();
    auto r = lion_cli({"pretrain", "--corpus", path("corpus.jsonl"), "--pretrain-checkpoint", path("p.ckpt"),
                       "--pretrain-log", path("p.log"), "--dim", "16", "--layers", "1", "--heads", "2", "--max-len",
                       "16", "--max-steps", "3", "--batch-size", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(slurp(path("p.log")).find("\"mntp\":"), std::string::npos);
    auto args = finetune_args(path("f.ckpt"));
    args.insert(args.end(), {"--pretrain-checkpoint", path("p.ckpt")});
    r = lion_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("ignored"), std::string::npos);
}

TEST_F(CliTest, ManifestSectionsAndUnknownKeys) {
    make_data();
    spit(path("m.cfg"), "dim = 16\nlayers = 1\nheads = 2\nmax_len = 16\nbatch_size = 4\nmax_steps = 2\n"
                        "finetune.max_steps = 3\nevaluate.k = 5\n");
    const auto r = lion_cli({"finetune", "--config", path("m.cfg"), "--corpus", path("corpus.jsonl"), "--queries",
                             path("train_queries.jsonl"), "--qrels", path("train_qrels.txt"), "--checkpoint",
                             path("m.ckpt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(field(r.out, "steps"), "3");
    spit(path("bad.cfg"), "dimm = 16\n");
    EXPECT_EQ(lion_cli({"finetune", "--config", path("bad.cfg")}).code, 2);
}

TEST_F(CliTest, EvaluateHandFixture) {
    spit(path("qrels.txt"), "q1 0 d1 1\nq1 0 d3 2\nq2 0 d2 1\n");
    spit(path("perfect.run"), "q1 Q0 d3 1 3.0 t\nq1 Q0 d1 2 2.0 t\nq2 Q0 d2 1 1.0 t\n");
    spit(path("mixed.run"), "q1 Q0 d9 1 3.0 t\nq1 Q0 d1 2 2.0 t\nq2 Q0 d2 1 1.0 t\n");

    auto r = lion_cli({"evaluate", "--run", path("perfect.run"), "--qrels", path("qrels.txt"), "--metric", "ndcg"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::stod(field(r.out, "all")), 1.0);

    r = lion_cli({"evaluate", "--run", path("mixed.run"), "--qrels", path("qrels.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::stod(field(r.out, "q1")), 0.5);
    EXPECT_EQ(std::stod(field(r.out, "q2")), 1.0);
    EXPECT_EQ(std::stod(field(r.out, "all")), 0.75);

    r = lion_cli({"evaluate", "--run", path("mixed.run"), "--qrels", path("qrels.txt"), "--run-b",
                  path("mixed.run"), "--m", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::stod(field(r.out, "t")), 0.0);
    EXPECT_EQ(std::stod(field(r.out, "p")), 1.0);
    EXPECT_EQ(field(r.out, "significant"), "no");

    EXPECT_EQ(lion_cli({"evaluate", "--run", path("mixed.run"), "--qrels", path("qrels.txt"), "--run-b",
                        path("mixed.run")})
                  .code,
              2);
    EXPECT_EQ(lion_cli({"evaluate", "--run", path("mixed.run"), "--qrels", path("qrels.txt"), "--metric", "map"})
                  .code,
              2);
    spit(path("broken.run"), "q1 Q0 d1 2 3.0 t\n");
    EXPECT_EQ(lion_cli({"evaluate", "--run", path("broken.run"), "--qrels", path("qrels.txt")}).code, 2);
}
