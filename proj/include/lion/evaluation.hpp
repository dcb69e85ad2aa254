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

// TREC-style evaluation: run/qrels exchange files, MRR@k, nDCG@k, and a paired
// t-test with Bonferroni-adjusted significance.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lion {

// query_id -> doc_id -> grade (>= 0).
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;

    void add(const std::string& query_id, const std::string& doc_id, int grade);
    int grade(const std::string& query_id, const std::string& doc_id) const;  // 0 when unjudged
    std::size_t size() const;
};

struct RunEntry {
    std::string doc_id;
    double score;
    friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

// Per query, entries in rank order (rank = index + 1).
struct Run {
    std::string tag;
    std::map<std::string, std::vector<RunEntry>> rankings;

    friend bool operator==(const Run&, const Run&) = default;
};

// `query_id 0 doc_id grade` per line.
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);

// `query_id Q0 doc_id rank score tag` per line. Ranks must be 1..n per query,
// scores non-increasing with rank, and doc ids unique within a query.
Run read_run(const std::filesystem::path& path);
Run parse_run(std::istream& in, const std::string& source);
void write_run(const std::filesystem::path& path, const Run& run);
void write_run(std::ostream& out, const Run& run);

struct MetricReport {
    std::string metric;
    std::size_t cutoff = 10;
    std::vector<std::pair<std::string, double>> per_query;  // query order of the qrels
    double mean = 0.0;
    // Queries that were scored 0 because the run lacks them, or that were
    // left out of the mean because they have nothing relevant to find.
    std::vector<std::string> missing_from_run;
    std::vector<std::string> excluded;

    std::vector<double> values() const;
};

enum class Gain { kExponential, kLinear };

MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k);
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k, Gain gain = Gain::kExponential);

// `query_id <TAB> value` lines followed by `all <TAB> mean`.
void write_metric_report(std::ostream& out, const MetricReport& report);

// Values of `b` re-ordered to the query order of `a`; both must cover the same queries.
std::pair<std::vector<double>, std::vector<double>> align_reports(const MetricReport& a, const MetricReport& b);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double alpha = 0.01;  // per-comparison threshold after Bonferroni
    bool significant = false;
    std::size_t n = 0;
};

// Two-sided paired t-test on a - b with n - 1 degrees of freedom; significant
// iff p < base_alpha / num_comparisons.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, std::size_t num_comparisons,
                          double base_alpha = 0.01);

// I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);
// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace lion
