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
#include <limits>
#include <ostream>

#include "lion/errors.hpp"
#include "lion/evaluation.hpp"
#include "lion/io.hpp"

namespace lion {

std::vector<double> MetricReport::values() const {
    std::vector<double> out;
    out.reserve(per_query.size());
    for (const auto& [q, v] : per_query) out.push_back(v);
    return out;
}

namespace {

double mean_of(const std::vector<std::pair<std::string, double>>& values) {
    if (values.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [q, v] : values) total += v;
    return total / static_cast<double>(values.size());
}

double gain_of(int grade, Gain gain) {
    return gain == Gain::kExponential ? std::exp2(static_cast<double>(grade)) - 1.0 : static_cast<double>(grade);
}

}  // namespace

MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k) {
    if (k == 0) throw ContractError("metric cutoff must be >= 1");
    MetricReport report;
    report.metric = "mrr";
    report.cutoff = k;
    for (const auto& [query, docs] : qrels.judgments) {
        const bool any_relevant = std::any_of(docs.begin(), docs.end(), [](const auto& d) { return d.second >= 1; });
        if (!any_relevant) {
            report.excluded.push_back(query);
            continue;
        }
        const auto it = run.rankings.find(query);
        double value = 0.0;
        if (it == run.rankings.end()) {
            report.missing_from_run.push_back(query);
        } else {
            const auto& ranking = it->second;
            for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
                const auto g = docs.find(ranking[i].doc_id);
                if (g != docs.end() && g->second >= 1) {
                    value = 1.0 / static_cast<double>(i + 1);
                    break;
                }
            }
        }
        report.per_query.emplace_back(query, value);
    }
    report.mean = mean_of(report.per_query);
    return report;
}

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k, Gain gain) {
    if (k == 0) throw ContractError("metric cutoff must be >= 1");
    MetricReport report;
    report.metric = "ndcg";
    report.cutoff = k;
    for (const auto& [query, docs] : qrels.judgments) {
        std::vector<int> grades;
        for (const auto& [d, g] : docs) grades.push_back(g);
        std::sort(grades.begin(), grades.end(), std::greater<>());
        double ideal = 0.0;
        for (std::size_t i = 0; i < grades.size() && i < k; ++i) {
            ideal += gain_of(grades[i], gain) / std::log2(static_cast<double>(i + 2));
        }
        if (ideal <= 0.0) {
            report.excluded.push_back(query);
            continue;
        }
        const auto it = run.rankings.find(query);
        double dcg = 0.0;
        if (it == run.rankings.end()) {
            report.missing_from_run.push_back(query);
        } else {
            const auto& ranking = it->second;
            for (std::size_t i = 0; i < ranking.size() && i < k; ++i) {
                const auto g = docs.find(ranking[i].doc_id);
                if (g != docs.end()) dcg += gain_of(g->second, gain) / std::log2(static_cast<double>(i + 2));
            }
        }
        report.per_query.emplace_back(query, dcg / ideal);
    }
    report.mean = mean_of(report.per_query);
    return report;
}

void write_metric_report(std::ostream& out, const MetricReport& report) {
    for (const auto& [q, v] : report.per_query) out << q << '\t' << format_double(v) << '\n';
    out << "all\t" << format_double(report.mean) << '\n';
}

std::pair<std::vector<double>, std::vector<double>> align_reports(const MetricReport& a, const MetricReport& b) {
    std::map<std::string, double> lookup(b.per_query.begin(), b.per_query.end());
    if (lookup.size() != a.per_query.size()) throw InputError("metric reports cover different query sets");
    std::vector<double> va;
    std::vector<double> vb;
    for (const auto& [q, v] : a.per_query) {
        const auto it = lookup.find(q);
        if (it == lookup.end()) throw InputError("query " + q + " missing from the second report");
        va.push_back(v);
        vb.push_back(it->second);
    }
    return {va, vb};
}

// ---------------------------------------------------------------------------

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
    if (x < 0.0 || x > 1.0 || std::isnan(x)) throw DomainError("incomplete beta needs 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw DomainError("t distribution needs dof > 0");
    if (std::isnan(t)) throw NumericError("t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, std::size_t num_comparisons,
                          double base_alpha) {
    if (a.size() != b.size()) throw ContractError("paired t-test needs equally long samples");
    if (a.size() < 2) throw ContractError("paired t-test needs at least two pairs");
    if (num_comparisons == 0) throw ContractError("number of comparisons must be >= 1");
    TTestResult r;
    r.n = a.size();
    r.alpha = base_alpha / static_cast<double>(num_comparisons);
    const double n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) {
        if (mean == 0.0) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
    } else {
        r.t = mean / (sd / std::sqrt(n));
        r.p = student_t_two_sided_p(r.t, n - 1.0);
    }
    r.significant = r.p < r.alpha;
    return r;
}

}  // namespace lion
