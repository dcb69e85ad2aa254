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

#include "lion/objectives.hpp"

#include <cmath>
#include <fstream>
#include <tuple>

#include "lion/errors.hpp"
#include "lion/io.hpp"
#include "lion/ops.hpp"
#include "lion/vocabulary.hpp"

namespace lion {

Tensor cl_loss(const Tensor& s_pos, const std::vector<Tensor>& s_negs) {
    if (s_negs.empty()) throw ContractError("cl_loss needs at least one negative");
    std::vector<Tensor> all;
    all.reserve(s_negs.size() + 1);
    all.push_back(s_pos);
    all.insert(all.end(), s_negs.begin(), s_negs.end());
    return cl_loss(stack(all));
}

Tensor cl_loss(const Tensor& scores) {
    if (scores.rank() != 1 || scores.dim(0) < 2) throw ContractError("cl_loss needs a positive and >= 1 negative");
    if (!scores.value().allFinite()) throw NumericError("cl_loss: non-finite score");
    return logsumexp(scores) - element(scores, 0);
}

Tensor margin_mse_loss(const Tensor& s_pos, const Tensor& s_neg, double t_pos, double t_neg) {
    if (!std::isfinite(s_pos.item()) || !std::isfinite(s_neg.item()) || !std::isfinite(t_pos) ||
        !std::isfinite(t_neg)) {
        throw NumericError("margin_mse_loss: non-finite input");
    }
    const Tensor diff = (s_pos - s_neg) - Tensor::scalar(t_pos - t_neg);
    return square(diff);
}

Tensor kl_div_loss(const Tensor& student_scores, std::span<const double> teacher_scores, double temperature) {
    if (student_scores.rank() != 1 || student_scores.dim(0) != teacher_scores.size()) {
        throw ContractError("kl_div_loss: student list of " + shape_string(student_scores.shape()) +
                            " vs teacher list of " + std::to_string(teacher_scores.size()));
    }
    if (teacher_scores.size() < 2) throw ContractError("kl_div_loss needs lists of length >= 2");
    if (!(temperature > 0)) throw ContractError("kl_div_loss: temperature must be positive");
    if (!student_scores.value().allFinite()) throw NumericError("kl_div_loss: non-finite student score");

    Eigen::Matrix<double, 1, Eigen::Dynamic> t(static_cast<Eigen::Index>(teacher_scores.size()));
    for (std::size_t i = 0; i < teacher_scores.size(); ++i) {
        if (!std::isfinite(teacher_scores[i])) throw NumericError("kl_div_loss: non-finite teacher score");
        t(static_cast<Eigen::Index>(i)) = teacher_scores[i] / temperature;
    }
    const double t_lse = stable_logsumexp<double>(t);
    const Eigen::Matrix<double, 1, Eigen::Dynamic> log_p = t.array() - t_lse;
    const Eigen::Matrix<double, 1, Eigen::Dynamic> p = log_p.array().exp();
    // sum p log p is a constant; only the cross term carries gradient.
    double entropy_term = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) entropy_term += p(i) * log_p(i);
    }
    const Tensor weights = Tensor::from_data({teacher_scores.size()}, std::span<const double>(p.data(), p.size()));
    const Tensor cross = sum(mul(weights, log_softmax(student_scores)));
    return Tensor::scalar(entropy_term) - cross;
}

Tensor combined_loss(const Tensor& cl, const Tensor& kd) { return scale(cl + kd, 0.5); }

double oracle_teacher_score(std::string_view query_text, std::string_view doc_text, double scale) {
    const auto q = tokenize(query_text);
    const auto d = tokenize(doc_text);
    if (q.empty() || d.empty()) throw InputError("oracle teacher: empty text");
    std::unordered_map<std::string, std::size_t> doc_counts;
    for (const auto& t : d) ++doc_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : q) {
        auto it = doc_counts.find(t);
        if (it != doc_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    return scale * static_cast<double>(overlap) / std::sqrt(static_cast<double>(q.size() * d.size()));
}

ScoreFileTeacher ScoreFileTeacher::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open teacher score file " + path.string());
    ScoreFileTeacher teacher;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(trim(line), '\t');
        if (fields.size() != 3) throw ParseError(path.string(), lineno, "expected query_id<TAB>doc_id<TAB>score");
        double s = 0;
        try {
            s = parse_double(fields[2]);
        } catch (const std::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
        if (!std::isfinite(s)) throw ParseError(path.string(), lineno, "non-finite score");
        const auto key = std::make_pair(std::string(fields[0]), std::string(fields[1]));
        if (!teacher.scores_.emplace(key, s).second) {
            throw ParseError(path.string(), lineno, "duplicate pair (" + key.first + ", " + key.second + ")");
        }
    }
    return teacher;
}

void ScoreFileTeacher::add(const std::string& query_id, const std::string& doc_id, double score) {
    if (!std::isfinite(score)) throw InputError("teacher score must be finite");
    if (!scores_.emplace(std::make_pair(query_id, doc_id), score).second) {
        throw InputError("duplicate teacher pair (" + query_id + ", " + doc_id + ")");
    }
}

double ScoreFileTeacher::score(const std::string& query_id, const std::string& doc_id) const {
    const auto it = scores_.find({query_id, doc_id});
    if (it == scores_.end()) throw InputError("no teacher score for (" + query_id + ", " + doc_id + ")");
    return it->second;
}

OracleTeacher::OracleTeacher(std::unordered_map<std::string, std::string> query_texts,
                             std::unordered_map<std::string, std::string> doc_texts, double scale)
    : queries_(std::move(query_texts)), docs_(std::move(doc_texts)), scale_(scale) {}

double OracleTeacher::score(const std::string& query_id, const std::string& doc_id) const {
    const auto q = queries_.find(query_id);
    const auto d = docs_.find(doc_id);
    if (q == queries_.end() || d == docs_.end()) {
        throw InputError("oracle teacher: unknown pair (" + query_id + ", " + doc_id + ")");
    }
    return oracle_teacher_score(q->second, d->second, scale_);
}

void write_teacher_scores(const std::filesystem::path& path,
                          const std::vector<std::tuple<std::string, std::string, double>>& rows) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& [q, d, s] : rows) out << q << '\t' << d << '\t' << format_double(s) << '\n';
    });
}

}  // namespace lion
