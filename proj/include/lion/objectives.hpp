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

// Fine-tuning losses over student relevance scores. Scores are rank-0 (or
// rank-1 lists of rank-0) tensors so gradients reach the encoder; teacher
// scores are plain numbers and never receive gradients.

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lion/tensor.hpp"

namespace lion {

// -log(exp(s+) / (exp(s+) + sum exp(s-))), evaluated as logsumexp - s+.
Tensor cl_loss(const Tensor& s_pos, const std::vector<Tensor>& s_negs);
// Same loss on a rank-1 score list whose first entry is the positive.
Tensor cl_loss(const Tensor& scores);

// ((s+ - s-) - (t+ - t-))^2.
Tensor margin_mse_loss(const Tensor& s_pos, const Tensor& s_neg, double t_pos, double t_neg);

// KL(softmax(teacher / temperature) || softmax(student)) over one list.
Tensor kl_div_loss(const Tensor& student_scores, std::span<const double> teacher_scores, double temperature = 1.0);

// 0.5 * (cl + kd).
Tensor combined_loss(const Tensor& cl, const Tensor& kd);

// |multiset(q) ∩ multiset(d)| / sqrt(|q| |d|) * scale over tokenize()d texts.
double oracle_teacher_score(std::string_view query_text, std::string_view doc_text, double scale = 10.0);

class TeacherSource {
 public:
    virtual ~TeacherSource() = default;
    // Throws InputError for an uncovered pair.
    virtual double score(const std::string& query_id, const std::string& doc_id) const = 0;
};

// Scores read from `query_id <TAB> doc_id <TAB> score` lines.
class ScoreFileTeacher final : public TeacherSource {
 public:
    static ScoreFileTeacher load(const std::filesystem::path& path);
    void add(const std::string& query_id, const std::string& doc_id, double score);
    double score(const std::string& query_id, const std::string& doc_id) const override;
    std::size_t size() const { return scores_.size(); }

 private:
    std::map<std::pair<std::string, std::string>, double> scores_;
};

// Lexical-overlap stand-in for a cross-encoder, computed on demand.
class OracleTeacher final : public TeacherSource {
 public:
    OracleTeacher(std::unordered_map<std::string, std::string> query_texts,
                  std::unordered_map<std::string, std::string> doc_texts, double scale = 10.0);
    double score(const std::string& query_id, const std::string& doc_id) const override;

 private:
    std::unordered_map<std::string, std::string> queries_;
    std::unordered_map<std::string, std::string> docs_;
    double scale_;
};

void write_teacher_scores(const std::filesystem::path& path,
                          const std::vector<std::tuple<std::string, std::string, double>>& rows);

}  // namespace lion
