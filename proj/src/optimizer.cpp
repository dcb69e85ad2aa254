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

#include <cmath>

#include "lion/errors.hpp"
#include "lion/optimizer.hpp"

namespace lion {

Adam::Adam(std::vector<NamedTensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
        m_.push_back(MatrixX<double>::Zero(p.tensor.value().rows(), p.tensor.value().cols()));
        v_.push_back(MatrixX<double>::Zero(p.tensor.value().rows(), p.tensor.value().cols()));
    }
}

void Adam::step(double learning_rate) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i].tensor;
        if (!p.has_grad()) continue;
        const auto& g = p.mutable_grad();
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        p.mutable_value().array() -=
            learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
    }
    zero_grad();
}

void Adam::zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
}

double Adam::grad_norm() const {
    double sq = 0.0;
    for (const auto& p : params_) {
        if (p.tensor.has_grad()) sq += p.tensor.grad().squaredNorm();
    }
    return std::sqrt(sq);
}

void Adam::restore(std::vector<MatrixX<double>> m, std::vector<MatrixX<double>> v, std::uint64_t t) {
    if (m.size() != params_.size() || v.size() != params_.size()) {
        throw ContractError("optimizer state does not match the parameter list");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& value = params_[i].tensor.value();
        if (m[i].rows() != value.rows() || m[i].cols() != value.cols() || v[i].rows() != value.rows() ||
            v[i].cols() != value.cols()) {
            throw ContractError("optimizer state shape mismatch for " + params_[i].name);
        }
    }
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

double warmup_learning_rate(double base, std::size_t update, std::size_t total_updates, double warmup_ratio) {
    const auto warmup = static_cast<std::size_t>(std::ceil(warmup_ratio * static_cast<double>(total_updates)));
    if (warmup == 0 || update >= warmup) return base;
    return base * static_cast<double>(update) / static_cast<double>(warmup);
}

}  // namespace lion
