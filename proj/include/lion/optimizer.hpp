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

#include <cstdint>
#include <vector>

#include "lion/encoder.hpp"

namespace lion {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam without weight decay. Bound to a fixed parameter list;
// moments are stored in the same order.
class Adam {
 public:
    explicit Adam(std::vector<NamedTensor> params, AdamConfig config = {});

    // Applies one update from the parameters' accumulated gradients, then clears them.
    void step(double learning_rate);
    void zero_grad();
    // L2 norm over every parameter gradient.
    double grad_norm() const;

    std::uint64_t steps() const { return t_; }
    const std::vector<NamedTensor>& parameters() const { return params_; }
    const std::vector<MatrixX<double>>& first_moments() const { return m_; }
    const std::vector<MatrixX<double>>& second_moments() const { return v_; }
    void restore(std::vector<MatrixX<double>> m, std::vector<MatrixX<double>> v, std::uint64_t t);

 private:
    std::vector<NamedTensor> params_;
    AdamConfig config_;
    std::vector<MatrixX<double>> m_;
    std::vector<MatrixX<double>> v_;
    std::uint64_t t_ = 0;
};

// Linear warmup over ceil(ratio * total) updates, constant afterwards.
// `update` is 1-based.
double warmup_learning_rate(double base, std::size_t update, std::size_t total_updates, double warmup_ratio);

}  // namespace lion
