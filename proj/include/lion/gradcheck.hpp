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

#include <algorithm>
#include <cmath>
#include <functional>

#include "lion/tensor.hpp"

namespace lion {

// Compares the reverse-mode gradient of a scalar function against central
// differences, perturbing `param` in place one coordinate at a time.
// Returns max_i |analytic_i - numeric_i| / max(1e-8, |numeric_i|).
// `param` must be a leaf; its value is restored and its grad cleared on return.
template <typename Scalar>
Scalar finite_difference_check(const std::function<BasicTensor<Scalar>()>& f, BasicTensor<Scalar>& param, Scalar eps) {
    if (!(eps > Scalar(0))) throw ContractError("finite_difference_check: eps must be positive");
    if (!param.is_leaf()) throw ContractError("finite_difference_check: parameter must be a leaf tensor");

    const bool had_requires_grad = param.requires_grad();
    param.set_requires_grad(true);
    param.zero_grad();
    const BasicTensor<Scalar> y = f();
    if (y.rank() != 0) throw ContractError("finite_difference_check: function must return a scalar");
    if (!std::isfinite(y.item())) throw NumericError("finite_difference_check: non-finite function value");
    MatrixX<Scalar> analytic = MatrixX<Scalar>::Zero(param.value().rows(), param.value().cols());
    if (y.requires_grad()) {
        backward(y);
        analytic = param.grad();
    }
    param.zero_grad();

    Scalar worst = 0;
    {
        NoGradGuard no_grad;
        auto& values = param.mutable_value();
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            const Scalar original = values.data()[i];
            values.data()[i] = original + eps;
            const Scalar up = f().item();
            values.data()[i] = original - eps;
            const Scalar down = f().item();
            values.data()[i] = original;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw NumericError("finite_difference_check: non-finite function value");
            }
            const Scalar numeric = (up - down) / (Scalar(2) * eps);
            const Scalar err = std::abs(analytic.data()[i] - numeric) / std::max(Scalar(1e-8), std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    param.set_requires_grad(had_requires_grad);
    return worst;
}

// Variant for a function of a single tensor argument.
template <typename Scalar>
Scalar finite_difference_check(const std::function<BasicTensor<Scalar>(const BasicTensor<Scalar>&)>& f,
                               const BasicTensor<Scalar>& x, Scalar eps) {
    BasicTensor<Scalar> leaf = x.detach();
    return finite_difference_check<Scalar>([&]() { return f(leaf); }, leaf, eps);
}

}  // namespace lion
