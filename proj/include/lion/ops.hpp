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

// Differentiable operations on BasicTensor. Broadcasting is limited to a rank-0
// operand combined with a tensor of any shape; everything else must match.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lion/tensor.hpp"

namespace lion {

namespace detail {

template <typename Scalar>
using Node = detail::Node<Scalar>;

inline void require_rank(const Shape& shape, std::size_t rank, const char* op) {
    if (shape.size() != rank) {
        throw DimensionError(std::string(op) + " expects rank " + std::to_string(rank) + ", got " + shape_string(shape));
    }
}

template <typename Scalar>
void require_finite(const MatrixX<Scalar>& m, const char* op) {
    if (!m.allFinite()) throw NumericError(std::string(op) + ": non-finite input");
}

enum class Broadcast { kSame, kLeftScalar, kRightScalar };

template <typename Scalar>
Broadcast binary_broadcast(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b, const char* op) {
    if (a.shape() == b.shape()) return Broadcast::kSame;
    if (a.rank() == 0) return Broadcast::kLeftScalar;
    if (b.rank() == 0) return Broadcast::kRightScalar;
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
}

}  // namespace detail

template <typename Scalar>
BasicTensor<Scalar> add(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    using M = MatrixX<Scalar>;
    switch (detail::binary_broadcast(a, b, "add")) {
        case detail::Broadcast::kSame:
            return detail::make_result<Scalar>(a.shape(), a.value() + b.value(), "add", {a, b}, [](auto& self) {
                self.inputs[0]->accumulate(self.grad);
                self.inputs[1]->accumulate(self.grad);
            });
        case detail::Broadcast::kLeftScalar:
            return detail::make_result<Scalar>(b.shape(), (b.value().array() + a.item()).matrix(), "add", {a, b},
                                               [](auto& self) {
                                                   self.inputs[0]->accumulate(M::Constant(1, 1, self.grad.sum()));
                                                   self.inputs[1]->accumulate(self.grad);
                                               });
        case detail::Broadcast::kRightScalar:
        default:
            return detail::make_result<Scalar>(a.shape(), (a.value().array() + b.item()).matrix(), "add", {a, b},
                                               [](auto& self) {
                                                   self.inputs[0]->accumulate(self.grad);
                                                   self.inputs[1]->accumulate(M::Constant(1, 1, self.grad.sum()));
                                               });
    }
}

template <typename Scalar>
BasicTensor<Scalar> sub(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    using M = MatrixX<Scalar>;
    switch (detail::binary_broadcast(a, b, "sub")) {
        case detail::Broadcast::kSame:
            return detail::make_result<Scalar>(a.shape(), a.value() - b.value(), "sub", {a, b}, [](auto& self) {
                self.inputs[0]->accumulate(self.grad);
                self.inputs[1]->accumulate(-self.grad);
            });
        case detail::Broadcast::kLeftScalar:
            return detail::make_result<Scalar>(b.shape(), (a.item() - b.value().array()).matrix(), "sub", {a, b},
                                               [](auto& self) {
                                                   self.inputs[0]->accumulate(M::Constant(1, 1, self.grad.sum()));
                                                   self.inputs[1]->accumulate(-self.grad);
                                               });
        case detail::Broadcast::kRightScalar:
        default:
            return detail::make_result<Scalar>(a.shape(), (a.value().array() - b.item()).matrix(), "sub", {a, b},
                                               [](auto& self) {
                                                   self.inputs[0]->accumulate(self.grad);
                                                   self.inputs[1]->accumulate(M::Constant(1, 1, -self.grad.sum()));
                                               });
    }
}

// Elementwise (Hadamard) product.
template <typename Scalar>
BasicTensor<Scalar> mul(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    using M = MatrixX<Scalar>;
    switch (detail::binary_broadcast(a, b, "mul")) {
        case detail::Broadcast::kSame:
            return detail::make_result<Scalar>(
                a.shape(), a.value().cwiseProduct(b.value()), "mul", {a, b}, [](auto& self) {
                    auto& x = *self.inputs[0];
                    auto& y = *self.inputs[1];
                    x.accumulate(self.grad.cwiseProduct(y.value));
                    y.accumulate(self.grad.cwiseProduct(x.value));
                });
        case detail::Broadcast::kLeftScalar:
            return detail::make_result<Scalar>(b.shape(), b.value() * a.item(), "mul", {a, b}, [](auto& self) {
                auto& s = *self.inputs[0];
                auto& y = *self.inputs[1];
                s.accumulate(M::Constant(1, 1, self.grad.cwiseProduct(y.value).sum()));
                y.accumulate(self.grad * s.value(0, 0));
            });
        case detail::Broadcast::kRightScalar:
        default:
            return detail::make_result<Scalar>(a.shape(), a.value() * b.item(), "mul", {a, b}, [](auto& self) {
                auto& x = *self.inputs[0];
                auto& s = *self.inputs[1];
                x.accumulate(self.grad * s.value(0, 0));
                s.accumulate(M::Constant(1, 1, self.grad.cwiseProduct(x.value).sum()));
            });
    }
}

// Multiplication by a constant (no gradient to the constant).
template <typename Scalar>
BasicTensor<Scalar> scale(const BasicTensor<Scalar>& x, Scalar factor) {
    return detail::make_result<Scalar>(x.shape(), x.value() * factor, "scale", {x},
                                       [factor](auto& self) { self.inputs[0]->accumulate(self.grad * factor); });
}

template <typename Scalar>
BasicTensor<Scalar> operator+(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    return add(a, b);
}
template <typename Scalar>
BasicTensor<Scalar> operator-(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    return sub(a, b);
}
template <typename Scalar>
BasicTensor<Scalar> operator-(const BasicTensor<Scalar>& x) {
    return scale(x, Scalar(-1));
}
template <typename Scalar>
BasicTensor<Scalar> operator*(Scalar factor, const BasicTensor<Scalar>& x) {
    return scale(x, factor);
}
template <typename Scalar>
BasicTensor<Scalar> operator*(const BasicTensor<Scalar>& x, Scalar factor) {
    return scale(x, factor);
}

// relu'(0) is taken as 0.
template <typename Scalar>
BasicTensor<Scalar> relu(const BasicTensor<Scalar>& x) {
    return detail::make_result<Scalar>(x.shape(), x.value().cwiseMax(Scalar(0)), "relu", {x}, [](auto& self) {
        auto& in = *self.inputs[0];
        in.accumulate((in.value.array() > Scalar(0)).select(self.grad, Scalar(0)).matrix());
    });
}

template <typename Scalar>
BasicTensor<Scalar> log1p(const BasicTensor<Scalar>& x) {
    if ((x.value().array() <= Scalar(-1)).any()) throw DomainError("log1p: argument <= -1");
    MatrixX<Scalar> out = x.value().unaryExpr([](Scalar v) { return std::log1p(v); });
    return detail::make_result<Scalar>(x.shape(), std::move(out), "log1p", {x}, [](auto& self) {
        auto& in = *self.inputs[0];
        in.accumulate((self.grad.array() / (in.value.array() + Scalar(1))).matrix());
    });
}

template <typename Scalar>
BasicTensor<Scalar> exp(const BasicTensor<Scalar>& x) {
    MatrixX<Scalar> out = x.value().array().exp().matrix();
    return detail::make_result<Scalar>(x.shape(), std::move(out), "exp", {x}, [](auto& self) {
        self.inputs[0]->accumulate(self.grad.cwiseProduct(self.value));
    });
}

template <typename Scalar>
BasicTensor<Scalar> square(const BasicTensor<Scalar>& x) {
    return detail::make_result<Scalar>(x.shape(), x.value().cwiseAbs2(), "square", {x}, [](auto& self) {
        auto& in = *self.inputs[0];
        in.accumulate(Scalar(2) * self.grad.cwiseProduct(in.value));
    });
}

// ---------------------------------------------------------------------------
// Reductions

template <typename Scalar>
BasicTensor<Scalar> sum(const BasicTensor<Scalar>& x) {
    MatrixX<Scalar> out = MatrixX<Scalar>::Constant(1, 1, x.value().sum());
    return detail::make_result<Scalar>(Shape{}, std::move(out), "sum", {x}, [](auto& self) {
        auto& in = *self.inputs[0];
        in.accumulate(MatrixX<Scalar>::Constant(in.value.rows(), in.value.cols(), self.grad(0, 0)));
    });
}

namespace detail {

// Reduced shape and whether the reduction runs over storage rows (axis 0 of a
// matrix) or storage columns (axis 1 of a matrix, or the only axis of a vector).
inline Shape reduced_shape(const Shape& shape, std::size_t axis, const char* op) {
    if (axis >= shape.size()) {
        throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for " +
                             shape_string(shape));
    }
    Shape out = shape;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
    return out;
}

template <typename Scalar>
auto as_column_vector(const MatrixX<Scalar>& m) {
    return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(m.data(), m.size());
}

inline bool reduces_storage_rows(const Shape& shape, std::size_t axis) { return shape.size() == 2 && axis == 0; }

}  // namespace detail

template <typename Scalar>
BasicTensor<Scalar> sum_axis(const BasicTensor<Scalar>& x, std::size_t axis) {
    Shape out_shape = detail::reduced_shape(x.shape(), axis, "sum_axis");
    const bool over_rows = detail::reduces_storage_rows(x.shape(), axis);
    MatrixX<Scalar> out = over_rows ? MatrixX<Scalar>(x.value().colwise().sum())
                                    : MatrixX<Scalar>(x.value().rowwise().sum().transpose());
    if (out_shape.empty()) out.resize(1, 1);
    return detail::make_result<Scalar>(std::move(out_shape), std::move(out), "sum_axis", {x}, [over_rows](auto& self) {
        auto& in = *self.inputs[0];
        const auto g = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(self.grad.data(), self.grad.size());
        if (over_rows) {
            in.accumulate(g.replicate(in.value.rows(), 1));
        } else {
            in.accumulate(g.transpose().replicate(1, in.value.cols()));
        }
    });
}

template <typename Scalar>
BasicTensor<Scalar> mean_axis(const BasicTensor<Scalar>& x, std::size_t axis) {
    const Scalar n = static_cast<Scalar>(x.dim(axis));
    if (n == Scalar(0)) throw DimensionError("mean_axis over an empty axis");
    return scale(sum_axis(x, axis), Scalar(1) / n);
}

// Max along an axis. The gradient goes to a single argmax per slice: the
// lowest index when several entries tie.
template <typename Scalar>
BasicTensor<Scalar> max_axis(const BasicTensor<Scalar>& x, std::size_t axis) {
    Shape out_shape = detail::reduced_shape(x.shape(), axis, "max_axis");
    if (x.dim(axis) == 0) throw DimensionError("max_axis over an empty axis");
    const bool over_rows = detail::reduces_storage_rows(x.shape(), axis);
    const auto& v = x.value();
    const Eigen::Index slices = over_rows ? v.cols() : v.rows();
    const Eigen::Index extent = over_rows ? v.rows() : v.cols();
    std::vector<Eigen::Index> arg(static_cast<std::size_t>(slices), 0);
    MatrixX<Scalar> out(1, slices);
    for (Eigen::Index s = 0; s < slices; ++s) {
        Eigen::Index best = 0;
        Scalar best_v = over_rows ? v(0, s) : v(s, 0);
        for (Eigen::Index i = 1; i < extent; ++i) {
            const Scalar cur = over_rows ? v(i, s) : v(s, i);
            if (cur > best_v) {
                best_v = cur;
                best = i;
            }
        }
        arg[static_cast<std::size_t>(s)] = best;
        out(0, s) = best_v;
    }
    if (out_shape.empty()) out.resize(1, 1);
    return detail::make_result<Scalar>(std::move(out_shape), std::move(out), "max_axis", {x},
                                       [over_rows, arg = std::move(arg)](auto& self) {
                                           auto& in = *self.inputs[0];
                                           MatrixX<Scalar> g = MatrixX<Scalar>::Zero(in.value.rows(), in.value.cols());
                                           for (std::size_t s = 0; s < arg.size(); ++s) {
                                               const auto si = static_cast<Eigen::Index>(s);
                                               const Scalar gs = self.grad.data()[s];
                                               if (over_rows) {
                                                   g(arg[s], si) = gs;
                                               } else {
                                                   g(si, arg[s]) = gs;
                                               }
                                           }
                                           in.accumulate(g);
                                       });
}

// ---------------------------------------------------------------------------
// Linear algebra

template <typename Scalar>
BasicTensor<Scalar> matmul(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) + " by " + shape_string(b.shape()));
    }
    MatrixX<Scalar> out = a.value() * b.value();
    return detail::make_result<Scalar>(Shape{a.dim(0), b.dim(1)}, std::move(out), "matmul", {a, b}, [](auto& self) {
        auto& x = *self.inputs[0];
        auto& y = *self.inputs[1];
        if (x.requires_grad) x.accumulate(self.grad * y.value.transpose());
        if (y.requires_grad) y.accumulate(x.value.transpose() * self.grad);
    });
}

template <typename Scalar>
BasicTensor<Scalar> transpose(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 2, "transpose");
    MatrixX<Scalar> out = x.value().transpose();
    return detail::make_result<Scalar>(Shape{x.dim(1), x.dim(0)}, std::move(out), "transpose", {x},
                                       [](auto& self) { self.inputs[0]->accumulate(self.grad.transpose()); });
}

// Inner product of two rank-1 tensors.
template <typename Scalar>
BasicTensor<Scalar> dot(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
    if (a.rank() != 1 || a.shape() != b.shape()) {
        throw DimensionError("dot: incompatible shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    }
    MatrixX<Scalar> out = MatrixX<Scalar>::Constant(1, 1, a.value().row(0).dot(b.value().row(0)));
    return detail::make_result<Scalar>(Shape{}, std::move(out), "dot", {a, b}, [](auto& self) {
        auto& x = *self.inputs[0];
        auto& y = *self.inputs[1];
        const Scalar g = self.grad(0, 0);
        x.accumulate(y.value * g);
        y.accumulate(x.value * g);
    });
}

// ---------------------------------------------------------------------------
// Indexing and assembly

// Columns idx[0], idx[1], ... of a matrix; indices may repeat.
template <typename Scalar>
BasicTensor<Scalar> gather_columns(const BasicTensor<Scalar>& x, const std::vector<std::size_t>& idx) {
    detail::require_rank(x.shape(), 2, "gather_columns");
    const auto cols = static_cast<std::size_t>(x.value().cols());
    MatrixX<Scalar> out(x.value().rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= cols) {
            throw DimensionError("gather_columns: index " + std::to_string(idx[j]) + " out of range for " +
                                 shape_string(x.shape()));
        }
        out.col(static_cast<Eigen::Index>(j)) = x.value().col(static_cast<Eigen::Index>(idx[j]));
    }
    return detail::make_result<Scalar>(Shape{x.dim(0), idx.size()}, std::move(out), "gather_columns", {x},
                                       [idx](auto& self) {
                                           auto& in = *self.inputs[0];
                                           if (in.grad.size() == 0) in.grad.setZero(in.value.rows(), in.value.cols());
                                           for (std::size_t j = 0; j < idx.size(); ++j) {
                                               in.grad.col(static_cast<Eigen::Index>(idx[j])) +=
                                                   self.grad.col(static_cast<Eigen::Index>(j));
                                           }
                                       });
}

// Places column j of x at column positions[j] of a zero matrix with `total` columns.
template <typename Scalar>
BasicTensor<Scalar> scatter_columns(const BasicTensor<Scalar>& x, const std::vector<std::size_t>& positions,
                                    std::size_t total) {
    detail::require_rank(x.shape(), 2, "scatter_columns");
    if (positions.size() != x.dim(1)) throw DimensionError("scatter_columns: position count does not match columns");
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(x.value().rows(), static_cast<Eigen::Index>(total));
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (positions[j] >= total) throw DimensionError("scatter_columns: position out of range");
        out.col(static_cast<Eigen::Index>(positions[j])) = x.value().col(static_cast<Eigen::Index>(j));
    }
    return detail::make_result<Scalar>(Shape{x.dim(0), total}, std::move(out), "scatter_columns", {x},
                                       [positions](auto& self) {
                                           auto& in = *self.inputs[0];
                                           MatrixX<Scalar> g(in.value.rows(), in.value.cols());
                                           for (std::size_t j = 0; j < positions.size(); ++j) {
                                               g.col(static_cast<Eigen::Index>(j)) =
                                                   self.grad.col(static_cast<Eigen::Index>(positions[j]));
                                           }
                                           in.accumulate(g);
                                       });
}

template <typename Scalar>
BasicTensor<Scalar> slice_rows(const BasicTensor<Scalar>& x, std::size_t start, std::size_t count) {
    detail::require_rank(x.shape(), 2, "slice_rows");
    if (start + count > x.dim(0)) throw DimensionError("slice_rows: range out of bounds for " + shape_string(x.shape()));
    const auto s = static_cast<Eigen::Index>(start);
    const auto c = static_cast<Eigen::Index>(count);
    MatrixX<Scalar> out = x.value().middleRows(s, c);
    return detail::make_result<Scalar>(Shape{count, x.dim(1)}, std::move(out), "slice_rows", {x}, [s, c](auto& self) {
        auto& in = *self.inputs[0];
        if (in.grad.size() == 0) in.grad.setZero(in.value.rows(), in.value.cols());
        in.grad.middleRows(s, c) += self.grad;
    });
}

template <typename Scalar>
BasicTensor<Scalar> concat_rows(const std::vector<BasicTensor<Scalar>>& parts) {
    if (parts.empty()) throw DimensionError("concat_rows: no inputs");
    std::size_t rows = 0;
    const std::size_t cols = parts.front().rank() == 2 ? parts.front().dim(1) : 0;
    for (const auto& p : parts) {
        detail::require_rank(p.shape(), 2, "concat_rows");
        if (p.dim(1) != cols) throw DimensionError("concat_rows: column count mismatch");
        rows += p.dim(0);
    }
    MatrixX<Scalar> out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.middleRows(at, p.value().rows()) = p.value();
        at += p.value().rows();
    }
    return detail::make_result<Scalar>(Shape{rows, cols}, std::move(out), "concat_rows", parts, [](auto& self) {
        Eigen::Index offset = 0;
        for (auto& in : self.inputs) {
            const Eigen::Index r = in->value.rows();
            if (in->requires_grad) in->accumulate(self.grad.middleRows(offset, r));
            offset += r;
        }
    });
}

// Rank-0 tensors -> rank-1 tensor.
template <typename Scalar>
BasicTensor<Scalar> stack(const std::vector<BasicTensor<Scalar>>& scalars) {
    if (scalars.empty()) throw DimensionError("stack: no inputs");
    MatrixX<Scalar> out(1, static_cast<Eigen::Index>(scalars.size()));
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (scalars[i].rank() != 0) throw DimensionError("stack: expects rank-0 inputs");
        out(0, static_cast<Eigen::Index>(i)) = scalars[i].item();
    }
    return detail::make_result<Scalar>(Shape{scalars.size()}, std::move(out), "stack", scalars, [](auto& self) {
        for (std::size_t i = 0; i < self.inputs.size(); ++i) {
            self.inputs[i]->accumulate(MatrixX<Scalar>::Constant(1, 1, self.grad(0, static_cast<Eigen::Index>(i))));
        }
    });
}

// Rank-1 tensors of equal length -> matrix with one row per input.
template <typename Scalar>
BasicTensor<Scalar> stack_rows(const std::vector<BasicTensor<Scalar>>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows: no inputs");
    const Shape& first = rows.front().shape();
    for (const auto& r : rows) {
        if (r.rank() != 1 || r.shape() != first) {
            throw DimensionError("stack_rows: expects rank-1 inputs of equal length, got " + shape_string(r.shape()));
        }
    }
    MatrixX<Scalar> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(first[0]));
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].value();
    return detail::make_result<Scalar>(Shape{rows.size(), first[0]}, std::move(out), "stack_rows", rows,
                                       [](auto& self) {
                                           for (std::size_t i = 0; i < self.inputs.size(); ++i) {
                                               self.inputs[i]->accumulate(self.grad.row(static_cast<Eigen::Index>(i)));
                                           }
                                       });
}

// Element i of a rank-1 tensor as a rank-0 tensor.
template <typename Scalar>
BasicTensor<Scalar> element(const BasicTensor<Scalar>& x, std::size_t i) {
    detail::require_rank(x.shape(), 1, "element");
    if (i >= x.dim(0)) throw DimensionError("element: index out of range");
    const auto ii = static_cast<Eigen::Index>(i);
    return detail::make_result<Scalar>(Shape{}, MatrixX<Scalar>::Constant(1, 1, x.value()(0, ii)), "element", {x},
                                       [ii](auto& self) {
                                           auto& in = *self.inputs[0];
                                           if (in.grad.size() == 0) in.grad.setZero(in.value.rows(), in.value.cols());
                                           in.grad(0, ii) += self.grad(0, 0);
                                       });
}

// Reshape a rank-1 tensor of length n into an [n x 1] column.
template <typename Scalar>
BasicTensor<Scalar> as_column(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 1, "as_column");
    MatrixX<Scalar> out = x.value().transpose();
    return detail::make_result<Scalar>(Shape{x.dim(0), 1}, std::move(out), "as_column", {x},
                                       [](auto& self) { self.inputs[0]->accumulate(self.grad.transpose()); });
}

// Flatten an [n x 1] column into a rank-1 tensor.
template <typename Scalar>
BasicTensor<Scalar> column_as_vector(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 2, "column_as_vector");
    if (x.dim(1) != 1) throw DimensionError("column_as_vector: expects a single column, got " + shape_string(x.shape()));
    MatrixX<Scalar> out = x.value().transpose();
    return detail::make_result<Scalar>(Shape{x.dim(0)}, std::move(out), "column_as_vector", {x},
                                       [](auto& self) { self.inputs[0]->accumulate(self.grad.transpose()); });
}

// ---------------------------------------------------------------------------
// Normalizations

// Row-wise softmax. With `causal`, row i only covers columns 0..i (the rest
// are exactly 0); the matrix must then be square.
template <typename Scalar>
BasicTensor<Scalar> softmax_rows(const BasicTensor<Scalar>& x, bool causal) {
    detail::require_rank(x.shape(), 2, "softmax_rows");
    if (causal && x.dim(0) != x.dim(1)) throw DimensionError("softmax_rows: causal mask needs a square matrix");
    const auto& v = x.value();
    MatrixX<Scalar> out = MatrixX<Scalar>::Zero(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const Eigen::Index width = causal ? i + 1 : v.cols();
        const auto row = v.row(i).head(width);
        const Scalar m = row.maxCoeff();
        auto e = (row.array() - m).exp();
        out.row(i).head(width) = (e / e.sum()).matrix();
    }
    return detail::make_result<Scalar>(x.shape(), std::move(out), "softmax_rows", {x}, [](auto& self) {
        const auto& p = self.value;
        const auto dots = (self.grad.cwiseProduct(p)).rowwise().sum();
        MatrixX<Scalar> g = p.cwiseProduct((self.grad.colwise() - dots));
        self.inputs[0]->accumulate(g);
    });
}

// Scales each column to unit root-mean-square, then multiplies row d by gain[d].
template <typename Scalar>
BasicTensor<Scalar> rms_norm_columns(const BasicTensor<Scalar>& x, const BasicTensor<Scalar>& gain,
                                     Scalar eps = Scalar(1e-6)) {
    detail::require_rank(x.shape(), 2, "rms_norm_columns");
    if (gain.rank() != 1 || gain.dim(0) != x.dim(0)) {
        throw DimensionError("rms_norm_columns: gain " + shape_string(gain.shape()) + " does not fit " +
                             shape_string(x.shape()));
    }
    const auto& v = x.value();
    const Scalar d = static_cast<Scalar>(v.rows());
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> inv_rms =
        ((v.cwiseAbs2().colwise().sum().array() / d + eps).rsqrt()).matrix();
    MatrixX<Scalar> normalized = v * inv_rms.asDiagonal();
    MatrixX<Scalar> out = detail::as_column_vector<Scalar>(gain.value()).asDiagonal() * normalized;
    return detail::make_result<Scalar>(
        x.shape(), std::move(out), "rms_norm_columns", {x, gain},
        [inv_rms = std::move(inv_rms), normalized = std::move(normalized), d](auto& self) {
            auto& in = *self.inputs[0];
            auto& g = *self.inputs[1];
            if (g.requires_grad) {
                g.accumulate(self.grad.cwiseProduct(normalized).rowwise().sum().transpose());
            }
            if (in.requires_grad) {
                // dn = gain * dy; dx = inv_rms * (dn - n * mean_d(dn * n))
                MatrixX<Scalar> dn = detail::as_column_vector<Scalar>(g.value).asDiagonal() * self.grad;
                Eigen::Matrix<Scalar, 1, Eigen::Dynamic> proj = dn.cwiseProduct(normalized).colwise().sum() / d;
                MatrixX<Scalar> dx = (dn - normalized * proj.asDiagonal()) * inv_rms.asDiagonal();
                in.accumulate(dx);
            }
        });
}

// ---------------------------------------------------------------------------
// Log-space reductions over rank-1 tensors

template <typename Scalar>
Scalar stable_logsumexp(const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& row) {
    const Scalar m = row.maxCoeff();
    return m + std::log((row.array() - m).exp().sum());
}

template <typename Scalar>
BasicTensor<Scalar> logsumexp(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 1, "logsumexp");
    if (x.numel() == 0) throw DimensionError("logsumexp: empty input");
    if (x.value().hasNaN()) throw NumericError("logsumexp: NaN input");
    const Scalar lse = stable_logsumexp<Scalar>(x.value().row(0));
    return detail::make_result<Scalar>(Shape{}, MatrixX<Scalar>::Constant(1, 1, lse), "logsumexp", {x},
                                       [lse](auto& self) {
                                           auto& in = *self.inputs[0];
                                           in.accumulate(((in.value.array() - lse).exp() * self.grad(0, 0)).matrix());
                                       });
}

template <typename Scalar>
BasicTensor<Scalar> softmax(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 1, "softmax");
    if (x.numel() == 0) throw DimensionError("softmax: empty input");
    if (x.value().hasNaN()) throw NumericError("softmax: NaN input");
    const Scalar lse = stable_logsumexp<Scalar>(x.value().row(0));
    MatrixX<Scalar> p = (x.value().array() - lse).exp().matrix();
    return detail::make_result<Scalar>(x.shape(), std::move(p), "softmax", {x}, [](auto& self) {
        const Scalar inner = self.grad.cwiseProduct(self.value).sum();
        self.inputs[0]->accumulate(self.value.cwiseProduct((self.grad.array() - inner).matrix()));
    });
}

template <typename Scalar>
BasicTensor<Scalar> log_softmax(const BasicTensor<Scalar>& x) {
    detail::require_rank(x.shape(), 1, "log_softmax");
    if (x.numel() == 0) throw DimensionError("log_softmax: empty input");
    if (x.value().hasNaN()) throw NumericError("log_softmax: NaN input");
    const Scalar lse = stable_logsumexp<Scalar>(x.value().row(0));
    MatrixX<Scalar> out = (x.value().array() - lse).matrix();
    return detail::make_result<Scalar>(x.shape(), std::move(out), "log_softmax", {x}, [](auto& self) {
        const Scalar total = self.grad.sum();
        self.inputs[0]->accumulate((self.grad.array() - self.value.array().exp() * total).matrix());
    });
}

template <typename Scalar>
struct SoftmaxLse {
    BasicTensor<Scalar> probs;
    BasicTensor<Scalar> lse;
};

// Probabilities and log-partition of a score vector, both differentiable.
// Shifting by the max keeps exp() finite for any finite input.
template <typename Scalar>
SoftmaxLse<Scalar> softmax_logsumexp(const BasicTensor<Scalar>& x) {
    return {softmax(x), logsumexp(x)};
}

// Mean over columns j of -log softmax(logits[:, j])[targets[j]].
template <typename Scalar>
BasicTensor<Scalar> cross_entropy_columns(const BasicTensor<Scalar>& logits, const std::vector<std::size_t>& targets) {
    detail::require_rank(logits.shape(), 2, "cross_entropy_columns");
    if (targets.size() != logits.dim(1)) throw DimensionError("cross_entropy_columns: one target per column required");
    if (targets.empty()) throw ContractError("cross_entropy_columns: no targets");
    const auto& v = logits.value();
    MatrixX<Scalar> probs(v.rows(), v.cols());
    Scalar total = 0;
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        const auto t = targets[static_cast<std::size_t>(j)];
        if (t >= static_cast<std::size_t>(v.rows())) throw DimensionError("cross_entropy_columns: target out of range");
        const Scalar m = v.col(j).maxCoeff();
        const Scalar lse = m + std::log((v.col(j).array() - m).exp().sum());
        probs.col(j) = (v.col(j).array() - lse).exp().matrix();
        total += lse - v(static_cast<Eigen::Index>(t), j);
    }
    const Scalar count = static_cast<Scalar>(targets.size());
    return detail::make_result<Scalar>(Shape{}, MatrixX<Scalar>::Constant(1, 1, total / count), "cross_entropy", {logits},
                                       [probs = std::move(probs), targets, count](auto& self) {
                                           MatrixX<Scalar> g = probs;
                                           for (std::size_t j = 0; j < targets.size(); ++j) {
                                               g(static_cast<Eigen::Index>(targets[j]), static_cast<Eigen::Index>(j)) -= 1;
                                           }
                                           self.inputs[0]->accumulate(g * (self.grad(0, 0) / count));
                                       });
}

}  // namespace lion
