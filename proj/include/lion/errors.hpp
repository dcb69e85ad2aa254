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

#include <stdexcept>
#include <string>

namespace lion {

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (e.g. log1p(x <= -1)).
class DomainError : public std::domain_error {
 public:
    using std::domain_error::domain_error;
};

// NaN / Inf where a finite value is required.
class NumericError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
    using std::logic_error::logic_error;
};

// Bad user-supplied data (empty corpus, unknown id, duplicate key, ...).
class InputError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

// Malformed line in a text exchange file.
class ParseError : public std::runtime_error {
 public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

 private:
    std::size_t line_;
};

// Invalid configuration value or missing configuration key.
class ConfigError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lion
