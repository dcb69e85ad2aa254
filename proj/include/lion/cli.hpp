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

// Command-line pipeline: make-synthetic, pretrain, finetune, encode-index,
// search, evaluate. Exit codes: 0 success, 2 usage/config/input error,
// 1 runtime failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace lion {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for in-process callers; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lion
