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

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lion {

// Writes through a sibling temporary file and renames it over `path`, so a
// failed write never leaves a truncated file or clobbers the previous one.
void write_file_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer,
                           bool binary = false);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
// printf("%.{digits}g").
std::string format_significant(double v, int digits);

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace lion
