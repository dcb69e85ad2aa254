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

#include <fstream>
#include <set>
#include <sstream>

#include "lion/errors.hpp"
#include "lion/evaluation.hpp"
#include "lion/io.hpp"

namespace lion {

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw InputError("qrels grade must be >= 0");
    if (!judgments[query_id].emplace(doc_id, grade).second) {
        throw InputError("duplicate qrels pair (" + query_id + ", " + doc_id + ")");
    }
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    const auto q = judgments.find(query_id);
    if (q == judgments.end()) return 0;
    const auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
}

std::size_t Qrels::size() const {
    std::size_t n = 0;
    for (const auto& [q, docs] : judgments) n += docs.size();
    return n;
}

Qrels read_qrels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open qrels file " + path.string());
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto f = split_whitespace(line);
        if (f.empty()) continue;
        if (f.size() != 4) throw ParseError(path.string(), lineno, "expected 'query_id 0 doc_id grade'");
        long long grade = 0;
        try {
            grade = parse_int(f[3]);
        } catch (const std::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
        if (grade < 0) throw ParseError(path.string(), lineno, "negative grade");
        try {
            qrels.add(std::string(f[0]), std::string(f[2]), static_cast<int>(grade));
        } catch (const InputError& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return qrels;
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
    write_file_atomically(path, [&](std::ostream& out) {
        for (const auto& [q, docs] : qrels.judgments) {
            for (const auto& [d, g] : docs) out << q << " 0 " << d << ' ' << g << '\n';
        }
    });
}

Run parse_run(std::istream& in, const std::string& source) {
    struct Line {
        long long rank;
        RunEntry entry;
        std::size_t lineno;
    };
    std::map<std::string, std::vector<Line>> pending;
    Run run;
    bool have_tag = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto f = split_whitespace(line);
        if (f.empty()) continue;
        if (f.size() != 6) throw ParseError(source, lineno, "expected 'query_id Q0 doc_id rank score tag'");
        Line parsed{0, {std::string(f[2]), 0.0}, lineno};
        try {
            parsed.rank = parse_int(f[3]);
            parsed.entry.score = parse_double(f[4]);
        } catch (const std::exception& e) {
            throw ParseError(source, lineno, e.what());
        }
        if (!have_tag) {
            run.tag = std::string(f[5]);
            have_tag = true;
        }
        pending[std::string(f[0])].push_back(std::move(parsed));
    }
    for (auto& [query, lines] : pending) {
        std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.rank < b.rank; });
        std::set<std::string> seen;
        auto& ranking = run.rankings[query];
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const auto& l = lines[i];
            if (l.rank != static_cast<long long>(i + 1)) {
                throw ParseError(source, l.lineno,
                                 "rank " + std::to_string(l.rank) + " for query " + query + " breaks contiguity (expected " +
                                     std::to_string(i + 1) + ")");
            }
            if (!seen.insert(l.entry.doc_id).second) {
                throw ParseError(source, l.lineno, "duplicate document " + l.entry.doc_id + " for query " + query);
            }
            if (i > 0 && l.entry.score > lines[i - 1].entry.score) {
                throw ParseError(source, l.lineno, "score increases with rank for query " + query);
            }
            ranking.push_back(l.entry);
        }
    }
    return run;
}

Run read_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open run file " + path.string());
    return parse_run(in, path.string());
}

void write_run(std::ostream& out, const Run& run) {
    const std::string tag = run.tag.empty() ? "lion" : run.tag;
    for (const auto& [query, ranking] : run.rankings) {
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            out << query << " Q0 " << ranking[i].doc_id << ' ' << (i + 1) << ' ' << format_double(ranking[i].score)
                << ' ' << tag << '\n';
        }
    }
}

void write_run(const std::filesystem::path& path, const Run& run) {
    write_file_atomically(path, [&](std::ostream& out) { write_run(out, run); });
}

}  // namespace lion
