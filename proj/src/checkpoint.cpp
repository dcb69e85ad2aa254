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

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>
#include <fstream>

#include "lion/checkpoint.hpp"
#include "lion/errors.hpp"
#include "lion/io.hpp"

namespace lion {

namespace {

constexpr char kMagic[] = "LIONCKPT";
constexpr std::uint32_t kVersion = 1;

StoredTensor store(const std::string& name, const MatrixX<double>& m) {
    StoredTensor s{name, static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()), {}};
    s.data.assign(m.data(), m.data() + m.size());
    return s;
}

MatrixX<double> restore(const StoredTensor& s) {
    if (s.data.size() != s.rows * s.cols) throw ParseError("checkpoint", 0, "tensor " + s.name + " has a bad size");
    return Eigen::Map<const MatrixX<double>>(s.data.data(), static_cast<Eigen::Index>(s.rows),
                                            static_cast<Eigen::Index>(s.cols));
}

std::vector<MatrixX<double>> restore_all(const std::vector<StoredTensor>& stored) {
    std::vector<MatrixX<double>> out;
    for (const auto& s : stored) out.push_back(restore(s));
    return out;
}

}  // namespace

template <class Archive>
void serialize(Archive& ar, StoredTensor& t) {
    ar(t.name, t.rows, t.cols, t.data);
}

template <class Archive>
void save(Archive& ar, const EncoderConfig& c) {
    ar(static_cast<std::uint64_t>(c.dim), static_cast<std::uint64_t>(c.layers), static_cast<std::uint64_t>(c.heads),
       static_cast<std::uint64_t>(c.vocab_size), static_cast<std::uint64_t>(c.max_len), to_string(c.attention),
       c.init_std);
}

template <class Archive>
void load(Archive& ar, EncoderConfig& c) {
    std::uint64_t dim, layers, heads, vocab, max_len;
    std::string attention;
    ar(dim, layers, heads, vocab, max_len, attention, c.init_std);
    c.dim = dim;
    c.layers = layers;
    c.heads = heads;
    c.vocab_size = vocab;
    c.max_len = max_len;
    c.attention = parse_attention_mode(attention);
}

Checkpoint Checkpoint::capture(const EncoderModel& model, const Vocabulary& vocab, std::optional<Paradigm> paradigm,
                               const Adam* optimizer) {
    if (vocab.size() != model.config().vocab_size) {
        throw ContractError("vocabulary size " + std::to_string(vocab.size()) + " != encoder vocab_size " +
                            std::to_string(model.config().vocab_size));
    }
    Checkpoint c;
    c.encoder = model.config();
    for (std::size_t i = 0; i < vocab.size(); ++i) c.vocabulary.push_back(vocab.token(static_cast<TokenId>(i)));
    c.paradigm = paradigm;
    for (const auto& p : model.parameters()) c.parameters.push_back(store(p.name, p.tensor.value()));
    if (optimizer != nullptr) {
        const auto& params = optimizer->parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            c.adam_m.push_back(store(params[i].name, optimizer->first_moments()[i]));
            c.adam_v.push_back(store(params[i].name, optimizer->second_moments()[i]));
        }
        c.adam_steps = optimizer->steps();
    }
    return c;
}

EncoderModel Checkpoint::model() const {
    EncoderModel model(encoder, 0);
    auto params = model.parameters();
    if (params.size() != parameters.size()) throw ParseError("checkpoint", 0, "parameter count does not match config");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != parameters[i].name) {
            throw ParseError("checkpoint", 0, "expected parameter " + params[i].name + ", found " + parameters[i].name);
        }
        auto value = restore(parameters[i]);
        auto& dst = params[i].tensor.mutable_value();
        if (value.rows() != dst.rows() || value.cols() != dst.cols()) {
            throw ParseError("checkpoint", 0, "shape mismatch for " + parameters[i].name);
        }
        dst = std::move(value);
    }
    return model;
}

Vocabulary Checkpoint::vocab() const { return Vocabulary::from_tokens(vocabulary); }

void Checkpoint::restore_optimizer(Adam& optimizer) const {
    optimizer.restore(restore_all(adam_m), restore_all(adam_v), adam_steps);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_file_atomically(
        path,
        [&](std::ostream& out) {
            cereal::PortableBinaryOutputArchive ar(out);
            std::optional<std::string> paradigm;
            if (c.paradigm) paradigm = to_string(*c.paradigm);
            ar(std::string(kMagic), kVersion, c.encoder, c.vocabulary, paradigm, c.parameters, c.adam_m, c.adam_v,
               c.adam_steps, c.step, c.config_hash, c.config_text);
        },
        true);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint " + path.string());
    Checkpoint c;
    try {
        cereal::PortableBinaryInputArchive ar(in);
        std::string magic;
        std::uint32_t version = 0;
        ar(magic);
        if (magic != kMagic) throw ParseError(path.string(), 0, "not a lion checkpoint");
        ar(version);
        if (version != kVersion) throw ParseError(path.string(), 0, "unsupported checkpoint version");
        std::optional<std::string> paradigm;
        ar(c.encoder, c.vocabulary, paradigm, c.parameters, c.adam_m, c.adam_v, c.adam_steps, c.step, c.config_hash,
           c.config_text);
        if (paradigm) c.paradigm = parse_paradigm(*paradigm);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path.string(), 0, std::string("corrupt checkpoint: ") + e.what());
    }
    c.encoder.validate();
    if (c.vocabulary.size() != c.encoder.vocab_size) throw ParseError(path.string(), 0, "vocabulary size mismatch");
    return c;
}

}  // namespace lion
