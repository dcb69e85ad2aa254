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

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "lion/errors.hpp"
#include "lion/hash.hpp"
#include "lion/io.hpp"
#include "lion/ops.hpp"
#include "lion/trainer.hpp"

namespace lion {

namespace {

std::size_t count_above(const Tensor& activation) {
    return static_cast<std::size_t>((activation.value().array() > kIndexPruneThreshold).count());
}

// Window averages are sums of per-micro values divided at the end.
void add_into(StepReport& window, const StepReport& micro) {
    window.loss += micro.loss;
    window.cl += micro.cl;
    window.kd += micro.kd;
    window.mntp += micro.mntp;
    window.flop_query += micro.flop_query;
    window.flop_doc += micro.flop_doc;
    window.mean_doc_nonzeros += micro.mean_doc_nonzeros;
    window.mean_query_nonzeros += micro.mean_query_nonzeros;
}

void divide(StepReport& r, double n) {
    r.loss /= n;
    r.cl /= n;
    r.kd /= n;
    r.mntp /= n;
    r.flop_query /= n;
    r.flop_doc /= n;
    r.mean_doc_nonzeros /= n;
    r.mean_query_nonzeros /= n;
}

}  // namespace

Trainer::Trainer(EncoderModel& model, TrainConfig config, std::size_t total_steps)
    : model_(model), config_(std::move(config)), total_steps_(total_steps), optimizer_(model.parameters()) {
    config_.validate();
    if (model.config().attention != AttentionMode::kBidirectional) {
        throw ContractError("training requires a bidirectional encoder");
    }
    for (auto& p : optimizer_.parameters()) {
        if (!p.tensor.requires_grad()) throw ContractError("parameter " + p.name + " does not require gradients");
    }
    optimizer_.zero_grad();
}

StepReport Trainer::train_step(const TrainingSet& data, const std::vector<TrainingGroup>& batch) {
    if (config_.objective == Objective::kMntp) throw ContractError("mntp objective takes masked examples");
    if (batch.empty()) throw InputError("empty training batch");
    if (needs_teacher(config_.objective) && data.teacher() == nullptr) {
        throw ConfigError(to_string(config_.objective) + " needs a teacher score source");
    }
    const bool sparse = config_.paradigm == Paradigm::kSparse;
    const std::size_t q_len = std::min(config_.max_query_len, model_.config().max_len);
    const std::size_t d_len = std::min(config_.max_doc_len, model_.config().max_len);

    StepReport micro;
    std::vector<Tensor> group_losses;
    std::vector<Tensor> query_reps;
    std::vector<Tensor> doc_reps;
    std::size_t doc_nonzeros = 0;
    std::size_t query_nonzeros = 0;
    for (const auto& g : batch) {
        if (g.negatives.size() != config_.num_negatives) throw ContractError("group has the wrong number of negatives");
        const Tensor q = represent(model_, data.queries().sequence(g.query, q_len), config_.paradigm);
        std::vector<Tensor> scores;
        std::vector<std::size_t> doc_ids{g.positive};
        doc_ids.insert(doc_ids.end(), g.negatives.begin(), g.negatives.end());
        for (const auto d : doc_ids) {
            const Tensor rep = represent(model_, data.docs().sequence(d, d_len), config_.paradigm);
            scores.push_back(dot(q, rep));
            if (sparse) {
                doc_nonzeros += count_above(rep);
                doc_reps.push_back(rep);
            }
        }
        if (sparse) {
            query_nonzeros += count_above(q);
            query_reps.push_back(q);
        }
        const Tensor s = stack(scores);
        const auto group_name = [&] {
            return "query " + data.queries().id(g.query) + " with positive " + data.docs().id(g.positive);
        };

        Tensor loss;
        double cl_value = 0.0;
        double kd_value = 0.0;
        if (needs_teacher(config_.objective) && g.teacher_scores.size() != scores.size()) {
            throw ContractError("group lacks teacher scores");
        }
        try {
            switch (config_.objective) {
                case Objective::kCl:
                    loss = cl_loss(s);
                    cl_value = loss.item();
                    break;
                case Objective::kKdMarginMse: {
                    std::vector<Tensor> terms;
                    for (std::size_t i = 1; i < scores.size(); ++i) {
                        terms.push_back(
                            margin_mse_loss(scores[0], scores[i], g.teacher_scores[0], g.teacher_scores[i]));
                    }
                    loss = scale(sum(stack(terms)), 1.0 / static_cast<double>(terms.size()));
                    kd_value = loss.item();
                    break;
                }
                case Objective::kClPlusKd: {
                    const Tensor cl = cl_loss(s);
                    const Tensor kd = kl_div_loss(s, g.teacher_scores, config_.kl_temperature);
                    loss = combined_loss(cl, kd);
                    cl_value = cl.item();
                    kd_value = kd.item();
                    break;
                }
                case Objective::kMntp: break;
            }
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (" + group_name() + ")");
        }
        if (!std::isfinite(loss.item())) throw NumericError("non-finite loss for " + group_name());
        group_losses.push_back(loss);
        micro.cl += cl_value;
        micro.kd += kd_value;
    }
    const double n = static_cast<double>(batch.size());
    micro.cl /= n;
    micro.kd /= n;
    Tensor total = scale(sum(stack(group_losses)), 1.0 / n);
    if (sparse) {
        const Tensor fq = flop_penalty(stack_rows(query_reps), config_.flop_lambda_query);
        const Tensor fd = flop_penalty(stack_rows(doc_reps), config_.flop_lambda_doc);
        micro.flop_query = fq.item();
        micro.flop_doc = fd.item();
        total = total + fq + fd;
        micro.mean_doc_nonzeros = static_cast<double>(doc_nonzeros) / static_cast<double>(doc_reps.size());
        micro.mean_query_nonzeros = static_cast<double>(query_nonzeros) / n;
    }
    return finish_micro(total, micro);
}

StepReport Trainer::train_step(std::span<const MaskedExample> batch) {
    if (config_.objective != Objective::kMntp) throw ContractError("masked examples need the mntp objective");
    if (batch.empty()) throw InputError("empty training batch");
    const Tensor loss = mntp_loss(model_, batch);
    if (!std::isfinite(loss.item())) {
        NoGradGuard no_grad;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!std::isfinite(mntp_loss(model_, batch[i].input, batch[i].positions).item())) {
                throw NumericError("non-finite MNTP loss for example " + std::to_string(i) + " of the micro-batch");
            }
        }
        throw NumericError("non-finite MNTP loss");
    }
    StepReport micro;
    micro.mntp = loss.item();
    return finish_micro(loss, micro);
}

StepReport Trainer::finish_micro(const Tensor& loss, StepReport micro) {
    micro.loss = loss.item();
    if (!std::isfinite(micro.loss)) throw NumericError("non-finite training loss");
    backward(loss, 1.0 / static_cast<double>(config_.grad_accum_steps));
    if (micro_in_window_ == 0) window_ = StepReport{};
    add_into(window_, micro);
    ++micro_in_window_;
    micro.step = steps_;
    micro.grad_norm = optimizer_.grad_norm();
    if (micro_in_window_ < config_.grad_accum_steps) return micro;

    StepReport report = window_;
    divide(report, static_cast<double>(micro_in_window_));
    micro_in_window_ = 0;
    report.grad_norm = optimizer_.grad_norm();
    if (!std::isfinite(report.grad_norm)) throw NumericError("non-finite gradient norm");
    report.learning_rate =
        warmup_learning_rate(config_.learning_rate, steps_ + 1, std::max<std::size_t>(total_steps_, 1),
                             config_.warmup_ratio);
    optimizer_.step(report.learning_rate);
    ++steps_;
    if (!model_.all_finite()) {
        throw NumericError("parameters became non-finite at step " + std::to_string(steps_));
    }
    report.step = steps_;
    report.applied = true;
    return report;
}

std::vector<MaskedExample> make_mntp_batch(const TrainingSet& data, const BatchSampler::MicroBatch& micro,
                                           const TrainConfig& config, std::size_t max_len, std::uint64_t seed) {
    std::vector<MaskedExample> batch;
    for (std::size_t i = 0; i < micro.items.size(); ++i) {
        const auto seq = data.docs().sequence(micro.items[i], max_len);
        if (seq.real_count() < 2) continue;  // nothing before the only token to predict from
        const std::uint64_t s = derive_seed(seed, micro.epoch, micro.first_position + i);
        const auto positions = select_mask_positions(seq, config.mask_rate, s);
        batch.push_back(apply_mask(seq, positions, data.vocab().size(), config.mask_corruption, splitmix64(s)));
    }
    if (batch.empty()) throw InputError("micro-batch has no document with two or more tokens");
    return batch;
}

std::string training_log_line(const StepReport& r, const TrainConfig& config) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["loss"] = r.loss;
    switch (config.objective) {
        case Objective::kCl: j["cl"] = r.cl; break;
        case Objective::kKdMarginMse: j["kd"] = r.kd; break;
        case Objective::kClPlusKd:
            j["cl"] = r.cl;
            j["kd"] = r.kd;
            break;
        case Objective::kMntp: j["mntp"] = r.mntp; break;
    }
    const bool sparse = config.objective != Objective::kMntp && config.paradigm == Paradigm::kSparse;
    if (sparse) {
        j["flop_query"] = r.flop_query;
        j["flop_doc"] = r.flop_doc;
    }
    j["grad_norm"] = r.grad_norm;
    if (sparse) {
        j["mean_nonzeros"] = r.mean_doc_nonzeros;
        j["mean_query_nonzeros"] = r.mean_query_nonzeros;
    }
    j["lr"] = r.learning_rate;
    return j.dump();
}

TrainResult train(EncoderModel& model, const TrainingSet& data, const TrainConfig& config,
                  const TrainOptions& options) {
    config.validate();
    const bool mntp = config.objective == Objective::kMntp;
    if (!mntp && needs_teacher(config.objective) && data.teacher() == nullptr) {
        throw ConfigError(to_string(config.objective) + " needs teacher scores or the oracle teacher");
    }
    if (data.vocab().size() != model.config().vocab_size) {
        throw ContractError("vocabulary size does not match the encoder");
    }
    const std::size_t items = mntp ? data.docs().size() : data.pairs().size();
    BatchSampler sampler(items, config.batch_size, config.grad_accum_steps, derive_seed(config.seed, "order"));
    std::size_t total = config.epochs * sampler.steps_per_epoch();
    if (config.max_steps > 0) total = std::min(total, config.max_steps);

    Trainer trainer(model, config, total);
    const std::uint64_t negative_seed = derive_seed(config.seed, "negatives");
    const std::uint64_t mask_seed = derive_seed(config.seed, "mask");
    const std::size_t doc_len = std::min(config.max_doc_len, model.config().max_len);
    const std::optional<Paradigm> paradigm =
        options.checkpoint_paradigm ? options.checkpoint_paradigm
                                    : (mntp ? std::nullopt : std::optional<Paradigm>(config.paradigm));

    TrainResult result;
    const auto snapshot = [&] {
        Checkpoint c = Checkpoint::capture(model, data.vocab(), paradigm, &trainer.optimizer());
        c.step = trainer.steps();
        c.config_hash = config.hash();
        c.config_text = key_values_text(config.to_key_values());
        return c;
    };
    const auto write_outputs = [&](const Checkpoint& c) {
        if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, c);
        if (!options.log_path.empty()) {
            write_file_atomically(options.log_path, [&](std::ostream& out) {
                for (const auto& r : result.log) out << training_log_line(r, config) << '\n';
            });
        }
    };

    for (std::size_t step = 0; step < total; ++step) {
        StepReport report;
        for (std::size_t m = 0; m < config.grad_accum_steps; ++m) {
            const auto micro = sampler.micro_batch(step, m);
            if (mntp) {
                const auto batch = make_mntp_batch(data, micro, config, doc_len, mask_seed);
                report = trainer.train_step(batch);
            } else {
                report = trainer.train_step(data, sample_training_batch(data, micro, config.num_negatives, negative_seed));
            }
        }
        result.log.push_back(report);
        if (options.on_step) options.on_step(report);
        if (config.checkpoint_every > 0 && trainer.steps() % config.checkpoint_every == 0 && trainer.steps() < total) {
            write_outputs(snapshot());
        }
    }
    result.checkpoint = snapshot();
    write_outputs(result.checkpoint);
    return result;
}

}  // namespace lion
