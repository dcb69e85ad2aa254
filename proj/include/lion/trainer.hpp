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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lion/checkpoint.hpp"
#include "lion/data.hpp"
#include "lion/mntp.hpp"
#include "lion/optimizer.hpp"
#include "lion/train_config.hpp"

namespace lion {

struct StepReport {
    std::size_t step = 0;  // optimizer updates applied so far
    bool applied = false;  // this call completed an accumulation window
    double loss = 0.0;
    double cl = 0.0;
    double kd = 0.0;
    double mntp = 0.0;
    double flop_query = 0.0;
    double flop_doc = 0.0;
    double grad_norm = 0.0;
    // Activations above the index pruning threshold, averaged over the documents
    // (queries) of the window. Sparse paradigm only.
    double mean_doc_nonzeros = 0.0;
    double mean_query_nonzeros = 0.0;
    double learning_rate = 0.0;
};

// Owns the optimizer for one model. Each train_step call consumes one
// micro-batch; every grad_accum_steps-th call applies an update, and its report
// averages the whole window.
class Trainer {
 public:
    // `total_steps` sizes the warmup. The model must use bidirectional attention.
    Trainer(EncoderModel& model, TrainConfig config, std::size_t total_steps);

    StepReport train_step(const TrainingSet& data, const std::vector<TrainingGroup>& batch);
    StepReport train_step(std::span<const MaskedExample> batch);

    std::size_t steps() const { return steps_; }
    const Adam& optimizer() const { return optimizer_; }
    Adam& optimizer() { return optimizer_; }
    const TrainConfig& config() const { return config_; }

 private:
    StepReport finish_micro(const Tensor& loss, StepReport micro);

    EncoderModel& model_;
    TrainConfig config_;
    std::size_t total_steps_;
    Adam optimizer_;
    std::size_t steps_ = 0;
    std::size_t micro_in_window_ = 0;
    StepReport window_;
};

// Builds the masked inputs of one MNTP micro-batch.
std::vector<MaskedExample> make_mntp_batch(const TrainingSet& data, const BatchSampler::MicroBatch& micro,
                                           const TrainConfig& config, std::size_t max_len, std::uint64_t seed);

struct TrainOptions {
    std::filesystem::path checkpoint_path;  // empty: no checkpoints
    std::filesystem::path log_path;         // empty: no log file
    std::optional<Paradigm> checkpoint_paradigm;
    std::function<void(const StepReport&)> on_step;
};

struct TrainResult {
    std::vector<StepReport> log;  // one record per optimizer step
    Checkpoint checkpoint;
};

// Runs epochs x steps_per_epoch updates (capped by max_steps). The batch order,
// negatives and masks all derive from config.seed.
TrainResult train(EncoderModel& model, const TrainingSet& data, const TrainConfig& config,
                  const TrainOptions& options = {});

// One JSON object per line.
std::string training_log_line(const StepReport& report, const TrainConfig& config);

}  // namespace lion
