// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bncap/data_io.hpp"
#include "bncap/model.hpp"
#include "bncap/text.hpp"

namespace bncap {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& name);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global L2 gradient norm cap; 0 disables clipping.
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean teacher-forced loss per predicted token, nats
  double accuracy = 0.0;  // fraction of predictions whose argmax is the target
};

struct TrainingExample {
  std::size_t feature_index = 0;
  TokenSequence tokens;
};

/// Features are stored once; each caption is its own example.
struct TrainingData {
  std::vector<Vector> features;
  std::vector<std::string> image_ids;
  std::vector<TrainingExample> examples;
};

/// Pairs every caption of every image in `ids` with that image's feature.
/// Throws SequenceTooLong for captions over `max_len` words and
/// InvalidArgument for ids without a feature.
TrainingData make_training_data(std::span<const ImageFeature> features, const CaptionMap& captions,
                                std::span<const std::string> ids, const Vocabulary& vocab,
                                std::size_t max_len);

struct TrainResult {
  CaptionModel model;
  std::vector<EpochStats> stats;
};

/// Called after every epoch; the model argument is the current state.
using EpochCallback = std::function<void(const EpochStats&, const CaptionModel&)>;

/// Seeded mini-batch training of the summed forward and backward caption
/// loss. Deterministic for a given seed. Throws TrainingError on an empty
/// dataset or a non-finite loss.
TrainResult train(CaptionModel model, const TrainingData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Scales `grad` by min(1, max_norm / |grad|) and returns |grad| before
/// scaling. max_norm <= 0 leaves it untouched.
double clip_gradients(ModelParams& grad, double max_norm);

double gradient_norm(const ModelParams& grad);

/// Writes "epoch,loss,accuracy" rows.
void write_curve_csv(const std::filesystem::path& path, std::span<const EpochStats> stats);

struct GradCheckConfig {
  std::uint64_t seed = 0;
  std::size_t vocab_size = 10;
  std::size_t embed_dim = 4;
  std::size_t hidden_dim = 5;
  /// Longest caption body; a full sequence has two more tokens.
  std::size_t max_words = 5;
  double epsilon = 1e-5;
  /// Parameters are drawn uniform in [-weight_range, weight_range].
  double weight_range = 1.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Compares model_backward with central differences of caption_loss on a
/// random model, feature and caption. Relative error per entry is
/// |a - n| / max(|a|, |n|, 1e-12); the worst entry is reported.
GradCheckResult gradient_check(const GradCheckConfig& cfg);

}  // namespace bncap
