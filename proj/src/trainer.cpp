// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "bncap/error.hpp"

namespace bncap {

namespace {

std::vector<std::span<double>> tensor_spans(ModelParams& p) {
  std::vector<std::span<double>> out;
  for_each_tensor(p, [&](const std::string&, std::span<double> data, const std::vector<std::size_t>&) {
    out.push_back(data);
  });
  return out;
}

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const ModelConfig& model)
      : cfg_(cfg), m1_(ModelParams::zeros(model)), m2_(ModelParams::zeros(model)) {}

  void step(ModelParams& params, ModelParams& grad) {
    const auto p = tensor_spans(params);
    const auto g = tensor_spans(grad);
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t k = 0; k < p.size(); ++k) axpy(-cfg_.learning_rate, g[k], p[k]);
      return;
    }
    ++t_;
    const auto m1 = tensor_spans(m1_);
    const auto m2 = tensor_spans(m2_);
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t i = 0; i < p[k].size(); ++i) {
        const double gi = g[k][i];
        m1[k][i] = cfg_.beta1 * m1[k][i] + (1.0 - cfg_.beta1) * gi;
        m2[k][i] = cfg_.beta2 * m2[k][i] + (1.0 - cfg_.beta2) * gi * gi;
        const double m_hat = m1[k][i] / c1;
        const double v_hat = m2[k][i] / c2;
        p[k][i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
      }
    }
  }

 private:
  TrainConfig cfg_;
  ModelParams m1_;
  ModelParams m2_;
  std::size_t t_ = 0;
};

void scale(ModelParams& grad, double factor) {
  for (std::span<double> t : tensor_spans(grad)) {
    for (double& x : t) x *= factor;
  }
}

}  // namespace

const char* to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw InvalidArgument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (grad_clip_norm < 0.0) throw InvalidArgument("gradient clip norm must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw InvalidArgument("Adam hyperparameters out of range");
  }
}

TrainingData make_training_data(std::span<const ImageFeature> features, const CaptionMap& captions,
                                std::span<const std::string> ids, const Vocabulary& vocab,
                                std::size_t max_len) {
  std::unordered_map<std::string_view, const ImageFeature*> by_id;
  for (const ImageFeature& f : features) by_id.emplace(f.id, &f);
  TrainingData data;
  for (const std::string& id : ids) {
    const auto feat = by_id.find(id);
    if (feat == by_id.end()) throw InvalidArgument("no feature for image " + id);
    const auto caps = captions.find(id);
    if (caps == captions.end()) continue;
    const std::size_t index = data.features.size();
    data.features.push_back(feat->second->values);
    data.image_ids.push_back(id);
    for (const std::string& caption : caps->second) {
      TokenSequence tokens = encode_caption(vocab, caption);
      if (tokens.size() - 2 > max_len) {
        throw SequenceTooLong("caption of image " + id + " has " + std::to_string(tokens.size() - 2) +
                              " words, max_len is " + std::to_string(max_len));
      }
      data.examples.push_back({index, std::move(tokens)});
    }
  }
  return data;
}

double gradient_norm(const ModelParams& grad) {
  double total = 0.0;
  for_each_tensor(grad, [&](const std::string&, std::span<const double> data,
                            const std::vector<std::size_t>&) { total += squared_norm(data); });
  return std::sqrt(total);
}

double clip_gradients(ModelParams& grad, double max_norm) {
  const double norm = gradient_norm(grad);
  if (max_norm > 0.0 && norm > max_norm) scale(grad, max_norm / norm);
  return norm;
}

TrainResult train(CaptionModel model, const TrainingData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.examples.empty()) throw TrainingError("training set is empty");

  TrainResult result{std::move(model), {}};
  CaptionModel& m = result.model;
  Optimizer optimizer(cfg, m.config);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t tokens = 0, correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      ModelParams grad = ModelParams::zeros(m.config);
      for (std::size_t k = begin; k < end; ++k) {
        const TrainingExample& ex = data.examples[order[k]];
        const SequenceStats s =
            accumulate_model_backward(m, data.features[ex.feature_index], ex.tokens, grad);
        if (!std::isfinite(s.loss)) {
          std::ostringstream msg;
          msg << "non-finite loss " << s.loss << " at epoch " << epoch << ", example " << order[k]
              << " (image " << data.image_ids[ex.feature_index] << ", " << ex.tokens.size()
              << " tokens)";
          throw TrainingError(msg.str());
        }
        loss_sum += s.loss;
        tokens += s.tokens;
        correct += s.correct;
      }
      scale(grad, 1.0 / static_cast<double>(end - begin));
      clip_gradients(grad, cfg.grad_clip_norm);
      optimizer.step(m.params, grad);
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(tokens),
                     static_cast<double>(correct) / static_cast<double>(tokens)};
    result.stats.push_back(stats);
    if (on_epoch) on_epoch(stats, m);
  }
  return result;
}

void write_curve_csv(const std::filesystem::path& path, std::span<const EpochStats> stats) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(FormatErrc::io, "cannot write " + path.string());
  out << "epoch,loss,accuracy\n";
  char line[96];
  for (const EpochStats& s : stats) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g\n", s.epoch, s.loss, s.accuracy);
    out << line;
  }
}

GradCheckResult gradient_check(const GradCheckConfig& cfg) {
  ModelConfig mc;
  mc.vocab_size = cfg.vocab_size;
  mc.embed_dim = cfg.embed_dim;
  mc.hidden_dim = cfg.hidden_dim;
  mc.max_len = std::max<std::size_t>(cfg.max_words, 1);
  mc.seed = cfg.seed;
  CaptionModel model = init_model(mc);

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  // Redraw every tensor, biases included, on a wider range than init_model
  // uses: at +-0.08 the hidden state is so small that gate gradients sink
  // into finite-difference roundoff.
  std::uniform_real_distribution<double> weight(-cfg.weight_range, cfg.weight_range);
  for_each_tensor(model.params, [&](const std::string&, std::span<double> data,
                                    const std::vector<std::size_t>&) {
    for (double& x : data) x = weight(rng);
  });
  const Vector feature = synthetic_feature(rng);
  std::uniform_int_distribution<std::size_t> words(1, mc.max_len);
  std::uniform_int_distribution<TokenId> token(kUnkId, static_cast<TokenId>(cfg.vocab_size - 1));
  TokenSequence seq{kStartId};
  for (std::size_t n = words(rng); n > 0; --n) seq.push_back(token(rng));
  seq.push_back(kEndId);

  const ModelParams analytic = model_backward(model, feature, seq);
  std::vector<std::pair<std::string, std::span<const double>>> grads;
  for_each_tensor(analytic, [&](const std::string& name, std::span<const double> data,
                                const std::vector<std::size_t>&) { grads.emplace_back(name, data); });

  GradCheckResult result;
  std::size_t tensor = 0;
  for_each_tensor(model.params, [&](const std::string& name, std::span<double> data,
                                    const std::vector<std::size_t>&) {
    const std::span<const double> g = grads[tensor++].second;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + cfg.epsilon;
      const double plus = caption_loss(model, feature, seq);
      data[i] = saved - cfg.epsilon;
      const double minus = caption_loss(model, feature, seq);
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * cfg.epsilon);
      const double err = std::abs(g[i] - numeric) /
                         std::max({std::abs(g[i]), std::abs(numeric), 1e-12});
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = name;
        result.worst_index = i;
      }
    }
  });
  return result;
}

}  // namespace bncap
