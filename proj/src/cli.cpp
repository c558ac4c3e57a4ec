// Copyright 2026 The bncap Authors
// SPDX-License-Identifier: Apache-2.0

#include "bncap/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "bncap/data_io.hpp"
#include "bncap/decode.hpp"
#include "bncap/error.hpp"
#include "bncap/metrics.hpp"
#include "bncap/model.hpp"
#include "bncap/text.hpp"
#include "bncap/trainer.hpp"

namespace bncap::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FixtureArgs {
  std::string out;
  std::size_t images = 8;
  std::uint64_t seed = 42;
};

struct TrainArgs {
  std::string features, captions, out;
  std::size_t epochs = 100;
  std::size_t hidden = 256;
  std::size_t embed = 300;
  std::size_t max_len = 20;
  std::size_t min_count = 1;
  double lr = 1e-3;
  std::size_t batch = 16;
  std::string optimizer = "adam";
  double clip = 5.0;
  std::uint64_t seed = 0;
  std::string split = "train";
  std::uint64_t split_seed = 0;
};

struct DecodeArgs {
  std::size_t beam = 3;
  bool greedy = false;
  std::string direction = "both";
  std::string scoring = "mean_log";
};

struct CaptionArgs {
  std::string checkpoint, features, id;
  DecodeArgs decode;
};

struct EvaluateArgs {
  std::string checkpoint, features, captions;
  std::string split = "test";
  std::uint64_t split_seed = 0;
  DecodeArgs decode;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
};

constexpr double kGradcheckTolerance = 1e-4;

void add_decode_flags(CLI::App* cmd, DecodeArgs& a) {
  cmd->add_option("--beam", a.beam, "Beam width")->check(CLI::PositiveNumber);
  cmd->add_flag("--greedy", a.greedy, "Argmax decoding (beam width 1)");
  cmd->add_option("--direction", a.direction, "forward, backward or both")
      ->check(CLI::IsMember({"forward", "backward", "both"}));
  cmd->add_option("--scoring", a.scoring, "Sentence score: mean_log or arith_mean")
      ->check(CLI::IsMember({"mean_log", "arith_mean"}));
}

/// Every long flag also reads CAPGEN_<FLAG>.
void bind_environment(CLI::App& app) {
  for (CLI::App* sub : app.get_subcommands({})) {
    for (CLI::Option* opt : sub->get_options()) {
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || opt->get_lnames().empty()) continue;
      std::string env = "CAPGEN_";
      for (char c : opt->get_lnames().front()) {
        env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
      opt->envname(env);
    }
  }
}

std::vector<std::string> paired_ids(std::span<const ImageFeature> features, const CaptionMap& captions) {
  std::vector<std::string> ids;
  for (const ImageFeature& f : features) {
    if (captions.count(f.id)) ids.push_back(f.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> select_split(const std::vector<std::string>& ids, const std::string& which,
                                      std::uint64_t seed) {
  if (which == "all") return ids;
  const DatasetSplit s = split_dataset(ids, {6, 1, 1}, seed);
  std::vector<std::string> out = which == "train" ? s.train : which == "test" ? s.test : s.validation;
  std::sort(out.begin(), out.end());
  return out;
}

DecodeParams decode_params(const DecodeArgs& a, const CaptionModel& m) {
  DecodeParams p;
  p.beam_width = a.greedy ? 1 : a.beam;
  p.max_len = m.config.max_len;
  p.scoring = a.scoring == "arith_mean" ? ScoringMode::arith_mean : ScoringMode::mean_log;
  return p;
}

ScoredSentence decode_one(const CaptionModel& m, std::span<const double> feature, const DecodeArgs& a) {
  const DecodeParams p = decode_params(a, m);
  if (a.direction == "both") return bidirectional_decode(m, feature, p);
  const Direction d = a.direction == "forward" ? Direction::forward : Direction::backward;
  return beam_search(m, feature, d, p);
}

const ImageFeature& find_feature(std::span<const ImageFeature> features, const std::string& id) {
  for (const ImageFeature& f : features) {
    if (f.id == id) return f;
  }
  throw InvalidArgument("no feature for image '" + id + "'");
}

int run_fixture(const FixtureArgs& a, std::ostream& out) {
  const std::vector<std::string> words = default_fixture_words();
  const FixturePaths paths = generate_fixture(a.images, words, a.seed, a.out);
  out << "features=" << paths.features.string() << "\n";
  out << "captions=" << paths.captions.string() << "\n";
  return kExitOk;
}

int run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<ImageFeature> features = read_features(a.features);
  const CaptionFile caption_file = load_captions(a.captions);
  for (const std::string& w : caption_file.warnings) err << "warning: " << w << "\n";

  const std::vector<std::string> ids =
      select_split(paired_ids(features, caption_file.captions), a.split, a.split_seed);
  std::vector<std::string> corpus;
  for (const std::string& id : ids) {
    const auto& caps = caption_file.captions.at(id);
    corpus.insert(corpus.end(), caps.begin(), caps.end());
  }
  const Vocabulary vocab = build_vocabulary(corpus, a.min_count);

  ModelConfig mc;
  mc.embed_dim = a.embed;
  mc.hidden_dim = a.hidden;
  mc.vocab_size = vocab.size();
  mc.max_len = a.max_len;
  mc.seed = a.seed;
  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.learning_rate = a.lr;
  tc.batch_size = a.batch;
  tc.optimizer = parse_optimizer(a.optimizer);
  tc.grad_clip_norm = a.clip;
  tc.seed = a.seed;

  const TrainingData data = make_training_data(features, caption_file.captions, ids, vocab, mc.max_len);
  err << "training on " << data.image_ids.size() << " images, " << data.examples.size()
      << " captions, vocabulary " << vocab.size() << "\n";
  TrainResult result = train(init_model(mc), data, tc, [&](const EpochStats& s, const CaptionModel&) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %zu loss %.6f accuracy %.4f\n", s.epoch, s.loss, s.accuracy);
    err << line;
  });

  Checkpoint ckpt{std::move(result.model), vocab, {}};
  ckpt.metadata = {
      {"train.epochs", std::to_string(tc.epochs)},
      {"train.learning_rate", std::to_string(tc.learning_rate)},
      {"train.batch_size", std::to_string(tc.batch_size)},
      {"train.optimizer", to_string(tc.optimizer)},
      {"train.grad_clip_norm", std::to_string(tc.grad_clip_norm)},
      {"train.seed", std::to_string(tc.seed)},
      {"train.min_count", std::to_string(a.min_count)},
      {"split", a.split},
      {"split_seed", std::to_string(a.split_seed)},
  };
  save_checkpoint(a.out, ckpt);
  const std::string curve = a.out + ".curve.csv";
  write_curve_csv(curve, result.stats);

  out << "checkpoint=" << a.out << "\n" << "curve=" << curve << "\n";
  if (!result.stats.empty()) {
    char line[128];
    std::snprintf(line, sizeof line, "final_loss=%.6f final_accuracy=%.4f\n", result.stats.back().loss,
                  result.stats.back().accuracy);
    out << line;
  }
  return kExitOk;
}

int run_caption(const CaptionArgs& a, std::ostream& out, std::ostream& err) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const std::vector<ImageFeature> features = read_features(a.features);
  const ImageFeature& f = find_feature(features, a.id);
  const ScoredSentence s = decode_one(ckpt.model, f.values, a.decode);
  char line[160];
  std::snprintf(line, sizeof line, "direction=%s mean_log_prob=%.6f forced_end=%d\n",
                to_string(s.direction), s.mean_log_prob(), s.forced_end ? 1 : 0);
  err << line;
  out << decode_tokens(ckpt.vocab, s.ids) << "\n";
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& a, bool split_seed_given, std::ostream& out, std::ostream& err) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const std::vector<ImageFeature> features = read_features(a.features);
  const CaptionFile caption_file = load_captions(a.captions);
  for (const std::string& w : caption_file.warnings) err << "warning: " << w << "\n";

  std::uint64_t split_seed = a.split_seed;
  if (!split_seed_given) split_seed = std::stoull(ckpt.meta("split_seed", "0"));
  const std::vector<std::string> ids =
      select_split(paired_ids(features, caption_file.captions), a.split, split_seed);
  if (ids.empty()) throw InvalidArgument("split '" + a.split + "' has no captioned images");

  std::vector<EvalPair> pairs;
  for (const std::string& id : ids) {
    const ScoredSentence s = decode_one(ckpt.model, find_feature(features, id).values, a.decode);
    EvalPair p;
    p.candidate = decode_words(ckpt.vocab, s.ids);
    for (const std::string& ref : caption_file.captions.at(id)) p.references.push_back(tokenize(ref));
    pairs.push_back(std::move(p));
  }
  const MetricsReport report = evaluate_corpus(pairs);
  const std::size_t width = a.decode.greedy ? 1 : a.decode.beam;
  const std::string label = width == 1 ? "Argmax" : "BEAM-" + std::to_string(width);
  out << render_table(report, label);
  out << render_machine_line(report) << "\n";
  return kExitOk;
}

int run_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.seeds; ++k) {
    GradCheckConfig cfg;
    cfg.seed = a.seed + k;
    const GradCheckResult r = gradient_check(cfg);
    char line[192];
    std::snprintf(line, sizeof line, "seed=%llu checked=%zu max_rel_error=%.3e worst=%s[%zu]\n",
                  static_cast<unsigned long long>(cfg.seed), r.checked, r.max_rel_error,
                  r.worst_tensor.c_str(), r.worst_index);
    out << line;
    worst = std::max(worst, r.max_rel_error);
  }
  char line[64];
  std::snprintf(line, sizeof line, "max_rel_error=%.3e\n", worst);
  out << line;
  return worst < kGradcheckTolerance ? kExitOk : kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bengali image caption generator", "capgen"};
  app.require_subcommand(1, 1);

  FixtureArgs fixture;
  auto* fx = app.add_subcommand("fixture", "Write a synthetic feature/caption fixture");
  fx->add_option("--out", fixture.out, "Output directory")->required();
  fx->add_option("--images", fixture.images, "Number of images")->check(CLI::PositiveNumber);
  fx->add_option("--seed", fixture.seed, "Generator seed");

  TrainArgs tr;
  auto* trc = app.add_subcommand("train", "Train a caption model");
  trc->add_option("--features", tr.features, "Feature file (BNF1)")->required();
  trc->add_option("--captions", tr.captions, "Captions TSV")->required();
  trc->add_option("--out", tr.out, "Checkpoint path")->required();
  trc->add_option("--epochs", tr.epochs, "Training epochs");
  trc->add_option("--hidden", tr.hidden, "GRU hidden size")->check(CLI::PositiveNumber);
  trc->add_option("--embed", tr.embed, "Word embedding size")->check(CLI::PositiveNumber);
  trc->add_option("--max-len", tr.max_len, "Longest caption in words")->check(CLI::PositiveNumber);
  trc->add_option("--min-count", tr.min_count, "Minimum word frequency")->check(CLI::PositiveNumber);
  trc->add_option("--lr", tr.lr, "Learning rate")->check(CLI::PositiveNumber);
  trc->add_option("--batch", tr.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  trc->add_option("--optimizer", tr.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  trc->add_option("--clip", tr.clip, "Gradient norm cap, 0 disables")->check(CLI::NonNegativeNumber);
  trc->add_option("--seed", tr.seed, "Initialisation and shuffling seed");
  trc->add_option("--split", tr.split, "Images to train on: train or all")
      ->check(CLI::IsMember({"train", "all"}));
  trc->add_option("--split-seed", tr.split_seed, "Dataset split seed");

  CaptionArgs cap;
  auto* cc = app.add_subcommand("caption", "Caption one image");
  cc->add_option("--checkpoint", cap.checkpoint, "Checkpoint path")->required();
  cc->add_option("--features", cap.features, "Feature file (BNF1)")->required();
  cc->add_option("--id", cap.id, "Image id")->required();
  add_decode_flags(cc, cap.decode);

  EvaluateArgs ev;
  auto* evc = app.add_subcommand("evaluate", "Score a checkpoint with BLEU and METEOR");
  evc->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required();
  evc->add_option("--features", ev.features, "Feature file (BNF1)")->required();
  evc->add_option("--captions", ev.captions, "Captions TSV")->required();
  evc->add_option("--split", ev.split, "train, test, validation or all")
      ->check(CLI::IsMember({"train", "test", "validation", "all"}));
  auto* split_seed_opt =
      evc->add_option("--split-seed", ev.split_seed, "Dataset split seed (default: from checkpoint)");
  add_decode_flags(evc, ev.decode);

  GradcheckArgs gc;
  auto* gcc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  gcc->add_option("--seed", gc.seed, "First seed");
  gcc->add_option("--seeds", gc.seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);

  bind_environment(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fx->parsed()) return run_fixture(fixture, out);
    if (trc->parsed()) return run_train(tr, out, err);
    if (cc->parsed()) return run_caption(cap, out, err);
    if (evc->parsed()) return run_evaluate(ev, split_seed_opt->count() > 0, out, err);
    if (gcc->parsed()) return run_gradcheck(gc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bncap::cli
