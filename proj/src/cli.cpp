// Copyright 2026 The BANS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bans/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "CLI11.hpp"
#include "bans/error.hpp"
#include "bans/metrics.hpp"
#include "bans/rng.hpp"
#include "bans/textproc.hpp"

namespace bans::cli {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error("config field " + key + ": not an unsigned integer: \"" + v + "\"");
  }
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error("config field " + key + ": not a number: \"" + v + "\"");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config field " + key + ": not a boolean: \"" + v + "\"");
}

// Thrown for problems the user fixes in the config (distinct exit status).
class ConfigError : public Error {
 public:
  using Error::Error;
};

const fs::path& require_input(const std::string& key, const fs::path& p) {
  if (p.empty()) throw ConfigError("config key " + key + " is required");
  if (!fs::exists(p)) throw ConfigError("missing input file for " + key + ": " + p.string());
  return p;
}

const fs::path& require_output(const std::string& key, const fs::path& p) {
  if (p.empty()) throw ConfigError("config key " + key + " is required");
  return p;
}

std::vector<text::EncodedPair> encode_pairs(std::span<const corpus::ArticleSummaryPair> pairs,
                                            const text::Vocabulary& vocab) {
  std::vector<text::EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({vocab.encode(text::tokenize(p.article)),
                   vocab.encode(text::tokenize(p.summary))});
  }
  return out;
}

fs::path resolve_checkpoint(const CliConfig& cfg) {
  if (!cfg.checkpoint.empty()) return require_input("checkpoint", cfg.checkpoint);
  require_input("checkpoint_dir", cfg.checkpoint_dir);
  fs::path best;
  for (const auto& entry : fs::directory_iterator(cfg.checkpoint_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("ckpt-") && name.ends_with(".bin") &&
        (best.empty() || name > best.filename().string())) {
      best = entry.path();
    }
  }
  if (best.empty()) throw ConfigError("no checkpoint found in " + cfg.checkpoint_dir.string());
  return best;
}

struct LoadedModel {
  model::Checkpoint ckpt;
  text::Vocabulary vocab;
};

LoadedModel load_model(const CliConfig& cfg) {
  LoadedModel m{model::checkpoint_load(resolve_checkpoint(cfg)),
                text::Vocabulary::load(require_input("vocab_path", cfg.vocab_path))};
  if (m.vocab.size() != m.ckpt.config.vocab_size) {
    throw ConfigError("vocabulary size " + std::to_string(m.vocab.size()) +
                      " does not match checkpoint vocab_size " +
                      std::to_string(m.ckpt.config.vocab_size));
  }
  return m;
}

std::vector<std::string> model_tokens(const std::string& article, const LoadedModel& m) {
  std::vector<std::string> tokens = text::tokenize(article);
  const std::size_t cap = m.ckpt.config.buckets.largest().source_len;
  if (tokens.size() > cap) tokens.resize(cap);
  const auto ids = model::greedy_decode(m.vocab.encode(tokens), m.ckpt.params, m.ckpt.config);
  return m.vocab.decode(ids);
}

int cmd_prepare(const CliConfig& cfg, std::ostream& out) {
  const auto raw = corpus::load_raw_dump(require_input("raw_path", cfg.raw_path));
  const auto pairs = corpus::filter_pairs(raw);
  corpus::save_dataset(pairs, require_output("dataset_path", cfg.dataset_path));
  out << "prepare: kept " << pairs.size() << " of " << raw.size() << " records -> "
      << cfg.dataset_path.string() << '\n';
  return 0;
}

int cmd_stats(const CliConfig& cfg, std::ostream& out) {
  const auto pairs = corpus::load_dataset(require_input("dataset_path", cfg.dataset_path));
  const auto s = corpus::dataset_stats(pairs);
  const std::pair<const char*, std::size_t> rows[] = {
      {"total_pairs", s.total_pairs},
      {"max_article_words", s.max_article_words},
      {"min_article_words", s.min_article_words},
      {"max_summary_words", s.max_summary_words},
      {"min_summary_words", s.min_summary_words},
  };
  for (const auto& [name, value] : rows) {
    out << std::left << std::setw(20) << name << std::right << std::setw(10) << value << '\n';
  }
  return 0;
}

int cmd_split(const CliConfig& cfg, std::ostream& out) {
  const auto pairs = corpus::load_dataset(require_input("dataset_path", cfg.dataset_path));
  const auto parts = corpus::split_dataset(pairs, cfg.split);
  corpus::save_dataset(parts.train, require_output("train_path", cfg.train_path));
  corpus::save_dataset(parts.val, require_output("val_path", cfg.val_path));
  corpus::save_dataset(parts.test, require_output("test_path", cfg.test_path));
  out << "split: train " << parts.train.size() << ", val " << parts.val.size() << ", test "
      << parts.test.size() << '\n';
  return 0;
}

int cmd_build_vocab(const CliConfig& cfg, std::ostream& out) {
  const auto pairs = corpus::load_dataset(require_input("train_path", cfg.train_path));
  text::VocabularyBuilder builder;
  for (const auto& p : pairs) {
    builder.add(text::tokenize(p.article));
    builder.add(text::tokenize(p.summary));
  }
  const auto vocab = builder.build(cfg.model.vocab_size);
  vocab.save(require_output("vocab_path", cfg.vocab_path));
  out << "build-vocab: " << vocab.size() << " entries -> " << cfg.vocab_path.string() << '\n';
  return 0;
}

int cmd_train(const CliConfig& cfg, std::ostream& out) {
  const auto vocab = text::Vocabulary::load(require_input("vocab_path", cfg.vocab_path));
  if (vocab.size() > cfg.model.vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(vocab.size()) +
                      " entries, more than vocab_size " + std::to_string(cfg.model.vocab_size));
  }
  const auto train = corpus::load_dataset(require_input("train_path", cfg.train_path));
  const auto val = corpus::load_dataset(require_input("val_path", cfg.val_path));
  require_output("checkpoint_dir", cfg.checkpoint_dir);

  model::ModelConfig mc = cfg.model;
  mc.vocab_size = vocab.size();
  model::TrainOptions options;
  options.checkpoint_dir = cfg.checkpoint_dir;
  if (!cfg.resume.empty()) {
    options.resume = model::checkpoint_load(require_input("resume", cfg.resume));
  }
  options.on_log = [&out](const model::TrainLogEntry& e) {
    out << "step " << e.step << " lr " << e.learning_rate << " loss " << e.train_loss
        << " ppl " << e.perplexity << " val " << e.val_loss << std::endl;
  };
  const auto result = model::train_loop(encode_pairs(train, vocab), encode_pairs(val, vocab),
                                        mc, options);
  out << "train: " << result.checkpoint_paths.size() << " checkpoints in "
      << cfg.checkpoint_dir.string() << '\n';
  return 0;
}

int cmd_summarize(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(cfg);
  std::ifstream in(require_input("input_path", cfg.input_path), std::ios::binary);
  if (!in) throw Error("cannot open " + cfg.input_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string cleaned = corpus::clean_text(line);
    if (cleaned.empty()) {
      err << "warning: line " << line_no << ": empty input\n";
      out << '\n';
      continue;
    }
    out << text::join_tokens(model_tokens(cleaned, m)) << '\n';
  }
  return 0;
}

int cmd_evaluate(const CliConfig& cfg, std::ostream& out) {
  const LoadedModel m = load_model(cfg);
  const auto test = corpus::load_dataset(require_input("test_path", cfg.test_path));
  require_output("report_path", cfg.report_path);
  if (test.empty()) throw Error("empty test set");

  std::vector<std::size_t> idx(test.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (!cfg.eval_full && test.size() > cfg.eval_examples) {
    Rng rng(cfg.eval_seed);
    for (std::size_t i = 0; i < cfg.eval_examples; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    idx.resize(cfg.eval_examples);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<std::vector<std::string>> candidates, references;
  for (const std::size_t i : idx) {
    candidates.push_back(model_tokens(test[i].article, m));
    references.push_back(text::tokenize(test[i].summary));
  }
  const auto report = metrics::evaluate_corpus(candidates, references);
  metrics::write_report(report, cfg.report_path);
  out << "evaluate: n " << report.n_examples << " rouge1_f " << report.rouge1.f1
      << " rougeL_f " << report.rougeL.f1 << " bleu " << report.bleu << '\n';
  return 0;
}

}  // namespace

const std::vector<std::string>& CliConfig::keys() {
  static const std::vector<std::string> k = {
      "vocab_size",    "embed_dim",     "hidden_dim",     "num_layers",
      "buckets",       "batch_size",    "learning_rate",  "lr_decay_factor",
      "max_grad_norm", "steps_per_checkpoint",            "max_steps",
      "seed",          "train_ratio",   "val_ratio",      "test_ratio",
      "split_seed",    "raw_path",      "dataset_path",   "train_path",
      "val_path",      "test_path",     "vocab_path",     "checkpoint_dir",
      "checkpoint",    "resume",        "input_path",     "report_path",
      "eval_examples", "eval_full",     "eval_seed",
  };
  return k;
}

void CliConfig::apply(const std::map<std::string, std::string>& kv) {
  std::map<std::string, std::string> model_kv;
  const std::map<std::string, fs::path CliConfig::*> paths = {
      {"raw_path", &CliConfig::raw_path},         {"dataset_path", &CliConfig::dataset_path},
      {"train_path", &CliConfig::train_path},     {"val_path", &CliConfig::val_path},
      {"test_path", &CliConfig::test_path},       {"vocab_path", &CliConfig::vocab_path},
      {"checkpoint_dir", &CliConfig::checkpoint_dir}, {"checkpoint", &CliConfig::checkpoint},
      {"resume", &CliConfig::resume},             {"input_path", &CliConfig::input_path},
      {"report_path", &CliConfig::report_path},
  };
  for (const auto& [key, value] : kv) {
    if (auto it = paths.find(key); it != paths.end()) {
      this->*(it->second) = fs::path(value);
    } else if (key == "train_ratio") {
      split.train_ratio = to_double(key, value);
    } else if (key == "val_ratio") {
      split.val_ratio = to_double(key, value);
    } else if (key == "test_ratio") {
      split.test_ratio = to_double(key, value);
    } else if (key == "split_seed") {
      split.seed = to_uint(key, value);
    } else if (key == "eval_examples") {
      eval_examples = to_uint(key, value);
      if (eval_examples == 0) throw Error("config field eval_examples must be >= 1");
    } else if (key == "eval_full") {
      eval_full = to_bool(key, value);
    } else if (key == "eval_seed") {
      eval_seed = to_uint(key, value);
    } else {
      model_kv[key] = value;
    }
  }
  model.apply(model_kv);
}

std::map<std::string, std::string> parse_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  const auto& known = CliConfig::keys();
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(where + "unknown config key: " + key);
    }
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError(where + "duplicate config key: " + key);
    }
  }
  return kv;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Abstractive news summarization: corpus preparation, training, decoding and "
               "evaluation",
               "bans"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "key = value configuration file");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& key : CliConfig::keys()) {
    std::string names = "--" + key;
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    flag_options[key] = app.add_option(names, flag_values[key], "overrides config key " + key);
  }
  const std::pair<const char*, const char*> commands[] = {
      {"prepare", "raw dump -> cleaned, filtered dataset"},
      {"stats", "print dataset statistics"},
      {"split", "dataset -> train/val/test files"},
      {"build-vocab", "train split -> vocabulary file"},
      {"train", "train the model, writing checkpoints and a training log"},
      {"summarize", "one summary per input line on standard output"},
      {"evaluate", "ROUGE-1/ROUGE-L/BLEU report over the test split"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  // Name the offending word instead of CLI11's generic "subcommand required".
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg.starts_with("-")) {
      if (arg.find('=') == std::string_view::npos && arg != "-h" && arg != "--help") ++i;
      continue;
    }
    if (std::none_of(std::begin(commands), std::end(commands),
                     [&](const auto& c) { return arg == c.first; })) {
      err << "error: unknown subcommand \"" << arg << "\"\n";
      return 2;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = parse_config_file(config_path);
    for (const auto& [key, opt] : flag_options) {
      if (opt->count() > 0) kv[key] = flag_values[key];
    }
    CliConfig cfg;
    try {
      cfg.apply(kv);
      cfg.model.validate();
      cfg.split.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "prepare") return cmd_prepare(cfg, out);
    if (cmd == "stats") return cmd_stats(cfg, out);
    if (cmd == "split") return cmd_split(cfg, out);
    if (cmd == "build-vocab") return cmd_build_vocab(cfg, out);
    if (cmd == "train") return cmd_train(cfg, out);
    if (cmd == "summarize") return cmd_summarize(cfg, out, err);
    if (cmd == "evaluate") return cmd_evaluate(cfg, out);
    err << "error: unknown subcommand " << cmd << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace bans::cli
