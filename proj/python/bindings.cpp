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


#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bans/cli.hpp"
#include "bans/corpus.hpp"
#include "bans/metrics.hpp"
#include "bans/seq2seq.hpp"
#include "bans/textproc.hpp"

namespace py = pybind11;
using namespace bans;

namespace {

std::vector<text::EncodedPair> encode(const std::vector<corpus::ArticleSummaryPair>& pairs,
                                      const text::Vocabulary& vocab) {
  std::vector<text::EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({vocab.encode(text::tokenize(p.article)),
                   vocab.encode(text::tokenize(p.summary))});
  }
  return out;
}

model::ModelConfig config_from_kwargs(const py::kwargs& kwargs) {
  model::ModelConfig c;
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : kwargs) kv[py::str(k)] = py::str(v);
  c.apply(kv);
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bengali abstractive news summarization core";

  auto base = py::register_exception<Error>(m, "BansError", PyExc_ValueError);
  py::register_exception<model::CheckpointError>(m, "CheckpointError", base.ptr());

  // corpus
  py::class_<corpus::ArticleSummaryPair>(m, "Pair")
      .def(py::init<std::string, std::string>(), py::arg("article"), py::arg("summary"))
      .def_readwrite("article", &corpus::ArticleSummaryPair::article)
      .def_readwrite("summary", &corpus::ArticleSummaryPair::summary)
      .def("__eq__", [](const corpus::ArticleSummaryPair& a,
                        const corpus::ArticleSummaryPair& b) { return a == b; })
      .def("__repr__", [](const corpus::ArticleSummaryPair& p) {
        return "Pair(article=" + py::repr(py::str(p.article)).cast<std::string>() +
               ", summary=" + py::repr(py::str(p.summary)).cast<std::string>() + ")";
      });

  py::class_<corpus::RawRecord>(m, "RawRecord")
      .def(py::init([](std::string article, std::string summary,
                       std::optional<std::string> source_id) {
             return corpus::RawRecord{std::move(article), std::move(summary),
                                      std::move(source_id)};
           }),
           py::arg("article_text"), py::arg("summary_text"), py::arg("source_id") = py::none())
      .def_readwrite("article_text", &corpus::RawRecord::article_text)
      .def_readwrite("summary_text", &corpus::RawRecord::summary_text)
      .def_readwrite("source_id", &corpus::RawRecord::source_id);

  py::class_<corpus::DatasetStats>(m, "DatasetStats")
      .def_readonly("total_pairs", &corpus::DatasetStats::total_pairs)
      .def_readonly("max_article_words", &corpus::DatasetStats::max_article_words)
      .def_readonly("min_article_words", &corpus::DatasetStats::min_article_words)
      .def_readonly("max_summary_words", &corpus::DatasetStats::max_summary_words)
      .def_readonly("min_summary_words", &corpus::DatasetStats::min_summary_words);

  m.def("clean_text", &corpus::clean_text, py::arg("raw"));
  m.def("is_valid_utf8", &corpus::is_valid_utf8, py::arg("text"));
  m.def("word_count", &corpus::word_count, py::arg("text"));
  m.def("is_valid_pair", &corpus::is_valid_pair, py::arg("pair"));
  m.def("filter_pairs", [](const std::vector<corpus::RawRecord>& r) {
    return corpus::filter_pairs(r);
  }, py::arg("records"));
  m.def("dataset_stats", [](const std::vector<corpus::ArticleSummaryPair>& p) {
    return corpus::dataset_stats(p);
  }, py::arg("pairs"));
  m.def(
      "split_dataset",
      [](const std::vector<corpus::ArticleSummaryPair>& pairs, double train, double val,
         double test, std::uint64_t seed) {
        const auto s = corpus::split_dataset(pairs, {train, val, test, seed});
        return py::make_tuple(s.train, s.val, s.test);
      },
      py::arg("pairs"), py::arg("train_ratio") = 0.7, py::arg("val_ratio") = 0.2,
      py::arg("test_ratio") = 0.1, py::arg("seed") = 0);
  m.def("load_dataset", &corpus::load_dataset, py::arg("path"));
  m.def("save_dataset", [](const std::vector<corpus::ArticleSummaryPair>& p,
                           const std::filesystem::path& path) { corpus::save_dataset(p, path); },
        py::arg("pairs"), py::arg("path"));
  m.def("load_raw_dump", &corpus::load_raw_dump, py::arg("path"));

  // text
  m.def("tokenize", &text::tokenize, py::arg("text"));
  m.def("join_tokens", [](const std::vector<std::string>& t) { return text::join_tokens(t); },
        py::arg("tokens"));

  py::class_<text::Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def_static("from_tokens", &text::Vocabulary::from_tokens, py::arg("tokens"))
      .def_static("load", &text::Vocabulary::load, py::arg("path"))
      .def("save", &text::Vocabulary::save, py::arg("path"))
      .def("__len__", &text::Vocabulary::size)
      .def("__contains__", &text::Vocabulary::contains)
      .def_property_readonly("tokens", &text::Vocabulary::tokens)
      .def("id", &text::Vocabulary::id, py::arg("token"))
      .def("token", &text::Vocabulary::token, py::arg("id"))
      .def("encode", [](const text::Vocabulary& v, const std::vector<std::string>& t) {
        return v.encode(t);
      }, py::arg("tokens"))
      .def("decode", [](const text::Vocabulary& v, const std::vector<text::TokenId>& ids) {
        return v.decode(ids);
      }, py::arg("ids"))
      .def("__eq__", [](const text::Vocabulary& a, const text::Vocabulary& b) { return a == b; });

  m.def("build_vocab", [](const std::vector<std::string>& tokens, std::size_t max_size) {
    return text::build_vocab(tokens, max_size);
  }, py::arg("tokens"), py::arg("max_size") = text::kDefaultVocabSize);

  m.def(
      "assign_bucket",
      [](std::size_t src, std::size_t tgt) {
        const auto a = text::assign_bucket(src, tgt, text::BucketSpec{});
        return py::make_tuple(a.index, a.truncated);
      },
      py::arg("src_len"), py::arg("tgt_len"));
  m.def("default_buckets", [] {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const text::BucketSpec spec;
    for (const auto& b : spec.buckets()) out.emplace_back(b.source_len, b.target_len);
    return out;
  });

  // metrics
  py::class_<metrics::ScoreTriple>(m, "ScoreTriple")
      .def_readonly("precision", &metrics::ScoreTriple::precision)
      .def_readonly("recall", &metrics::ScoreTriple::recall)
      .def_readonly("f1", &metrics::ScoreTriple::f1)
      .def("__repr__", [](const metrics::ScoreTriple& s) {
        std::ostringstream o;
        o << "ScoreTriple(precision=" << s.precision << ", recall=" << s.recall
          << ", f1=" << s.f1 << ")";
        return o.str();
      });
  using Toks = std::vector<std::string>;
  m.def("rouge_n", [](const Toks& c, const Toks& r, std::size_t n) {
    return metrics::rouge_n(c, r, n);
  }, py::arg("candidate"), py::arg("reference"), py::arg("n") = 1);
  m.def("rouge_l", [](const Toks& c, const Toks& r) { return metrics::rouge_l(c, r); },
        py::arg("candidate"), py::arg("reference"));
  m.def("bleu", [](const Toks& c, const Toks& r, std::size_t max_n) {
    return metrics::bleu(c, r, max_n);
  }, py::arg("candidate"), py::arg("reference"), py::arg("max_n") = 4);

  py::class_<metrics::EvalReport>(m, "EvalReport")
      .def_readonly("n_examples", &metrics::EvalReport::n_examples)
      .def_readonly("rouge1", &metrics::EvalReport::rouge1)
      .def_readonly("rougeL", &metrics::EvalReport::rougeL)
      .def_readonly("bleu", &metrics::EvalReport::bleu)
      .def("write", &metrics::write_report, py::arg("path"));
  m.def("evaluate_corpus", [](const std::vector<Toks>& c, const std::vector<Toks>& r) {
    return metrics::evaluate_corpus(c, r);
  }, py::arg("candidates"), py::arg("references"));
  m.def("read_report", &metrics::read_report, py::arg("path"));

  // model
  py::class_<model::ModelConfig>(m, "ModelConfig")
      .def(py::init(&config_from_kwargs))
      .def("to_dict", &model::ModelConfig::to_map)
      .def("__eq__", [](const model::ModelConfig& a, const model::ModelConfig& b) { return a == b; })
      .def_readwrite("vocab_size", &model::ModelConfig::vocab_size)
      .def_readwrite("embed_dim", &model::ModelConfig::embed_dim)
      .def_readwrite("hidden_dim", &model::ModelConfig::hidden_dim)
      .def_readwrite("batch_size", &model::ModelConfig::batch_size)
      .def_readwrite("learning_rate", &model::ModelConfig::learning_rate)
      .def_readwrite("lr_decay_factor", &model::ModelConfig::lr_decay_factor)
      .def_readwrite("max_grad_norm", &model::ModelConfig::max_grad_norm)
      .def_readwrite("steps_per_checkpoint", &model::ModelConfig::steps_per_checkpoint)
      .def_readwrite("max_steps", &model::ModelConfig::max_steps)
      .def_readwrite("seed", &model::ModelConfig::seed);

  py::class_<model::ModelParams>(m, "ModelParams")
      .def_property_readonly("parameter_count", &model::ModelParams::parameter_count)
      .def_property_readonly("tensor_names", [](const model::ModelParams& p) {
        std::vector<std::string> names;
        for (const auto* t : p.tensors()) names.push_back(t->name);
        return names;
      });
  m.def("build_model", &model::build_model, py::arg("config"), py::arg("seed") = 0);

  py::class_<model::Checkpoint>(m, "Checkpoint")
      .def_readonly("step", &model::Checkpoint::step)
      .def_readonly("config", &model::Checkpoint::config)
      .def_readonly("params", &model::Checkpoint::params)
      .def_readonly("learning_rate", &model::Checkpoint::learning_rate)
      .def_readonly("val_losses", &model::Checkpoint::val_losses)
      .def("save", [](const model::Checkpoint& c, const std::filesystem::path& p) {
        model::checkpoint_save(p, c);
      }, py::arg("path"));
  m.def("load_checkpoint", &model::checkpoint_load, py::arg("path"));

  m.def(
      "train",
      [](const std::vector<corpus::ArticleSummaryPair>& train,
         const std::vector<corpus::ArticleSummaryPair>& val, const text::Vocabulary& vocab,
         model::ModelConfig config, const std::filesystem::path& checkpoint_dir) {
        config.vocab_size = vocab.size();
        const auto tr = encode(train, vocab);
        const auto va = encode(val, vocab);
        py::gil_scoped_release release;
        return model::train_loop(tr, va, config, {checkpoint_dir}).final_state;
      },
      py::arg("train"), py::arg("val"), py::arg("vocab"), py::arg("config"),
      py::arg("checkpoint_dir") = std::filesystem::path{});
  m.def(
      "summarize",
      [](const std::string& text, const text::Vocabulary& vocab, const model::Checkpoint& c) {
        return model::summarize_text(text, vocab, c.params, c.config);
      },
      py::arg("text"), py::arg("vocab"), py::arg("checkpoint"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"bans"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
