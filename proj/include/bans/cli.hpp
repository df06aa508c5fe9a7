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

#ifndef BANS_CLI_HPP_
#define BANS_CLI_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bans/corpus.hpp"
#include "bans/seq2seq.hpp"

namespace bans::cli {

// Everything a subcommand may read from the config file or flags.
struct CliConfig {
  model::ModelConfig model;
  corpus::SplitSpec split;
  std::filesystem::path raw_path;
  std::filesystem::path dataset_path;
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::filesystem::path test_path;
  std::filesystem::path vocab_path;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path checkpoint;  // explicit file; defaults to the latest in checkpoint_dir
  std::filesystem::path resume;      // train: continue from this checkpoint
  std::filesystem::path input_path;
  std::filesystem::path report_path;
  std::size_t eval_examples = 100;
  bool eval_full = false;
  std::uint64_t eval_seed = 0;

  // Every recognized key, in documentation order.
  static const std::vector<std::string>& keys();
  // Applies key/value pairs; unknown keys and malformed values throw.
  void apply(const std::map<std::string, std::string>& kv);
};

// Parses `key = value` lines with '#' comments.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Entry point of the `bans` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bans::cli

#endif  // BANS_CLI_HPP_
