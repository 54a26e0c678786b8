#pragma once

// Run configuration. The file format is flat `key = value` lines grouped
// under `[section]` headers; `#` starts a comment. Every setting is also
// addressable as `section.key` for command-line overrides. Writing and
// re-reading a config reproduces it exactly (doubles use 17 digits).

#include "seqaug/core_data.hpp"
#include "seqaug/objectives.hpp"
#include "seqaug/sinkhorn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seqaug {

struct DataConfig {
  std::string source = "synthetic";  // synthetic | tsv
  std::string path;                  // TSV file when source = tsv
  SyntheticSpec synthetic;
  std::uint64_t seed = 1;            // synthetic generator seed
  std::size_t max_len = 50;
};

struct ModelConfig {
  std::size_t d = 64;
  std::size_t d_prime = 32;
  std::size_t pad_k = 5;
  double emb_std = 0.5;
};

struct TrainConfig {
  std::string method = "adaptive";  // backbone | static-<kind> | adaptive
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double lr_gen = 1e-3;
  double lr_rec = 1e-3;
  double momentum = 0.9;
  double beta = 0.1;
  std::size_t warmup_gen_epochs = 0;
  double noise_ratio = 0.0;
};

struct SweepConfig {
  std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t seeds = 5;
  std::vector<std::string> methods{"backbone",        "static-crop",       "static-mask", "static-reorder",
                                   "static-insert",   "static-substitute", "adaptive"};
  std::size_t jobs = 1;
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::string out = "out";
  DataConfig data;
  ModelConfig model;
  SinkhornConfig sinkhorn;
  ObjectiveConfig objective;
  TrainConfig train;
  SweepConfig sweep;

  // `key` is `section.name`, or `seed` / `out` for the run section.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static std::vector<std::string> keys();

  std::string to_text() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void check() const;
};

// Applies `key=value`.
void apply_override(RunConfig& cfg, const std::string& assignment);

std::string format_double(double v);

}  // namespace seqaug
