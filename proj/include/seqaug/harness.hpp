#pragma once

// Training loop, noise sweeps, matrix dumps, case studies and the
// gradient-check registry behind the command line.

#include "seqaug/augment.hpp"
#include "seqaug/autodiff.hpp"
#include "seqaug/checkpoint.hpp"
#include "seqaug/config.hpp"
#include "seqaug/core_data.hpp"
#include "seqaug/generator.hpp"
#include "seqaug/recommender.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace seqaug {

struct Method {
  enum class Kind { Backbone, Static, Adaptive } kind = Kind::Backbone;
  AugmentKind augment = AugmentKind::Crop;  // Static only

  static Method parse(const std::string& name);
  std::string name() const;
  bool uses_views() const { return kind != Kind::Backbone; }
};

// Independent random streams derived from the run seed, so methods sharing
// a seed share initialization and batch order.
enum class Stream : std::uint64_t { Noise = 1, Init = 2, Shuffle = 3, Augment = 4, Dump = 5 };
Rng stream_rng(std::uint64_t seed, Stream stream, std::uint64_t salt = 0);

struct LossComponents {
  double l_info_gen = 0.0, l_div = 0.0, l_ndcg = 0.0, l_rec = 0.0, l_ssl = 0.0;
};

struct EpochReport {
  std::size_t epoch = 0;
  LossComponents losses;
  RankingMetrics valid;
  // Fraction of users whose summed semantic hinge was exactly 0 in the
  // epoch's generator phases (adaptive runs only).
  double hinge_zero_frac = 0.0;
  double gen_seconds = 0.0, rec_seconds = 0.0, eval_seconds = 0.0;
};

struct Model {
  BackboneParams rec;
  GeneratorParams gen;
};

struct TrainResult {
  std::vector<EpochReport> reports;
  Model best;
  Model last;
  std::size_t best_epoch = 0;
  RankingMetrics test;  // with the best-validation parameters
};

struct PreparedData {
  Dataset dataset;
  DatasetSplit split;  // after noise injection
};

PreparedData prepare_data(const RunConfig& cfg);
Model init_model(const RunConfig& cfg, std::size_t vocab);

// Runs training on prepared data. When `out` is set, writes config.ini,
// losses.csv, metrics.csv, timings.csv, best.ckpt, last.ckpt and
// test_metrics.csv there.
TrainResult train(const RunConfig& cfg, const PreparedData& data,
                  const std::optional<std::filesystem::path>& out = std::nullopt);
TrainResult train(const RunConfig& cfg);

// Phase-G loss pieces for one batch (exposed for tests and timing).
struct GeneratorBatch {
  ad::Var loss, info, div, ndcg;
  std::size_t hinge_zero = 0;
  std::size_t users = 0;
};
GeneratorBatch generator_batch(ad::Tape& tape, const std::vector<PaddedSequence>& batch, const BackboneVars& rec,
                               const GeneratorVars& gen, const RunConfig& cfg);

Checkpoint to_checkpoint(const Model& m, const RunConfig& cfg);
Model from_checkpoint(const Checkpoint& ckpt);

struct SweepRow {
  std::string method;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  RankingMetrics test;
};

// One fresh training per (method, ratio, seed); seeds are run.seed + i.
std::vector<SweepRow> sweep_noise(const RunConfig& cfg);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

struct MatrixDump {
  std::size_t users = 0;
  std::size_t n = 0;
  std::array<Eigen::MatrixXd, 2> mean;
  // |view position - source row| -> count over placed rows, per view
  std::array<std::map<std::size_t, std::size_t>, 2> histogram;
  std::array<std::size_t, 2> placed{0, 0};
};

// Averages the hard matrices over users whose training sequence has exactly
// `cohort_len` items. Writes view{1,2}.pgm, view{1,2}.txt and
// histogram.csv to `out` when given.
MatrixDump dump_matrices(const Checkpoint& ckpt, std::size_t cohort_len,
                         const std::optional<std::filesystem::path>& out = std::nullopt);

struct CaseStudy {
  PaddedSequence padded;
  std::array<TransformMatrix, 2> matrices;
  std::array<std::vector<ItemId>, 2> views;
  std::array<double, 2> ndcg{0.0, 0.0};
  double ndcg_star = 0.0;
  std::array<AugmentationProfile, 2> profile;

  std::string render(const std::vector<std::string>& item_names = {}) const;
};

CaseStudy make_case_study(const PaddedSequence& padded, const std::array<TransformMatrix, 2>& matrices,
                          double gamma);
// `user` is an original user token or a dense user id.
CaseStudy case_study(const Checkpoint& ckpt, const std::string& user);

struct GradCheckItem {
  std::string name;
  // Draws one random instance: the inputs and the scalar function.
  std::function<std::pair<std::vector<ad::Matrix>, ad::ScalarFn>(Rng&)> instance;
  // Items whose analytic gradient must be exactly zero instead of matching
  // finite differences.
  bool expect_zero = false;
};

struct GradCheckLine {
  std::string name;
  double worst = 0.0;
  bool pass = false;
  std::string error;
};

std::vector<GradCheckItem> gradcheck_registry();
std::vector<GradCheckLine> run_gradchecks(const std::vector<GradCheckItem>& items, std::size_t trials,
                                          double tolerance, std::uint64_t seed);

}  // namespace seqaug
