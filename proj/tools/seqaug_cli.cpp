// Command-line front end: gen-data, train, eval, sweep-noise,
// dump-matrices, case-study, gradcheck.

#include "seqaug/config.hpp"
#include "seqaug/errors.hpp"
#include "seqaug/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace seqaug;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (key = value with [section] headers)");
  cmd->add_option("--seed", c.seed, "Run seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--set", c.sets, "Override a config key: section.key=value")->take_all();
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  for (const std::string& s : c.sets) apply_override(cfg, s);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out = *c.out;
  cfg.check();
  return cfg;
}

void print_metrics(const char* label, const RankingMetrics& m) {
  std::printf("%s HR@10 %.4f HR@20 %.4f NDCG@10 %.4f NDCG@20 %.4f (%zu users)\n", label, m.hr10, m.hr20, m.ndcg10,
              m.ndcg20, m.users);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive sequence augmentation for self-supervised sequential recommendation"};
  app.require_subcommand(1);

  Common gen_c, train_c, eval_c, sweep_c, dump_c, case_c, grad_c;
  auto* gen = app.add_subcommand("gen-data", "Write the synthetic Markov dataset as TSV");
  add_common(gen, gen_c);

  auto* tr = app.add_subcommand("train", "Train one model and write reports and checkpoints");
  add_common(tr, train_c);

  std::string eval_ckpt;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the validation and test targets");
  add_common(ev, eval_c);
  ev->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();

  auto* sw = app.add_subcommand("sweep-noise", "Train every method at every noise ratio and seed");
  add_common(sw, sweep_c);

  std::string dump_ckpt;
  std::size_t dump_len = 0;
  auto* dm = app.add_subcommand("dump-matrices", "Average transform matrices over a sequence-length cohort");
  add_common(dm, dump_c);
  dm->add_option("--checkpoint", dump_ckpt, "Checkpoint file")->required();
  dm->add_option("--length", dump_len, "Training-sequence length of the cohort")->required();

  std::string case_ckpt, case_user;
  auto* cs = app.add_subcommand("case-study", "Show s*, both views and their NDCG for one user");
  add_common(cs, case_c);
  cs->add_option("--checkpoint", case_ckpt, "Checkpoint file")->required();
  cs->add_option("--user", case_user, "User token or dense id")->required();

  std::size_t trials = 20;
  double tolerance = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every primitive and composite loss");
  add_common(gc, grad_c);
  gc->add_option("--trials", trials, "Random instances per item");
  gc->add_option("--tolerance", tolerance, "Maximum relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const RunConfig cfg = resolve(gen_c);
      const Dataset data = generate_synthetic(cfg.data.synthetic, cfg.data.seed);
      fs::create_directories(cfg.out);
      write_tsv(fs::path(cfg.out) / "data.tsv", data);
      std::printf("wrote %zu users, %zu items to %s\n", data.sequences.size(), data.vocab_size,
                  (fs::path(cfg.out) / "data.tsv").c_str());
    } else if (*tr) {
      const RunConfig cfg = resolve(train_c);
      const PreparedData data = prepare_data(cfg);
      const TrainResult r = train(cfg, data, fs::path(cfg.out));
      for (const EpochReport& e : r.reports) {
        std::printf("epoch %zu l_rec %.4f l_ssl %.4f l_info_gen %.4f l_div %.4f l_ndcg %.4f valid HR@10 %.4f\n",
                    e.epoch, e.losses.l_rec, e.losses.l_ssl, e.losses.l_info_gen, e.losses.l_div, e.losses.l_ndcg,
                    e.valid.hr10);
      }
      std::printf("best epoch %zu\n", r.best_epoch);
      print_metrics("test", r.test);
    } else if (*ev) {
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      RunConfig cfg = RunConfig::parse(ckpt.meta.at("config").get<std::string>());
      if (eval_c.out) cfg.out = *eval_c.out;
      const PreparedData data = prepare_data(cfg);
      const Model m = from_checkpoint(ckpt);
      const RankingMetrics valid = evaluate(data.split, m.rec, EvalTarget::Valid);
      const RankingMetrics test = evaluate(data.split, m.rec, EvalTarget::Test);
      print_metrics("valid", valid);
      print_metrics("test", test);
      fs::create_directories(cfg.out);
      std::ofstream out(fs::path(cfg.out) / "eval.csv");
      out << "split,HR@10,HR@20,NDCG@10,NDCG@20\n";
      for (const auto& [name, mt] : {std::pair{"valid", valid}, std::pair{"test", test}}) {
        out << name << ',' << format_double(mt.hr10) << ',' << format_double(mt.hr20) << ','
            << format_double(mt.ndcg10) << ',' << format_double(mt.ndcg20) << '\n';
      }
    } else if (*sw) {
      const RunConfig cfg = resolve(sweep_c);
      const std::vector<SweepRow> rows = sweep_noise(cfg);
      fs::create_directories(cfg.out);
      write_sweep_csv(fs::path(cfg.out) / "sweep.csv", rows);
      for (const SweepRow& r : rows) {
        std::printf("%s ratio %s seed %llu HR@10 %.4f\n", r.method.c_str(), format_double(r.ratio).c_str(),
                    static_cast<unsigned long long>(r.seed), r.test.hr10);
      }
    } else if (*dm) {
      const std::string out = dump_c.out.value_or("out");
      const MatrixDump d = dump_matrices(load_checkpoint(dump_ckpt), dump_len, fs::path(out));
      std::printf("averaged %zu users, n = %zu; placed view1 %zu view2 %zu; written to %s\n", d.users, d.n,
                  d.placed[0], d.placed[1], out.c_str());
    } else if (*cs) {
      const Checkpoint ckpt = load_checkpoint(case_ckpt);
      const CaseStudy study = case_study(ckpt, case_user);
      const RunConfig cfg = RunConfig::parse(ckpt.meta.at("config").get<std::string>());
      const PreparedData data = prepare_data(cfg);
      const std::string text = study.render(data.dataset.item_names);
      std::fputs(text.c_str(), stdout);
      const std::string out = case_c.out.value_or("out");
      fs::create_directories(out);
      std::ofstream(fs::path(out) / ("case_study_" + case_user + ".txt")) << text;
    } else if (*gc) {
      const RunConfig cfg = resolve(grad_c);
      const auto lines = run_gradchecks(gradcheck_registry(), trials, tolerance, cfg.seed);
      bool ok = true;
      for (const GradCheckLine& l : lines) {
        std::printf("%-28s %-4s worst %.3e%s%s\n", l.name.c_str(), l.pass ? "PASS" : "FAIL", l.worst,
                    l.error.empty() ? "" : "  ", l.error.c_str());
        ok = ok && l.pass;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
