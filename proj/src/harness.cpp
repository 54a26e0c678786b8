#include "seqaug/harness.hpp"

#include "seqaug/errors.hpp"
#include "seqaug/objectives.hpp"
#include "seqaug/params.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace seqaug {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::MatrixXd embedding_rows(const Eigen::MatrixXd& emb, const std::vector<ItemId>& items) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(items.size()), emb.cols());
  for (std::size_t t = 0; t < items.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = emb.row(items[t]);
  return out;
}

std::array<TransformMatrix, 2> generator_matrices(const Model& model, const PaddedSequence& s,
                                                  const SinkhornConfig& cfg) {
  ad::Tape tape;
  const GeneratorVars gv = bind(tape, model.gen, false);
  const auto a = transition_matrices(tape.constant(embedding_rows(model.rec.emb, s.items())), gv);
  return {project_hard(a[0].value(), cfg), project_hard(a[1].value(), cfg)};
}

ad::Var mean_of(const std::vector<ad::Var>& terms, ad::Tape& tape) {
  if (terms.empty()) return tape.constant(Eigen::MatrixXd::Zero(1, 1));
  ad::Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) total = ad::add(total, terms[i]);
  return ad::scalar_mul(total, 1.0 / static_cast<double>(terms.size()));
}

void require_finite(double v, const char* phase, std::size_t epoch, std::size_t batch, const char* component) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite ") + component + " in phase " + phase + ", epoch " +
                         std::to_string(epoch) + ", batch " + std::to_string(batch));
  }
}

bool better(const RankingMetrics& a, const RankingMetrics& b) {
  if (a.hr10 != b.hr10) return a.hr10 > b.hr10;
  return a.ndcg10 > b.ndcg10;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

Method Method::parse(const std::string& name) {
  Method m;
  if (name == "backbone") {
    m.kind = Kind::Backbone;
  } else if (name == "adaptive") {
    m.kind = Kind::Adaptive;
  } else if (name.rfind("static-", 0) == 0) {
    m.kind = Kind::Static;
    m.augment = augment_kind_from_string(name.substr(7));
  } else {
    throw InvalidArgument("unknown method '" + name + "' (backbone, static-<kind>, adaptive)");
  }
  return m;
}

std::string Method::name() const {
  switch (kind) {
    case Kind::Backbone:
      return "backbone";
    case Kind::Adaptive:
      return "adaptive";
    case Kind::Static:
      break;
  }
  return "static-" + to_string(augment);
}

Rng stream_rng(std::uint64_t seed, Stream stream, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(salt),
                    static_cast<std::uint32_t>(salt >> 32)};
  return Rng(seq);
}

PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData out;
  if (cfg.data.source == "tsv") {
    out.dataset = load_tsv(cfg.data.path);
  } else {
    out.dataset = generate_synthetic(cfg.data.synthetic, cfg.data.seed);
  }
  out.split = leave_one_out_split(out.dataset.sequences, cfg.data.max_len);
  if (cfg.train.noise_ratio > 0.0) {
    Rng rng = stream_rng(cfg.seed, Stream::Noise);
    out.split = inject_noise(out.split, cfg.train.noise_ratio, out.dataset.vocab_size, rng);
  }
  return out;
}

Model init_model(const RunConfig& cfg, std::size_t vocab) {
  Rng rng = stream_rng(cfg.seed, Stream::Init);
  Model m;
  m.rec = BackboneParams::init(vocab, cfg.data.max_len + cfg.model.pad_k, cfg.model.d, cfg.model.emb_std, rng);
  m.gen = GeneratorParams::init(cfg.model.d, cfg.model.d_prime, rng);
  return m;
}

GeneratorBatch generator_batch(ad::Tape& tape, const std::vector<PaddedSequence>& batch, const BackboneVars& rec,
                               const GeneratorVars& gen, const RunConfig& cfg) {
  GeneratorBatch out;
  std::vector<ad::Var> divs;
  std::vector<ad::Var> ndcgs;
  std::vector<ad::Var> reps[2];
  for (const PaddedSequence& s : batch) {
    const std::vector<ItemId> items = s.items();
    const ad::Var emb = item_rows(items, rec);
    const ViewPair vp = generate_views(s, emb, gen, cfg.sinkhorn);
    const RelevanceProfile profile = make_profile(s.base_size(), s.size(), cfg.objective.gamma);
    divs.push_back(diversity_loss(vp.m(0), vp.m(1), cfg.objective));
    ndcgs.push_back(semantic_loss(vp.m(0), vp.m(1), profile));
    if (ndcgs.back().scalar() == 0.0) ++out.hinge_zero;
    ++out.users;

    std::array<std::vector<bool>, 2> valid;
    bool usable = true;
    for (int z = 0; z < 2; ++z) {
      valid[z].resize(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) valid[z][j] = vp.hard(z).source(j) >= 0;
      usable = usable && std::find(valid[z].begin(), valid[z].end(), true) != valid[z].end();
    }
    if (!usable) continue;
    for (int z = 0; z < 2; ++z) {
      const ad::Var x = ad::matmul(ad::transpose(vp.m(z)), emb);
      reps[z].push_back(encode_embedded(x, valid[z], rec));
    }
  }
  out.div = mean_of(divs, tape);
  out.ndcg = mean_of(ndcgs, tape);
  if (reps[0].size() >= 2) {
    out.info = infonce(ad::stack_rows(reps[0]), ad::stack_rows(reps[1]), cfg.objective.tau, Agreement::Minimize,
                       cfg.objective.negatives);
  } else {
    out.info = tape.constant(Eigen::MatrixXd::Zero(1, 1));
  }
  out.loss = joint_generator_loss(out.info, out.div, out.ndcg, cfg.objective);
  return out;
}

Checkpoint to_checkpoint(const Model& m, const RunConfig& cfg) {
  Model copy = m;
  Checkpoint ckpt;
  for (const NamedMatrix& nm : copy.rec.named()) ckpt.tensors.emplace(nm.name, *nm.value);
  for (const NamedMatrix& nm : copy.gen.named()) ckpt.tensors.emplace(nm.name, *nm.value);
  ckpt.meta["config"] = cfg.to_text();
  return ckpt;
}

Model from_checkpoint(const Checkpoint& ckpt) {
  Model m;
  for (const NamedMatrix& nm : m.rec.named()) *nm.value = ckpt.at(nm.name);
  for (const NamedMatrix& nm : m.gen.named()) *nm.value = ckpt.at(nm.name);
  return m;
}

TrainResult train(const RunConfig& cfg, const PreparedData& data, const std::optional<std::filesystem::path>& out) {
  cfg.check();
  const Method method = Method::parse(cfg.train.method);
  const DatasetSplit& split = data.split;
  const std::size_t vocab = data.dataset.vocab_size;
  if (split.users.size() < 2) throw DataError("training needs at least 2 users");

  Model model = init_model(cfg, vocab);
  MomentumSgd opt_rec(cfg.train.lr_rec, cfg.train.momentum);
  MomentumSgd opt_gen(cfg.train.lr_gen, cfg.train.momentum);
  Rng shuffle_rng = stream_rng(cfg.seed, Stream::Shuffle);
  Rng aug_rng = stream_rng(cfg.seed, Stream::Augment);
  std::vector<std::size_t> order(split.users.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  {
    EpochReport r;
    const auto t0 = Clock::now();
    r.valid = evaluate(split, model.rec, EvalTarget::Valid);
    r.eval_seconds = seconds_since(t0);
    result.reports.push_back(r);
    result.best = model;
  }

  const std::size_t b_size = cfg.train.batch_size;
  for (std::size_t epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochReport rep;
    rep.epoch = epoch;
    std::size_t seen = 0;
    std::size_t hinge_users = 0;
    std::size_t hinge_zero = 0;
    const bool warmup = method.kind == Method::Kind::Adaptive && epoch <= cfg.train.warmup_gen_epochs;

    for (std::size_t start = 0, batch = 0; start < order.size(); start += b_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + b_size);
      const double weight = static_cast<double>(stop - start);
      seen += stop - start;

      std::vector<PaddedSequence> padded;
      if (method.uses_views()) {
        for (std::size_t i = start; i < stop; ++i) {
          const UserSplit& u = split.users[order[i]];
          InteractionSequence seq;
          seq.user = u.user;
          seq.items = u.train;
          padded.push_back(pad_sequence(seq, cfg.model.pad_k, vocab, aug_rng));
        }
      }

      if (method.kind == Method::Kind::Adaptive) {
        const auto t0 = Clock::now();
        ad::Tape tape;
        const BackboneVars rv = bind(tape, model.rec, false);
        const GeneratorVars gv = bind(tape, model.gen, true);
        const GeneratorBatch g = generator_batch(tape, padded, rv, gv, cfg);
        require_finite(g.info.scalar(), "G", epoch, batch, "l_info_gen");
        require_finite(g.div.scalar(), "G", epoch, batch, "l_div");
        require_finite(g.ndcg.scalar(), "G", epoch, batch, "l_ndcg");
        tape.backward(g.loss);
        opt_gen.step(model.gen.named(), gv.all());
        rep.losses.l_info_gen += weight * g.info.scalar();
        rep.losses.l_div += weight * g.div.scalar();
        rep.losses.l_ndcg += weight * g.ndcg.scalar();
        hinge_users += g.users;
        hinge_zero += g.hinge_zero;
        rep.gen_seconds += seconds_since(t0);
      }
      if (warmup) continue;

      const auto t0 = Clock::now();
      std::vector<std::array<std::vector<ItemId>, 2>> views;
      for (const PaddedSequence& s : padded) {
        std::array<TransformMatrix, 2> mats;
        if (method.kind == Method::Kind::Adaptive) {
          mats = generator_matrices(model, s, cfg.sinkhorn);
        } else {
          for (int z = 0; z < 2; ++z) {
            mats[z] = random_augmentation(method.augment, s.size(), s.base_size(), cfg.objective.gamma, aug_rng);
          }
        }
        const std::vector<ItemId> items = s.items();
        views.push_back({apply_items(mats[0], items), apply_items(mats[1], items)});
      }

      ad::Tape tape;
      const BackboneVars rv = bind(tape, model.rec, true);
      std::vector<ad::Var> totals;
      std::size_t terms = 0;
      for (std::size_t i = start; i < stop; ++i) {
        LossSum ls = next_item_loss(split.users[order[i]].train, rv);
        if (ls.terms == 0) continue;
        totals.push_back(ls.total);
        terms += ls.terms;
      }
      if (terms == 0) continue;
      ad::Var total = totals.front();
      for (std::size_t i = 1; i < totals.size(); ++i) total = ad::add(total, totals[i]);
      const ad::Var l_rec = ad::scalar_mul(total, 1.0 / static_cast<double>(terms));
      require_finite(l_rec.scalar(), "R", epoch, batch, "l_rec");
      ad::Var loss = l_rec;
      if (!views.empty()) {
        const ad::Var l_ssl = ssl_loss(views, rv, cfg.objective.tau, cfg.objective.negatives);
        if (l_ssl.valid()) {
          require_finite(l_ssl.scalar(), "R", epoch, batch, "l_ssl");
          rep.losses.l_ssl += weight * l_ssl.scalar();
          loss = ad::add(l_rec, ad::scalar_mul(l_ssl, cfg.train.beta));
        }
      }
      rep.losses.l_rec += weight * l_rec.scalar();
      tape.backward(loss);
      opt_rec.step(model.rec.named(), rv.all());
      rep.rec_seconds += seconds_since(t0);
    }

    const double n = static_cast<double>(seen);
    rep.losses.l_info_gen /= n;
    rep.losses.l_div /= n;
    rep.losses.l_ndcg /= n;
    rep.losses.l_rec /= n;
    rep.losses.l_ssl /= n;
    rep.hinge_zero_frac = hinge_users ? static_cast<double>(hinge_zero) / static_cast<double>(hinge_users) : 0.0;

    const auto t0 = Clock::now();
    rep.valid = evaluate(split, model.rec, EvalTarget::Valid);
    rep.eval_seconds = seconds_since(t0);
    if (better(rep.valid, result.reports[result.best_epoch].valid)) {
      result.best = model;
      result.best_epoch = epoch;
    }
    result.reports.push_back(rep);
  }
  result.last = model;
  result.test = evaluate(split, result.best.rec, EvalTarget::Test);

  if (out) {
    std::filesystem::create_directories(*out);
    cfg.save(*out / "config.ini");
    auto losses = open_out(*out / "losses.csv");
    auto metrics = open_out(*out / "metrics.csv");
    auto timings = open_out(*out / "timings.csv");
    losses << "epoch,l_info_gen,l_div,l_ndcg,l_rec,l_ssl\n";
    metrics << "epoch,HR@10,HR@20,NDCG@10,NDCG@20,hinge_zero_frac\n";
    timings << "epoch,gen_seconds,rec_seconds,eval_seconds\n";
    for (const EpochReport& r : result.reports) {
      losses << r.epoch << ',' << format_double(r.losses.l_info_gen) << ',' << format_double(r.losses.l_div) << ','
             << format_double(r.losses.l_ndcg) << ',' << format_double(r.losses.l_rec) << ','
             << format_double(r.losses.l_ssl) << '\n';
      metrics << r.epoch << ',' << format_double(r.valid.hr10) << ',' << format_double(r.valid.hr20) << ','
              << format_double(r.valid.ndcg10) << ',' << format_double(r.valid.ndcg20) << ','
              << format_double(r.hinge_zero_frac) << '\n';
      timings << r.epoch << ',' << format_double(r.gen_seconds) << ',' << format_double(r.rec_seconds) << ','
              << format_double(r.eval_seconds) << '\n';
    }
    auto test = open_out(*out / "test_metrics.csv");
    test << "best_epoch,HR@10,HR@20,NDCG@10,NDCG@20\n"
         << result.best_epoch << ',' << format_double(result.test.hr10) << ',' << format_double(result.test.hr20)
         << ',' << format_double(result.test.ndcg10) << ',' << format_double(result.test.ndcg20) << '\n';
    Checkpoint best = to_checkpoint(result.best, cfg);
    best.meta["epoch"] = result.best_epoch;
    save_checkpoint(*out / "best.ckpt", best);
    Checkpoint last = to_checkpoint(result.last, cfg);
    last.meta["epoch"] = cfg.train.epochs;
    save_checkpoint(*out / "last.ckpt", last);
  }
  return result;
}

TrainResult train(const RunConfig& cfg) { return train(cfg, prepare_data(cfg)); }

std::vector<SweepRow> sweep_noise(const RunConfig& cfg) {
  cfg.check();
  if (cfg.sweep.methods.empty() || cfg.sweep.ratios.empty() || cfg.sweep.seeds == 0) {
    throw InvalidArgument("sweep needs at least one method, ratio and seed");
  }
  for (const std::string& m : cfg.sweep.methods) Method::parse(m);

  std::vector<SweepRow> rows;
  for (const std::string& m : cfg.sweep.methods) {
    for (double r : cfg.sweep.ratios) {
      for (std::size_t s = 0; s < cfg.sweep.seeds; ++s) rows.push_back({m, r, cfg.seed + s, {}});
    }
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(rows.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        RunConfig cell = cfg;
        cell.train.method = rows[i].method;
        cell.train.noise_ratio = rows[i].ratio;
        cell.seed = rows[i].seed;
        rows[i].test = train(cell, prepare_data(cell)).test;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t jobs = std::min(cfg.sweep.jobs, rows.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!errors[i].empty()) {
      throw Error("sweep cell " + rows[i].method + " ratio " + format_double(rows[i].ratio) + " seed " +
                  std::to_string(rows[i].seed) + ": " + errors[i]);
    }
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "method,ratio,seed,HR@10,HR@20,NDCG@10,NDCG@20\n";
  for (const SweepRow& r : rows) {
    out << r.method << ',' << format_double(r.ratio) << ',' << r.seed << ',' << format_double(r.test.hr10) << ','
        << format_double(r.test.hr20) << ',' << format_double(r.test.ndcg10) << ',' << format_double(r.test.ndcg20)
        << '\n';
  }
}

namespace {

struct LoadedRun {
  RunConfig cfg;
  Model model;
  PreparedData data;
};

LoadedRun load_run(const Checkpoint& ckpt) {
  if (!ckpt.meta.contains("config")) throw Error("checkpoint carries no run configuration");
  LoadedRun run;
  run.cfg = RunConfig::parse(ckpt.meta.at("config").get<std::string>());
  run.model = from_checkpoint(ckpt);
  run.data = prepare_data(run.cfg);
  return run;
}

PaddedSequence dump_padding(const LoadedRun& run, const UserSplit& u) {
  Rng rng = stream_rng(run.cfg.seed, Stream::Dump, static_cast<std::uint64_t>(u.user));
  InteractionSequence seq;
  seq.user = u.user;
  seq.items = u.train;
  return pad_sequence(seq, run.cfg.model.pad_k, run.data.dataset.vocab_size, rng);
}

}  // namespace

MatrixDump dump_matrices(const Checkpoint& ckpt, std::size_t cohort_len,
                         const std::optional<std::filesystem::path>& out) {
  const LoadedRun run = load_run(ckpt);
  MatrixDump dump;
  dump.n = cohort_len + run.cfg.model.pad_k;
  const auto n = static_cast<Eigen::Index>(dump.n);
  for (int z = 0; z < 2; ++z) dump.mean[z] = Eigen::MatrixXd::Zero(n, n);
  for (const UserSplit& u : run.data.split.users) {
    if (u.train.size() != cohort_len) continue;
    const PaddedSequence s = dump_padding(run, u);
    const auto mats = generator_matrices(run.model, s, run.cfg.sinkhorn);
    for (int z = 0; z < 2; ++z) {
      dump.mean[z] += mats[z].dense();
      const AugmentationProfile prof = classify(mats[z], cohort_len);
      for (const auto& [d, c] : prof.displacement) dump.histogram[z][d] += c;
      dump.placed[z] += prof.placed();
    }
    ++dump.users;
  }
  if (dump.users == 0) {
    throw DataError("no users with a training sequence of exactly " + std::to_string(cohort_len) + " items");
  }
  for (int z = 0; z < 2; ++z) dump.mean[z] /= static_cast<double>(dump.users);

  if (out) {
    std::filesystem::create_directories(*out);
    for (int z = 0; z < 2; ++z) {
      const std::string stem = "view" + std::to_string(z + 1);
      write_pgm(*out / (stem + ".pgm"), dump.mean[z]);
      open_out(*out / (stem + ".txt")) << to_coordinates(dump.mean[z]);
    }
    auto hist = open_out(*out / "histogram.csv");
    hist << "view,displacement,count\n";
    for (int z = 0; z < 2; ++z) {
      for (const auto& [d, c] : dump.histogram[z]) hist << z + 1 << ',' << d << ',' << c << '\n';
    }
  }
  return dump;
}

CaseStudy make_case_study(const PaddedSequence& padded, const std::array<TransformMatrix, 2>& matrices,
                          double gamma) {
  CaseStudy cs;
  cs.padded = padded;
  cs.matrices = matrices;
  const RelevanceProfile profile = make_profile(padded.base_size(), padded.size(), gamma);
  cs.ndcg_star = profile.ndcg_star;
  const std::vector<ItemId> items = padded.items();
  for (int z = 0; z < 2; ++z) {
    if (matrices[z].size() != padded.size()) throw DimensionError("case study: matrix size differs from s*");
    cs.views[z] = apply_items(matrices[z], items);
    cs.ndcg[z] = seq_ndcg_value(matrices[z].dense(), profile);
    cs.profile[z] = classify(matrices[z], padded.base_size());
  }
  return cs;
}

std::string CaseStudy::render(const std::vector<std::string>& item_names) const {
  auto name = [&](ItemId it) -> std::string {
    if (it == kSentinel) return "_";
    if (static_cast<std::size_t>(it) < item_names.size()) return item_names[it];
    return std::to_string(it);
  };
  auto line = [&](const std::vector<ItemId>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + name(items[i]);
    return s;
  };
  std::ostringstream out;
  out << "user " << padded.base.user << '\n';
  out << "s* (" << padded.base_size() << " + " << padded.pad_items.size() << " pad): " << line(padded.items()) << '\n';
  for (int z = 0; z < 2; ++z) {
    out << "view" << z + 1 << ": " << line(views[z]) << '\n';
    out << "view" << z + 1 << " NDCG " << format_double(ndcg[z]) << (ndcg[z] >= ndcg_star ? " >= " : " < ")
        << "NDCG* " << format_double(ndcg_star) << '\n';
    out << "view" << z + 1 << " masked " << profile[z].masked << " reordered " << profile[z].reordered
        << " introduced " << profile[z].introduced << '\n';
  }
  return out.str();
}

CaseStudy case_study(const Checkpoint& ckpt, const std::string& user) {
  const LoadedRun run = load_run(ckpt);
  std::int64_t id = -1;
  const auto& names = run.data.dataset.user_names;
  const auto it = std::find(names.begin(), names.end(), user);
  if (it != names.end()) {
    id = static_cast<std::int64_t>(it - names.begin());
  } else {
    try {
      std::size_t used = 0;
      id = std::stoll(user, &used);
      if (used != user.size()) id = -1;
    } catch (const std::exception&) {
      id = -1;
    }
  }
  for (const UserSplit& u : run.data.split.users) {
    if (u.user != id) continue;
    const PaddedSequence s = dump_padding(run, u);
    return make_case_study(s, generator_matrices(run.model, s, run.cfg.sinkhorn), run.cfg.objective.gamma);
  }
  throw DataError("unknown user '" + user + "'");
}

// ---------------------------------------------------------------------------
// Gradient-check registry.

namespace {

using ad::Matrix;
using ad::Var;

Matrix uniform(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
  return m;
}

Eigen::Index dim(Rng& rng, int lo = 1, int hi = 4) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Weighted sum with weights drawn from a fixed seed, so every evaluation of
// the same instance uses the same weights whatever the output shape.
Var weigh(Var out, std::uint64_t wseed) {
  Rng rng(wseed);
  return ad::sum(ad::hadamard(out, out.tape()->constant(uniform(rng, out.rows(), out.cols(), -1.0, 1.0))));
}

using Instance = std::pair<std::vector<Matrix>, ad::ScalarFn>;

GradCheckItem elementwise(std::string name, Var (*op)(Var), double lo, double hi) {
  return {name, [op, lo, hi](Rng& rng) -> Instance {
            const std::uint64_t ws = rng();
            return {{uniform(rng, dim(rng), dim(rng), lo, hi)},
                    [op, ws](ad::Tape&, std::span<const Var> in) { return weigh(op(in[0]), ws); }};
          }};
}

GradCheckItem binary_same(std::string name, Var (*op)(Var, Var)) {
  return {name, [op](Rng& rng) -> Instance {
            const std::uint64_t ws = rng();
            const auto r = dim(rng), c = dim(rng);
            return {{uniform(rng, r, c), uniform(rng, r, c)},
                    [op, ws](ad::Tape&, std::span<const Var> in) { return weigh(op(in[0], in[1]), ws); }};
          }};
}

Matrix soft_matrix(Rng& rng, Eigen::Index n) { return uniform(rng, n, n, 0.0, 1.0); }

}  // namespace

std::vector<GradCheckItem> gradcheck_registry() {
  std::vector<GradCheckItem> items;
  items.push_back({"matmul", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto r = dim(rng), k = dim(rng), c = dim(rng);
                     return {{uniform(rng, r, k), uniform(rng, k, c)}, [ws](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::matmul(in[0], in[1]), ws);
                             }};
                   }});
  items.push_back(elementwise("transpose", &ad::transpose, -2.0, 2.0));
  items.push_back(binary_same("add", &ad::add));
  items.push_back(binary_same("sub", &ad::sub));
  items.push_back({"scalar_mul", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const double s = uniform(rng, 1, 1)(0);
                     return {{uniform(rng, dim(rng), dim(rng))}, [ws, s](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::scalar_mul(in[0], s), ws);
                             }};
                   }});
  items.push_back(binary_same("hadamard", &ad::hadamard));
  items.push_back(elementwise("row_softmax", static_cast<Var (*)(Var)>(&ad::row_softmax), -2.0, 2.0));
  items.push_back({"row_softmax_masked", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto r = dim(rng), c = dim(rng, 2, 4);
                     ad::Mask keep(r, c);
                     for (Eigen::Index i = 0; i < keep.size(); ++i) keep(i) = rng() % 3 != 0;
                     return {{uniform(rng, r, c)}, [ws, keep](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::row_softmax(in[0], keep), ws);
                             }};
                   }});
  items.push_back(elementwise("row_sum", &ad::row_sum, -2.0, 2.0));
  items.push_back(elementwise("col_sum", &ad::col_sum, -2.0, 2.0));
  items.push_back({"broadcast_div", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto r = dim(rng), c = dim(rng);
                     const bool by_row = rng() % 2 == 0;
                     Matrix v = by_row ? uniform(rng, r, 1, 0.5, 2.0) : uniform(rng, 1, c, 0.5, 2.0);
                     return {{uniform(rng, r, c), v}, [ws](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::broadcast_div(in[0], in[1]), ws);
                             }};
                   }});
  items.push_back(elementwise("exp", &ad::exp, -2.0, 2.0));
  items.push_back(elementwise("log", &ad::log, 0.2, 2.0));
  items.push_back(elementwise("relu_hinge", &ad::relu_hinge, -2.0, 2.0));
  items.push_back(elementwise("l2_norm_sq", &ad::l2_norm_sq, -2.0, 2.0));
  items.push_back({"cosine_similarity", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto d = dim(rng, 2, 4);
                     return {{uniform(rng, dim(rng), d), uniform(rng, dim(rng), d)},
                             [ws](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::cosine_similarity(in[0], in[1]), ws);
                             }};
                   }});
  items.push_back({"mask_assign", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto n = dim(rng, 2, 4);
                     std::vector<bool> zr(n), zc(n);
                     for (Eigen::Index i = 0; i < n; ++i) {
                       zr[i] = rng() % 3 == 0;
                       zc[i] = rng() % 3 == 0;
                     }
                     return {{uniform(rng, n, n)}, [ws, zr, zc](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::mask_assign(in[0], zr, zc), ws);
                             }};
                   }});
  items.push_back({"constant_view",
                   [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     return {{uniform(rng, dim(rng), dim(rng))},
                             [ws](ad::Tape&, std::span<const Var> in) { return weigh(ad::constant_view(in[0]), ws); }};
                   },
                   true});
  items.push_back({"gather_rows", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto v = dim(rng, 2, 5);
                     std::vector<std::int64_t> ids(static_cast<std::size_t>(dim(rng, 1, 6)));
                     for (auto& id : ids) id = static_cast<std::int64_t>(rng() % (v + 1)) - 1;
                     return {{uniform(rng, v, dim(rng))}, [ws, ids](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::gather_rows(in[0], ids), ws);
                             }};
                   }});
  items.push_back({"stack_rows", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto c = dim(rng);
                     return {{uniform(rng, 1, c), uniform(rng, 1, c), uniform(rng, 1, c)},
                             [ws](ad::Tape&, std::span<const Var> in) {
                               return weigh(ad::stack_rows(std::vector<Var>(in.begin(), in.end())), ws);
                             }};
                   }});

  // Composite losses.
  items.push_back({"diversity_loss", [](Rng& rng) -> Instance {
                     const auto n = dim(rng, 2, 4);
                     return {{soft_matrix(rng, n), soft_matrix(rng, n)}, [](ad::Tape&, std::span<const Var> in) {
                               return diversity_loss(in[0], in[1], ObjectiveConfig{});
                             }};
                   }});
  items.push_back({"seq_ndcg", [](Rng& rng) -> Instance {
                     const auto n = dim(rng, 2, 6);
                     const auto s_len = static_cast<std::size_t>(dim(rng, 1, static_cast<int>(n)));
                     const RelevanceProfile prof = make_profile(s_len, static_cast<std::size_t>(n), 0.1);
                     return {{soft_matrix(rng, n)},
                             [prof](ad::Tape&, std::span<const Var> in) { return seq_ndcg(in[0], prof); }};
                   }});
  items.push_back({"semantic_loss", [](Rng& rng) -> Instance {
                     const auto n = dim(rng, 2, 6);
                     const auto s_len = static_cast<std::size_t>(dim(rng, 1, static_cast<int>(n)));
                     const double gamma = uniform(rng, 1, 1, 0.0, 0.5)(0);
                     const RelevanceProfile prof = make_profile(s_len, static_cast<std::size_t>(n), gamma);
                     return {{uniform(rng, n, n, 0.0, 0.1), uniform(rng, n, n, 0.0, 0.1)},
                             [prof](ad::Tape&, std::span<const Var> in) { return semantic_loss(in[0], in[1], prof); }};
                   }});
  const auto infonce_item = [](std::string name, Agreement dir, std::size_t negatives) {
    return GradCheckItem{name, [dir, negatives](Rng& rng) -> Instance {
                           const auto b = dim(rng, 3, 5), d = dim(rng, 2, 4);
                           const double tau = uniform(rng, 1, 1, 0.2, 1.0)(0);
                           return {{uniform(rng, b, d), uniform(rng, b, d)},
                                   [dir, negatives, tau](ad::Tape&, std::span<const Var> in) {
                                     return infonce(in[0], in[1], tau, dir, negatives);
                                   }};
                         }};
  };
  items.push_back(infonce_item("infonce_maximize", Agreement::Maximize, 0));
  items.push_back(infonce_item("infonce_minimize", Agreement::Minimize, 0));
  items.push_back(infonce_item("infonce_sampled_negatives", Agreement::Maximize, 1));
  items.push_back({"soft_sinkhorn", [](Rng& rng) -> Instance {
                     const std::uint64_t ws = rng();
                     const auto n = dim(rng, 2, 5);
                     const int iters = static_cast<int>(dim(rng, 1, 10));
                     return {{uniform(rng, n, n, 0.1, 2.0)}, [ws, iters](ad::Tape&, std::span<const Var> in) {
                               return weigh(project(in[0], SinkhornConfig{0.0, iters, false}).out, ws);
                             }};
                   }});
  items.push_back({"generator_soft_pipeline", [](Rng& rng) -> Instance {
                     const auto d = dim(rng, 2, 4), dp = dim(rng, 2, 3);
                     const std::size_t s_len = 6, k = static_cast<std::size_t>(dim(rng, 0, 2));
                     const Matrix emb = uniform(rng, static_cast<Eigen::Index>(s_len + k), d);
                     const RelevanceProfile prof = make_profile(s_len, s_len + k, 0.3);
                     std::vector<Matrix> in{uniform(rng, d, dp, -1.0, 1.0)};
                     for (int i = 0; i < 4; ++i) in.push_back(uniform(rng, dp, dp, -1.0, 1.0));
                     return {in, [emb, prof](ad::Tape& tape, std::span<const Var> v) {
                               GeneratorVars g{v[0], {v[1], v[3]}, {v[2], v[4]}};
                               const auto a = transition_matrices(tape.constant(emb), g);
                               const SinkhornConfig sc{0.0, 10, false};
                               const Var m1 = project(a[0], sc).out;
                               const Var m2 = project(a[1], sc).out;
                               return ad::add(diversity_loss(m1, m2, ObjectiveConfig{}), semantic_loss(m1, m2, prof));
                             }};
                   }});
  const auto rec_inputs = [](Rng& rng, Eigen::Index vocab, Eigen::Index positions, Eigen::Index d) {
    std::vector<Matrix> in{uniform(rng, vocab, d, -1.0, 1.0), uniform(rng, positions, d, -1.0, 1.0)};
    for (int i = 0; i < 5; ++i) in.push_back(uniform(rng, d, d, -1.0, 1.0));
    return in;
  };
  const auto rec_vars = [](std::span<const Var> v) {
    BackboneVars p{v[0], v[1], v[2], v[3], v[4], v[5], v[6], ad::transpose(v[0])};
    return p;
  };
  items.push_back({"encode_norm", [rec_inputs, rec_vars](Rng& rng) -> Instance {
                     const Eigen::Index vocab = 6, d = dim(rng, 2, 4);
                     std::vector<ItemId> seq(static_cast<std::size_t>(dim(rng, 1, 5)));
                     for (auto& it : seq) it = static_cast<ItemId>(rng() % vocab);
                     if (rng() % 2) seq.push_back(kSentinel);
                     return {rec_inputs(rng, vocab, 6, d), [seq, rec_vars](ad::Tape&, std::span<const Var> v) {
                               return ad::l2_norm_sq(encode(seq, rec_vars(v)));
                             }};
                   }});
  items.push_back({"next_item_loss", [rec_inputs, rec_vars](Rng& rng) -> Instance {
                     const Eigen::Index vocab = 6, d = dim(rng, 2, 4);
                     std::vector<ItemId> seq(static_cast<std::size_t>(dim(rng, 2, 5)));
                     for (auto& it : seq) it = static_cast<ItemId>(rng() % vocab);
                     return {rec_inputs(rng, vocab, 6, d), [seq, rec_vars](ad::Tape&, std::span<const Var> v) {
                               return next_item_loss(seq, rec_vars(v)).total;
                             }};
                   }});
  items.push_back({"recommender_ssl", [rec_inputs, rec_vars](Rng& rng) -> Instance {
                     const Eigen::Index vocab = 8, d = dim(rng, 2, 4);
                     std::vector<std::array<std::vector<ItemId>, 2>> views(3);
                     for (auto& pair : views) {
                       for (auto& view : pair) {
                         view.resize(static_cast<std::size_t>(dim(rng, 1, 4)));
                         for (auto& it : view) it = static_cast<ItemId>(rng() % vocab);
                       }
                     }
                     return {rec_inputs(rng, vocab, 6, d), [views, rec_vars](ad::Tape&, std::span<const Var> v) {
                               return ssl_loss(views, rec_vars(v), 0.5);
                             }};
                   }});
  return items;
}

std::vector<GradCheckLine> run_gradchecks(const std::vector<GradCheckItem>& items, std::size_t trials,
                                          double tolerance, std::uint64_t seed) {
  std::vector<GradCheckLine> lines;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const GradCheckItem& item = items[k];
    GradCheckLine line{item.name, 0.0, true, ""};
    Rng rng = stream_rng(seed, Stream::Init, k);
    try {
      for (std::size_t t = 0; t < trials; ++t) {
        auto [point, fn] = item.instance(rng);
        if (item.expect_zero) {
          ad::Tape tape;
          std::vector<Var> in;
          for (const Matrix& m : point) in.push_back(tape.leaf(m));
          tape.backward(fn(tape, in));
          for (const Var& v : in) line.worst = std::max(line.worst, v.grad().cwiseAbs().maxCoeff());
        } else {
          line.worst = std::max(line.worst, ad::grad_check(fn, point).max_rel_error);
        }
      }
      line.pass = line.worst < tolerance;
    } catch (const std::exception& e) {
      line.pass = false;
      line.error = e.what();
    }
    lines.push_back(line);
  }
  return lines;
}

}  // namespace seqaug
