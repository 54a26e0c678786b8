#include "seqaug/recommender.hpp"

#include "seqaug/errors.hpp"
#include "seqaug/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace seqaug {

namespace {

Eigen::MatrixXd normal(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

BackboneParams BackboneParams::init(std::size_t vocab, std::size_t positions, std::size_t d, double emb_std,
                                    Rng& rng) {
  if (vocab == 0 || positions == 0 || d == 0) throw InvalidArgument("backbone dimensions must be positive");
  BackboneParams p;
  const double w_std = 1.0 / std::sqrt(static_cast<double>(d));
  p.emb = normal(vocab, d, emb_std, rng);
  p.pos = normal(positions, d, emb_std, rng);
  p.wq = normal(d, d, w_std, rng);
  p.wk = normal(d, d, w_std, rng);
  p.wv = normal(d, d, w_std, rng);
  p.w1 = normal(d, d, w_std, rng);
  p.w2 = normal(d, d, w_std, rng);
  return p;
}

std::vector<NamedMatrix> BackboneParams::named() {
  return {{"rec.emb", &emb}, {"rec.pos", &pos}, {"rec.wq", &wq}, {"rec.wk", &wk},
          {"rec.wv", &wv},   {"rec.w1", &w1},   {"rec.w2", &w2}};
}

BackboneVars bind(ad::Tape& tape, const BackboneParams& p, bool trainable) {
  BackboneVars v;
  v.emb = tape.leaf(p.emb, trainable);
  v.pos = tape.leaf(p.pos, trainable);
  v.wq = tape.leaf(p.wq, trainable);
  v.wk = tape.leaf(p.wk, trainable);
  v.wv = tape.leaf(p.wv, trainable);
  v.w1 = tape.leaf(p.w1, trainable);
  v.w2 = tape.leaf(p.w2, trainable);
  v.emb_t = ad::transpose(v.emb);
  return v;
}

ad::Var item_rows(std::span<const ItemId> items, const BackboneVars& p) {
  return ad::gather_rows(p.emb, items);
}

ad::Var hidden_states(ad::Var x_items, const std::vector<bool>& valid, const BackboneVars& p) {
  const auto len = static_cast<std::size_t>(x_items.rows());
  if (valid.size() != len) throw DimensionError("hidden_states: validity mask length differs from input");
  if (len > static_cast<std::size_t>(p.pos.rows())) {
    throw DimensionError("hidden_states: sequence of " + std::to_string(len) + " exceeds " +
                         std::to_string(p.pos.rows()) + " positions");
  }
  std::vector<std::int64_t> pos_ids(len);
  for (std::size_t t = 0; t < len; ++t) pos_ids[t] = valid[t] ? static_cast<std::int64_t>(t) : -1;
  const ad::Var x = ad::add(x_items, ad::gather_rows(p.pos, pos_ids));

  const auto l = static_cast<Eigen::Index>(len);
  ad::Mask keep(l, l);
  for (Eigen::Index t = 0; t < l; ++t) {
    for (Eigen::Index s = 0; s < l; ++s) keep(t, s) = s <= t && valid[t] && valid[s];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  const ad::Var q = ad::matmul(x, p.wq);
  const ad::Var k = ad::matmul(x, p.wk);
  const ad::Var v = ad::matmul(x, p.wv);
  const ad::Var attn = ad::row_softmax(ad::scalar_mul(ad::matmul(q, ad::transpose(k)), scale), keep);
  const ad::Var h = ad::add(x, ad::matmul(attn, v));
  const ad::Var ff = ad::matmul(ad::relu_hinge(ad::matmul(h, p.w1)), p.w2);
  return ad::add(h, ff);
}

ad::Var encode_embedded(ad::Var x_items, const std::vector<bool>& valid, const BackboneVars& p) {
  std::int64_t last = -1;
  for (std::size_t t = 0; t < valid.size(); ++t) {
    if (valid[t]) last = static_cast<std::int64_t>(t);
  }
  if (last < 0) throw InvalidArgument("encode: empty view (every position is a sentinel)");
  // Positions after the last real item cannot influence it under causal
  // masking, so only the prefix is run.
  const auto used = static_cast<Eigen::Index>(last + 1);
  ad::Var x = x_items;
  std::vector<bool> v(valid.begin(), valid.begin() + used);
  if (used < x_items.rows()) {
    Eigen::MatrixXd take = Eigen::MatrixXd::Zero(used, x_items.rows());
    take.leftCols(used).setIdentity();
    x = ad::matmul(x_items.tape()->constant(std::move(take)), x_items);
  }
  const ad::Var h = hidden_states(x, v, p);
  Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(1, used);
  pick(0, used - 1) = 1.0;
  return ad::matmul(h.tape()->constant(std::move(pick)), h);
}

ad::Var encode(std::span<const ItemId> items, const BackboneVars& p) {
  std::vector<bool> valid(items.size());
  for (std::size_t t = 0; t < items.size(); ++t) valid[t] = items[t] != kSentinel;
  std::int64_t last = -1;
  for (std::size_t t = 0; t < valid.size(); ++t) {
    if (valid[t]) last = static_cast<std::int64_t>(t);
  }
  if (last < 0) throw InvalidArgument("encode: empty view (every position is a sentinel)");
  const auto used = static_cast<std::size_t>(last + 1);
  const std::span<const ItemId> prefix = items.first(used);
  valid.resize(used);
  const ad::Var h = hidden_states(item_rows(prefix, p), valid, p);
  Eigen::MatrixXd pick = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(used));
  pick(0, static_cast<Eigen::Index>(used) - 1) = 1.0;
  return ad::matmul(h.tape()->constant(std::move(pick)), h);
}

LossSum next_item_loss(std::span<const ItemId> items, const BackboneVars& p) {
  LossSum out;
  if (items.size() < 2) return out;
  const std::span<const ItemId> inputs = items.first(items.size() - 1);
  std::vector<bool> valid(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) valid[t] = inputs[t] != kSentinel;
  const ad::Var h = hidden_states(item_rows(inputs, p), valid, p);
  const ad::Var probs = ad::row_softmax(ad::matmul(h, p.emb_t));

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
  Eigen::MatrixXd fill = Eigen::MatrixXd::Zero(probs.rows(), 1);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const ItemId target = items[t + 1];
    if (target == kSentinel || !valid[t]) {
      fill(static_cast<Eigen::Index>(t), 0) = 1.0;  // log(1) = 0
      continue;
    }
    onehot(static_cast<Eigen::Index>(t), target) = 1.0;
    ++out.terms;
  }
  ad::Tape& tape = *probs.tape();
  const ad::Var picked = ad::add(ad::row_sum(ad::hadamard(probs, tape.constant(std::move(onehot)))),
                                 tape.constant(std::move(fill)));
  out.total = ad::scalar_mul(ad::sum(ad::log(picked)), -1.0);
  return out;
}

ad::Var ssl_loss(const std::vector<std::array<std::vector<ItemId>, 2>>& views, const BackboneVars& p, double tau,
                 std::size_t negatives) {
  std::vector<ad::Var> anchors;
  std::vector<ad::Var> positives;
  for (const auto& pair : views) {
    const auto nonempty = [](const std::vector<ItemId>& v) {
      return std::any_of(v.begin(), v.end(), [](ItemId it) { return it != kSentinel; });
    };
    if (!nonempty(pair[0]) || !nonempty(pair[1])) continue;
    anchors.push_back(encode(pair[0], p));
    positives.push_back(encode(pair[1], p));
  }
  if (anchors.size() < 2) return {};
  return infonce(ad::stack_rows(anchors), ad::stack_rows(positives), tau, Agreement::Maximize, negatives);
}

Eigen::VectorXd score_next(std::span<const ItemId> items, const BackboneParams& p) {
  ad::Tape tape;
  const BackboneVars vars = bind(tape, p, false);
  const ad::Var rep = encode(items, vars);
  return p.emb * rep.value().transpose();
}

std::size_t rank_of(const Eigen::VectorXd& scores, ItemId target) {
  const double t = scores(target);
  std::size_t ahead = 0;
  for (Eigen::Index v = 0; v < scores.size(); ++v) {
    if (scores(v) > t || (scores(v) == t && v < target)) ++ahead;
  }
  return ahead + 1;
}

RankingMetrics metrics_from_ranks(const std::vector<std::size_t>& ranks) {
  RankingMetrics m;
  m.users = ranks.size();
  if (ranks.empty()) return m;
  for (std::size_t r : ranks) {
    const double gain = 1.0 / std::log2(static_cast<double>(r) + 1.0);
    if (r <= 10) {
      m.hr10 += 1.0;
      m.ndcg10 += gain;
    }
    if (r <= 20) {
      m.hr20 += 1.0;
      m.ndcg20 += gain;
    }
  }
  const double n = static_cast<double>(ranks.size());
  m.hr10 /= n;
  m.hr20 /= n;
  m.ndcg10 /= n;
  m.ndcg20 /= n;
  return m;
}

std::vector<std::size_t> target_ranks(const DatasetSplit& split, const BackboneParams& p, EvalTarget target) {
  std::vector<std::size_t> ranks;
  ranks.reserve(split.users.size());
  std::vector<ItemId> input;
  for (const UserSplit& u : split.users) {
    input = u.train;
    ItemId goal = u.valid;
    if (target == EvalTarget::Test) {
      input.push_back(u.valid);
      if (input.size() > split.max_len) input.erase(input.begin(), input.end() - static_cast<std::ptrdiff_t>(split.max_len));
      goal = u.test;
    }
    ranks.push_back(rank_of(score_next(input, p), goal));
  }
  return ranks;
}

RankingMetrics evaluate(const DatasetSplit& split, const BackboneParams& p, EvalTarget target) {
  return metrics_from_ranks(target_ranks(split, p, target));
}

}  // namespace seqaug
